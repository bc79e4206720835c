#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hypflow/curve.hpp"
#include "hypflow/rep.hpp"

// Numerical verification harness for the interval-growth machinery: the
// basic-lemma interval search around a base point, the polynomial
// approximation inequality along the orbit, sublevel-measure ratios of
// vector polynomials, and the detector for the exceptional sets
// S_g = {x : u(x) g p_0 has no expanding component}.

namespace hypflow {

struct BasicLemmaReport {
  double s_lo = 0.0, s_hi = 0.0;   // the interval found, contains x
  double norm_lo = 0.0, norm_hi = 0.0;  // orbit norms at the endpoints
  bool lo_interior = false, hi_interior = false;
  double t = 0.0;
  double growth_cap = 0.0;         // the constant C
  int exponent = 2;                // p in {n, 2}
  double r0 = 1.0;                 // inferred R_0 over the interior endpoints

  double length() const { return s_hi - s_lo; }
  // The three conditions: length bound and the endpoint norm bounds with the
  // inferred R_0 (vacuous at domain-boundary endpoints).
  bool verified(double vnorm) const {
    if (!(std::exp(t) * std::pow(length(), exponent) < growth_cap))
      return false;
    if (lo_interior && !(norm_lo >= vnorm / r0 * (1.0 - 1e-12))) return false;
    if (hi_interior && !(norm_hi >= vnorm / r0 * (1.0 - 1e-12))) return false;
    return true;
  }
};

struct BasicLemmaOptions {
  double endpoint_threshold = 1.0;  // stop once both endpoint norms reach
                                    // threshold * ||v||
  int max_doublings = 60;
};

namespace detail {

inline double orbit_norm(const RepSpace& rep, const SmoothCurve& c, double t,
                         const WedgeVector& v, double s) {
  const GroupElement g = compose(make_a(t, rep.n), make_u(c.eval(s), rep.n));
  return act(g, v).coords.norm();
}

}  // namespace detail

// Grow [s_lo, s_hi] symmetrically around x on a dyadic grid until either both
// interior endpoint norms of a_t u(phi(.)) v have recovered past the
// threshold or the next doubling would break e^t len^p < C.
inline BasicLemmaReport basic_lemma_search(const SmoothCurve& c,
                                           const WedgeVector& v, double t,
                                           double growth_cap, double x,
                                           int exponent,
                                           const BasicLemmaOptions& opts = {}) {
  const RepSpace& rep = *v.rep;
  if (x < c.lo() || x > c.hi())
    throw DimensionMismatch("basic_lemma_search: x outside the domain");
  const double vnorm = v.coords.norm();
  const double span = c.hi() - c.lo();
  const double min_half = span * std::pow(2.0, -40);
  if (std::exp(t) * std::pow(2.0 * min_half, exponent) >= growth_cap)
    throw NoValidInterval(
        "basic_lemma_search: even the minimal grid cell violates the length "
        "bound");
  double half = min_half;
  auto clip_lo = [&](double h) { return std::max(c.lo(), x - h); };
  auto clip_hi = [&](double h) { return std::min(c.hi(), x + h); };
  for (int it = 0; it < opts.max_doublings; ++it) {
    const double next = half * 2.0;
    const double len_next = clip_hi(next) - clip_lo(next);
    if (std::exp(t) * std::pow(len_next, exponent) >= growth_cap) break;
    const double lo = clip_lo(next), hi = clip_hi(next);
    const bool lo_int = lo > c.lo() + 1e-15, hi_int = hi < c.hi() - 1e-15;
    const double nlo = detail::orbit_norm(rep, c, t, v, lo);
    const double nhi = detail::orbit_norm(rep, c, t, v, hi);
    half = next;
    const bool lo_ok = !lo_int || nlo >= opts.endpoint_threshold * vnorm;
    const bool hi_ok = !hi_int || nhi >= opts.endpoint_threshold * vnorm;
    if ((lo_ok && hi_ok) || (!lo_int && !hi_int)) break;
  }
  BasicLemmaReport rep_out;
  rep_out.s_lo = clip_lo(half);
  rep_out.s_hi = clip_hi(half);
  rep_out.lo_interior = rep_out.s_lo > c.lo() + 1e-15;
  rep_out.hi_interior = rep_out.s_hi < c.hi() - 1e-15;
  rep_out.norm_lo = detail::orbit_norm(rep, c, t, v, rep_out.s_lo);
  rep_out.norm_hi = detail::orbit_norm(rep, c, t, v, rep_out.s_hi);
  rep_out.t = t;
  rep_out.growth_cap = growth_cap;
  rep_out.exponent = exponent;
  double r0 = 1.0;
  if (rep_out.lo_interior && rep_out.norm_lo > 0.0)
    r0 = std::max(r0, vnorm / rep_out.norm_lo);
  if (rep_out.hi_interior && rep_out.norm_hi > 0.0)
    r0 = std::max(r0, vnorm / rep_out.norm_hi);
  rep_out.r0 = r0;
  if (!rep_out.verified(vnorm))
    throw VerificationFailed("basic_lemma_search: report failed its own check");
  return rep_out;
}

struct ApproximationReport {
  double sup_gap = 0.0;
  double bound = 0.0;
  bool pass = false;
  BasicLemmaReport interval;
};

// On an explicit interval: sup_s || a_t u(phi(s)) v - a_t u(P_x(s)) v ||
// against c_tol * || a_t u(phi(x)) v ||, with P_x the degree-n Taylor model.
inline ApproximationReport approximation_check_on(const SmoothCurve& c,
                                                  const WedgeVector& v,
                                                  double t, double x,
                                                  double c_tol, double s_lo,
                                                  double s_hi,
                                                  int grid_points = 1000) {
  const RepSpace& rep = *v.rep;
  const int n = rep.n;
  const TaylorModel p = taylor_model(c, x, n);
  const GroupElement at = make_a(t, n);
  double sup = 0.0;
  for (int i = 0; i <= grid_points; ++i) {
    const double s = s_lo + (s_hi - s_lo) * i / grid_points;
    const Eigen::VectorXd a =
        act(compose(at, make_u(c.eval(s), n)), v).coords;
    const Eigen::VectorXd b =
        act(compose(at, make_u(p.eval(s), n)), v).coords;
    sup = std::max(sup, (a - b).norm());
  }
  ApproximationReport out;
  out.sup_gap = sup;
  out.bound = c_tol * act(compose(at, make_u(c.eval(x), n)), v).coords.norm();
  out.pass = sup <= out.bound;
  return out;
}

// The public check runs on the interval found by the basic-lemma search with
// C = 1 and the curve-dimension exponent.
inline ApproximationReport approximation_check(const SmoothCurve& c,
                                               const WedgeVector& v, double t,
                                               double x, double c_tol) {
  const int n = v.rep->n;
  const BasicLemmaReport interval =
      basic_lemma_search(c, v, t, 1.0, x, n);
  ApproximationReport out =
      approximation_check_on(c, v, t, x, c_tol, interval.s_lo, interval.s_hi);
  out.interval = interval;
  return out;
}

// ---------------------------------------------------------------------------
// Sublevel measures of vector polynomials.

struct VectorPolynomial {
  std::vector<Eigen::VectorXd> coeffs;  // coeffs[k] multiplies s^k

  Eigen::VectorXd eval(double s) const {
    Eigen::VectorXd acc = coeffs.back();
    for (int k = static_cast<int>(coeffs.size()) - 2; k >= 0; --k)
      acc = coeffs[k] + s * acc;
    return acc;
  }
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct SublevelMeasures {
  double small = 0.0;  // |{s in J : ||zeta(s)|| < r}|
  double large = 0.0;  // |{s in J : ||zeta(s)|| < R}|
};

// Grid measures (10^4 points) of the two sublevel sets. Requires
// sup_J ||zeta|| >= R.
inline SublevelMeasures poly_growth_ratio(const VectorPolynomial& zeta,
                                          double j_lo, double j_hi, double r,
                                          double big_r, int grid = 10000) {
  if (!(r > 0.0 && r < big_r))
    throw DimensionMismatch("poly_growth_ratio: need 0 < r < R");
  double sup = 0.0;
  int count_small = 0, count_large = 0;
  for (int i = 0; i < grid; ++i) {
    const double s = j_lo + (j_hi - j_lo) * (i + 0.5) / grid;
    const double norm = zeta.eval(s).norm();
    sup = std::max(sup, norm);
    if (norm < r) ++count_small;
    if (norm < big_r) ++count_large;
  }
  if (sup < big_r)
    throw SupTooSmall("poly_growth_ratio: sup over J below R");
  SublevelMeasures out;
  out.small = (j_hi - j_lo) * count_small / grid;
  out.large = (j_hi - j_lo) * count_large / grid;
  return out;
}

// The polynomial orbit map s -> u(P(s)) v as a VectorPolynomial, recovered by
// interpolation at Chebyshev nodes with the degree found adaptively; used
// both to feed poly_growth_ratio and to compute the exact orbit degree n_1.
inline VectorPolynomial orbit_polynomial(const RepSpace& rep,
                                         const TaylorModel& p,
                                         const WedgeVector& v,
                                         double scale = 1.0) {
  const int n = rep.n;
  auto sample = [&](double s) {
    return wedge_apply(rep, ad_matrix(rep, make_u(p.eval(s * scale), n)),
                       v.coords);
  };
  for (int deg = 4; deg <= 256; deg *= 2) {
    // Chebyshev nodes on [-1, 1]
    Eigen::MatrixXd vals(rep.dim, deg + 1);
    Eigen::MatrixXd vand(deg + 1, deg + 1);
    Eigen::VectorXd nodes(deg + 1);
    for (int i = 0; i <= deg; ++i) {
      nodes(i) = std::cos(M_PI * i / deg);
      vals.col(i) = sample(nodes(i));
      double pw = 1.0;
      for (int k = 0; k <= deg; ++k) {
        vand(i, k) = pw;
        pw *= nodes(i);
      }
    }
    const Eigen::MatrixXd coef =
        vand.colPivHouseholderQr().solve(vals.transpose());
    // verify at fresh nodes
    VectorPolynomial poly;
    for (int k = 0; k <= deg; ++k)
      poly.coeffs.push_back(coef.row(k).transpose());
    double err = 0.0, ref = 1e-300;
    for (int i = 0; i < 7; ++i) {
      const double s = std::cos(0.37 + i);
      const Eigen::VectorXd exact = sample(s);
      err = std::max(err, (poly.eval(s) - exact).norm());
      ref = std::max(ref, exact.norm());
    }
    if (err <= 1e-8 * ref) {
      // trim trailing zero coefficients to expose the exact degree
      double top = 0.0;
      for (const auto& cc : poly.coeffs) top = std::max(top, cc.norm());
      while (poly.coeffs.size() > 1 &&
             poly.coeffs.back().norm() < 1e-9 * top)
        poly.coeffs.pop_back();
      return poly;
    }
  }
  throw VerificationFailed("orbit_polynomial: interpolation did not converge");
}

// Exact degree of s -> u(P(s)) v for a generic degree-n Taylor polynomial and
// generic v (the bound used by the sublevel estimates).
inline int orbit_degree(const RepSpace& rep, std::uint64_t seed = 2024) {
  Rng rng(seed);
  const int n = rep.n;
  std::vector<std::vector<double>> coeffs(n - 1);
  for (auto& comp : coeffs) {
    comp.resize(n + 1);
    for (auto& x : comp) x = rng.normal();
  }
  const SmoothCurve generic = SmoothCurve::polynomial(coeffs, -1.0, 1.0);
  const TaylorModel p = taylor_model(generic, 0.0, n);
  WedgeVector v = zero_vector(rep);
  for (int i = 0; i < rep.dim; ++i) v.coords(i) = rng.normal();
  return orbit_polynomial(rep, p, v).degree();
}

// ---------------------------------------------------------------------------
// Detector for S_g = {x : u(x) g p_0 in V^- + V^0}.

// p_0 spanning wedge of the so(2,1) block along horospherical coordinate
// `axis` (1 or 2) for n = 3: wedge of {X+_axis, H, X-_axis}.
inline WedgeVector block_p0(const RepSpace& rep, int axis) {
  if (rep.n != 3 || (axis != 1 && axis != 2))
    throw DimensionMismatch("block_p0: n = 3 with axis 1 or 2 required");
  auto unit = [&](int i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(rep.dim_g);
    e(i) = 1.0;
    return e;
  };
  // basis order: X+_1, X+_2, H, Theta, X-_1, X-_2
  const int plus = axis - 1;
  const int minus = 4 + axis - 1;
  return wedge_of(rep, {unit(plus), unit(2), unit(minus)});
}

struct GridSpec {
  double lo = -2.0, hi = 2.0;
  int points_per_axis = 81;
};

struct SgDetection {
  std::vector<Eigen::VectorXd> points;
  FitClass cls = FitClass::Empty;
  double residual = 0.0;
};

inline SgDetection sg_sphere_detect(const GroupElement& g,
                                    const WedgeVector& p0, const GridSpec& grid,
                                    const Tolerances& tol = default_tol()) {
  const RepSpace& rep = *p0.rep;
  const int n = rep.n;
  const double cutoff = tol.sg_zero * p0.coords.norm();
  SgDetection out;
  const int count = grid.points_per_axis;
  auto coord = [&](int i) {
    return grid.lo + (grid.hi - grid.lo) * i / (count - 1);
  };
  const WedgeVector gp0 = act(g, p0);
  if (n == 2) {
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd x(1);
      x << coord(i);
      const WedgeVector w = act(make_u(x, n), gp0);
      if (stable_project(w).plus.coords.norm() < cutoff) out.points.push_back(x);
    }
  } else {
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j) {
        Eigen::VectorXd x(2);
        x << coord(i), coord(j);
        const WedgeVector w = act(make_u(x, n), gp0);
        if (stable_project(w).plus.coords.norm() < cutoff)
          out.points.push_back(x);
      }
  }
  if (static_cast<int>(out.points.size()) >= n + 2) {
    const SphereAffineFit fit = sphere_affine_residual(out.points);
    out.cls = fit.cls;
    out.residual = fit.residual;
  }
  return out;
}

}  // namespace hypflow
