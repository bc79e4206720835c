#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "hypflow/group.hpp"

// C^k curves phi: [a, b] -> R^{n-1} with exact derivatives. Three closed-form
// families are supported so that every derivative used by the growth lemmas
// is exact: polynomials, trigonometric polynomials, and natural cubic
// splines (exact up to order 3).

namespace hypflow {

enum class CurveKind { Polynomial, Trigonometric, CubicSpline };

class SmoothCurve {
 public:
  // Polynomial: coeffs[c][k] is the coefficient of s^k in component c.
  static SmoothCurve polynomial(std::vector<std::vector<double>> coeffs,
                                double a, double b) {
    SmoothCurve c;
    c.kind_ = CurveKind::Polynomial;
    c.a_ = a;
    c.b_ = b;
    c.poly_ = std::move(coeffs);
    c.dim_ = static_cast<int>(c.poly_.size());
    c.max_order_ = 1 << 20;
    c.check_domain();
    return c;
  }

  // Trigonometric polynomial with base frequency omega:
  //   phi_c(s) = a0[c] + sum_j (cos_c[j] cos((j+1) omega s) + sin_c[j] sin((j+1) omega s)).
  static SmoothCurve trigonometric(std::vector<double> a0,
                                   std::vector<std::vector<double>> cos_coeffs,
                                   std::vector<std::vector<double>> sin_coeffs,
                                   double omega, double a, double b) {
    SmoothCurve c;
    c.kind_ = CurveKind::Trigonometric;
    c.a_ = a;
    c.b_ = b;
    c.trig_a0_ = std::move(a0);
    c.trig_cos_ = std::move(cos_coeffs);
    c.trig_sin_ = std::move(sin_coeffs);
    c.omega_ = omega;
    c.dim_ = static_cast<int>(c.trig_a0_.size());
    if (c.trig_cos_.size() != static_cast<std::size_t>(c.dim_) ||
        c.trig_sin_.size() != static_cast<std::size_t>(c.dim_))
      throw DimensionMismatch("trigonometric: coefficient blocks disagree");
    c.max_order_ = 1 << 20;
    c.check_domain();
    return c;
  }

  // Natural cubic spline through values[c][i] at equally spaced knots on [a, b].
  static SmoothCurve cubic_spline(std::vector<std::vector<double>> values,
                                  double a, double b) {
    SmoothCurve c;
    c.kind_ = CurveKind::CubicSpline;
    c.a_ = a;
    c.b_ = b;
    c.dim_ = static_cast<int>(values.size());
    c.max_order_ = 3;
    c.check_domain();
    const int m = static_cast<int>(values[0].size());
    if (m < 3) throw DimensionMismatch("cubic_spline: need at least 3 knots");
    c.knots_ = m;
    const double h = (b - a) / (m - 1);
    c.knot_h_ = h;
    c.spline_.resize(c.dim_);
    for (int comp = 0; comp < c.dim_; ++comp) {
      const auto& y = values[comp];
      if (static_cast<int>(y.size()) != m)
        throw DimensionMismatch("cubic_spline: ragged values");
      // Second derivatives sig with natural boundary conditions:
      // sig[i-1] + 4 sig[i] + sig[i+1] = 6 (y[i-1] - 2 y[i] + y[i+1]) / h^2,
      // sig[0] = sig[m-1] = 0. Thomas algorithm on the interior rows.
      std::vector<double> rhs(m, 0.0), sig(m, 0.0), cp(m, 0.0), dp(m, 0.0);
      for (int i = 1; i < m - 1; ++i)
        rhs[i] = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (h * h);
      for (int i = 1; i < m - 1; ++i) {
        const double lower = (i == 1) ? 0.0 : 1.0;
        const double upper = (i == m - 2) ? 0.0 : 1.0;
        const double diag = 4.0;
        const double denom = diag - lower * cp[i - 1];
        cp[i] = upper / denom;
        dp[i] = (rhs[i] - lower * dp[i - 1]) / denom;
      }
      for (int i = m - 2; i >= 1; --i) sig[i] = dp[i] - cp[i] * sig[i + 1];
      // Per-interval cubic in (s - s_i): y_i + B ds + C ds^2 + D ds^3.
      auto& segs = c.spline_[comp];
      segs.resize(m - 1);
      for (int i = 0; i < m - 1; ++i) {
        const double bcoef =
            (y[i + 1] - y[i]) / h - h * (2.0 * sig[i] + sig[i + 1]) / 6.0;
        segs[i] = {y[i], bcoef, sig[i] / 2.0, (sig[i + 1] - sig[i]) / (6.0 * h)};
      }
    }
    return c;
  }

  CurveKind kind() const { return kind_; }
  double lo() const { return a_; }
  double hi() const { return b_; }
  int dim() const { return dim_; }
  int max_order() const { return max_order_; }

  Eigen::VectorXd eval(double s) const { return derivative(s, 0); }

  // Exact m-th derivative.
  Eigen::VectorXd derivative(double s, int m) const {
    if (m < 0 || m > max_order_)
      throw OrderOverflow("derivative: order exceeds max_order");
    Eigen::VectorXd out(dim_);
    switch (kind_) {
      case CurveKind::Polynomial: {
        for (int c = 0; c < dim_; ++c) {
          const auto& p = poly_[c];
          double acc = 0.0;
          for (int k = static_cast<int>(p.size()) - 1; k >= m; --k) {
            double fac = 1.0;
            for (int j = 0; j < m; ++j) fac *= (k - j);
            acc = acc * s + p[k] * fac;
          }
          out(c) = acc;
        }
        break;
      }
      case CurveKind::Trigonometric: {
        for (int c = 0; c < dim_; ++c) {
          double acc = (m == 0) ? trig_a0_[c] : 0.0;
          const auto& cc = trig_cos_[c];
          const auto& sc = trig_sin_[c];
          for (std::size_t j = 0; j < cc.size() || j < sc.size(); ++j) {
            const double f = (static_cast<double>(j) + 1.0) * omega_;
            const double fm = std::pow(f, m);
            const double ph = 0.5 * M_PI * m;  // d/ds cos -> cos(fs + pi/2) etc.
            if (j < cc.size() && cc[j] != 0.0)
              acc += cc[j] * fm * std::cos(f * s + ph);
            if (j < sc.size() && sc[j] != 0.0)
              acc += sc[j] * fm * std::sin(f * s + ph);
          }
          out(c) = acc;
        }
        break;
      }
      case CurveKind::CubicSpline: {
        int seg = static_cast<int>((s - a_) / knot_h_);
        seg = std::max(0, std::min(knots_ - 2, seg));
        const double ds = s - (a_ + seg * knot_h_);
        for (int c = 0; c < dim_; ++c) {
          const auto& q = spline_[c][seg];
          double v = 0.0;
          switch (m) {
            case 0: v = q[0] + ds * (q[1] + ds * (q[2] + ds * q[3])); break;
            case 1: v = q[1] + ds * (2.0 * q[2] + 3.0 * ds * q[3]); break;
            case 2: v = 2.0 * q[2] + 6.0 * ds * q[3]; break;
            default: v = 6.0 * q[3]; break;
          }
          out(c) = v;
        }
        break;
      }
    }
    return out;
  }

 private:
  void check_domain() const {
    if (!(a_ < b_)) throw DimensionMismatch("curve: empty domain");
    if (dim_ < 1 || dim_ > 2)
      throw DimensionMismatch("curve: component count must be 1 or 2");
  }

  CurveKind kind_ = CurveKind::Polynomial;
  double a_ = 0.0, b_ = 1.0;
  int dim_ = 1;
  int max_order_ = 0;
  std::vector<std::vector<double>> poly_;
  std::vector<double> trig_a0_;
  std::vector<std::vector<double>> trig_cos_, trig_sin_;
  double omega_ = 1.0;
  int knots_ = 0;
  double knot_h_ = 1.0;
  std::vector<std::vector<std::array<double, 4>>> spline_;
};

struct TaylorModel {
  double center = 0.0;
  int degree = 0;
  // coeffs[m] in R^{dim}: the (s - center)^m / m!-normalized coefficient,
  // i.e. P(s) = sum_m coeffs[m] (s - center)^m with coeffs[m] = phi^(m)(x)/m!.
  std::vector<Eigen::VectorXd> coeffs;

  Eigen::VectorXd eval(double s) const {
    const double ds = s - center;
    Eigen::VectorXd acc = coeffs.back();
    for (int m = degree - 1; m >= 0; --m) acc = coeffs[m] + ds * acc;
    return acc;
  }
};

inline TaylorModel taylor_model(const SmoothCurve& c, double x, int degree) {
  if (degree > c.max_order())
    throw OrderOverflow("taylor_model: degree exceeds max_order");
  TaylorModel t;
  t.center = x;
  t.degree = degree;
  double fact = 1.0;
  for (int m = 0; m <= degree; ++m) {
    if (m > 0) fact *= m;
    t.coeffs.push_back(c.derivative(x, m) / fact);
  }
  return t;
}

// Remainder bound delta * |J|^degree with delta the oscillation of the
// degree-th derivative over J divided by degree!. The oscillation is taken
// over a dense grid.
inline double taylor_remainder_bound(const SmoothCurve& c, int degree,
                                     double jlo, double jhi,
                                     int grid = 2001) {
  double fact = 1.0;
  for (int m = 2; m <= degree; ++m) fact *= m;
  Eigen::VectorXd mn, mx;
  for (int i = 0; i < grid; ++i) {
    const double s = jlo + (jhi - jlo) * i / (grid - 1);
    const Eigen::VectorXd d = c.derivative(s, degree);
    if (i == 0) {
      mn = d;
      mx = d;
    } else {
      mn = mn.cwiseMin(d);
      mx = mx.cwiseMax(d);
    }
  }
  const double osc = (mx - mn).norm();
  return osc / fact * std::pow(jhi - jlo, degree);
}

inline double rolle_bound_constant(int m) {
  return std::pow(2.0, m) * std::pow(3.0, m * (m - 1) / 2);
}

// A scalar C^m function handed to rolle_witness: f(s, order) returns the
// order-th derivative at s.
using ScalarCm = std::function<double(double, int)>;

namespace detail {

inline double refine_match(const ScalarCm& f, int order, double lo, double hi,
                           double target) {
  // Find s in (lo, hi) with f(s, order) as close to target as possible:
  // scan, then bisect on a sign change of f - target if one exists.
  const int grid = 257;
  double best_s = 0.5 * (lo + hi);
  double best_v = std::abs(f(best_s, order) - target);
  double prev_s = 0.0, prev_g = 0.0;
  bool have_prev = false;
  double root_lo = 0.0, root_hi = 0.0;
  bool have_bracket = false;
  for (int i = 1; i < grid - 1; ++i) {
    const double s = lo + (hi - lo) * i / (grid - 1);
    const double g = f(s, order) - target;
    if (std::abs(g) < best_v) {
      best_v = std::abs(g);
      best_s = s;
    }
    if (have_prev && g * prev_g <= 0.0 && !have_bracket) {
      root_lo = prev_s;
      root_hi = s;
      have_bracket = true;
    }
    prev_s = s;
    prev_g = g;
    have_prev = true;
  }
  if (have_bracket) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (root_lo + root_hi);
      const double g = f(mid, order) - target;
      if (g == 0.0) return mid;
      if (g * (f(root_lo, order) - target) <= 0.0)
        root_hi = mid;
      else
        root_lo = mid;
    }
    return 0.5 * (root_lo + root_hi);
  }
  return best_s;
}

inline double rolle_recurse(const ScalarCm& f, int order, double lo, double hi) {
  if (order == 0) return 0.5 * (lo + hi);
  const double len = hi - lo;
  const double xi1 = rolle_recurse(f, order - 1, lo, lo + len / 3.0);
  const double xi2 = rolle_recurse(f, order - 1, hi - len / 3.0, hi);
  const double target = (f(xi2, order - 1) - f(xi1, order - 1)) / (xi2 - xi1);
  return refine_match(f, order, xi1, xi2, target);
}

}  // namespace detail

// Returns xi in (0, delta) with |psi^(m)(xi)| <= 2^m 3^{m(m-1)/2} delta^{-m}
// sup |psi|, constructed by the trisection mean-value recursion and then
// tightened against a dense scan; the inequality is re-verified before
// returning and VerificationFailed is thrown if it cannot be met.
inline double rolle_witness(const ScalarCm& psi, int m, double delta,
                            const Tolerances& tol = default_tol()) {
  if (m < 0) throw OrderOverflow("rolle_witness: negative order");
  const int grid = 4001;
  double sup = 0.0;
  for (int i = 0; i < grid; ++i)
    sup = std::max(sup, std::abs(psi(delta * i / (grid - 1), 0)));
  const double bound = rolle_bound_constant(m) * std::pow(delta, -m) * sup;
  double xi = detail::rolle_recurse(psi, m, 0.0, delta);
  double val = std::abs(psi(xi, m));
  // Tighten: the recursion certifies existence; the best sample point can
  // only improve the certificate.
  for (int i = 1; i < grid - 1; ++i) {
    const double s = delta * i / (grid - 1);
    const double v = std::abs(psi(s, m));
    if (v < val) {
      val = v;
      xi = s;
    }
  }
  if (!(val <= bound * (1.0 + tol.rolle_slack) + 1e-300))
    throw VerificationFailed("rolle_witness: bound violated: |psi^(m)(xi)| = " +
                             std::to_string(val) + " > " + std::to_string(bound));
  return xi;
}

// z(s) in Z(A) with z . phi'(s) = e_1 under the centralizer action
// u(z . v) = z u(v) z^{-1}.
inline GroupElement normalizer_z(const SmoothCurve& c, double s, int n,
                                 const Tolerances& tol = default_tol()) {
  if (c.dim() != n - 1)
    throw DimensionMismatch("normalizer_z: curve dimension != n-1");
  const Eigen::VectorXd d = c.derivative(s, 1);
  const double r = d.norm();
  if (r <= tol.vanishing_derivative)
    throw VanishingDerivative("normalizer_z: phi'(s) vanishes at s = " +
                              std::to_string(s));
  GroupElement z = identity_element(n);
  if (n == 2) {
    const double cval = d(0);  // z = diag(1/c, 1, c), possibly reversing
    z.mat(0, 0) = 1.0 / cval;
    z.mat(2, 2) = cval;
  } else {
    const double c1 = d(0) / r, c2 = d(1) / r;
    z.mat(0, 0) = 1.0 / r;
    z.mat(3, 3) = r;
    z.mat(1, 1) = c1;
    z.mat(1, 2) = c2;
    z.mat(2, 1) = -c2;
    z.mat(2, 2) = c1;
  }
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n - 1);
  e1(0) = 1.0;
  if ((centralizer_action(z, d) - e1).norm() > 1e-10)
    throw VerificationFailed("normalizer_z: defining relation failed");
  return z;
}

enum class FitClass { Sphere, Affine, Empty };

struct SphereAffineFit {
  FitClass cls = FitClass::Empty;
  double residual = 0.0;
  double sphere_residual = 0.0;
  double affine_residual = 0.0;
};

// Least-squares fit of a point set against both obstruction classes:
// spheres via the linearized form |x|^2 + b.x + c = 0, affine subspaces via
// the total-least-squares hyperplane. Returns the smaller RMS residual.
inline SphereAffineFit sphere_affine_residual(
    const std::vector<Eigen::VectorXd>& points) {
  SphereAffineFit fit;
  if (points.empty()) return fit;
  const int dim = static_cast<int>(points[0].size());
  const int m = static_cast<int>(points.size());
  if (m < dim + 3)
    throw DimensionMismatch("sphere_affine_residual: need at least dim+3 points");
  // Sphere: minimize ||A [b; c] + q||, rows A_i = (x_i^T, 1), q_i = |x_i|^2.
  Eigen::MatrixXd a(m, dim + 1);
  Eigen::VectorXd q(m);
  for (int i = 0; i < m; ++i) {
    a.block(i, 0, 1, dim) = points[i].transpose();
    a(i, dim) = 1.0;
    q(i) = points[i].squaredNorm();
  }
  const Eigen::VectorXd sol = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-q);
  fit.sphere_residual = std::sqrt((a * sol + q).squaredNorm() / m);
  // Affine: TLS hyperplane through the centroid.
  Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
  for (const auto& p : points) centroid += p;
  centroid /= m;
  Eigen::MatrixXd y(m, dim);
  for (int i = 0; i < m; ++i) y.row(i) = (points[i] - centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinV);
  const Eigen::VectorXd normal = svd.matrixV().col(dim - 1);
  fit.affine_residual = std::sqrt((y * normal).squaredNorm() / m);
  if (fit.affine_residual <= fit.sphere_residual) {
    fit.cls = FitClass::Affine;
    fit.residual = fit.affine_residual;
  } else {
    fit.cls = FitClass::Sphere;
    fit.residual = fit.sphere_residual;
  }
  return fit;
}

}  // namespace hypflow
