#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "hypflow/curve.hpp"
#include "hypflow/quotient.hpp"

// The measure-level engine: curves evolved under a_t into empirical measures
// on the quotient, a seeded Haar reference sampler, discrepancy against a
// fixed versioned family of test functions, cusp-mass readout, a unipotent
// invariance probe, and shrinking-window schedules.

namespace hypflow {

struct PointSample {
  GroupElement g;                 // element whose coset the sample represents
  Eigen::Vector3d base = Eigen::Vector3d::Zero();
  Eigen::Vector3d fiber = Eigen::Vector3d::Zero();
  double fiber_angle = 0.0;
  double height = 0.0;
};

inline PointSample make_sample(const QuotientPoint& q) {
  return {q.g, q.base, q.fiber, q.fiber_angle, q.height};
}

struct EmpiricalMeasure {
  int n = 2;
  std::vector<PointSample> samples;
  std::vector<double> weights;  // nonnegative, normalized to 1

  void normalize() {
    double s = 0.0;
    for (double w : weights) s += w;
    for (double& w : weights) w /= s;
  }
};

// ---------------------------------------------------------------------------
// Test family: smooth bumps built from cosine-taper (Tukey) windows in the
// fundamental-domain coordinates and the fiber direction. Every function is
// bounded by 1, continuous on the quotient (supports avoid the gluing loci
// except where the coordinates are themselves invariant), and vanishes above
// height 10.

namespace detail {

struct Window {
  bool active = false;
  double center = 0.0;
  double plateau = 0.0;  // fully-on half-width
  double edge = 0.0;     // support half-width
  bool periodic = false; // distance taken mod 1
};

inline double taper(double dist, double plateau, double edge) {
  if (dist <= plateau) return 1.0;
  if (dist >= edge) return 0.0;
  const double r = (dist - plateau) / (edge - plateau);
  const double c = std::cos(0.5 * M_PI * r);
  return c * c;
}

inline double window_eval(const Window& w, double v) {
  if (!w.active) return 1.0;
  double d = std::abs(v - w.center);
  if (w.periodic) {
    d = std::fmod(d, 1.0);
    d = std::min(d, 1.0 - d);
  }
  return taper(d, w.plateau, w.edge);
}

inline double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  int i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace detail

struct BumpFunction {
  detail::Window x1;      // Re coordinate (periodic)
  detail::Window x2;      // Im coordinate (n = 3)
  detail::Window h;       // height
  bool fiber_active = false;
  double fiber_center_angle = 0.0;          // n = 2
  Eigen::Vector3d fiber_dir = Eigen::Vector3d::UnitZ();  // n = 3
  double fiber_plateau = 0.0, fiber_edge = 1.0;
  std::string label;
};

struct TestFamily {
  int n = 2;
  std::string version = "v1";
  std::vector<BumpFunction> funcs;
};

inline double eval_bump(int n, const BumpFunction& f, const PointSample& p) {
  double v = detail::window_eval(f.x1, p.base(0));
  if (v == 0.0) return 0.0;
  if (n == 3) {
    v *= detail::window_eval(f.x2, p.base(1));
    if (v == 0.0) return 0.0;
  }
  v *= detail::window_eval(f.h, p.height);
  if (v == 0.0) return 0.0;
  if (f.fiber_active) {
    if (n == 2) {
      double d = std::abs(p.fiber_angle - f.fiber_center_angle);
      d = std::fmod(d, 2.0 * M_PI);
      d = std::min(d, 2.0 * M_PI - d);
      v *= detail::taper(d, f.fiber_plateau, f.fiber_edge);
    } else {
      const double c =
          std::max(-1.0, std::min(1.0, p.fiber.dot(f.fiber_dir)));
      v *= detail::taper(std::acos(c), f.fiber_plateau, f.fiber_edge);
    }
  }
  return v;
}

// The fixed versioned family: 20 functions for n = 2, 32 for n = 3.
// Localized bump centers follow a Halton sequence over the fundamental
// domain below height 4; broad marginal probes (height bands, Im-coordinate
// bands including a probe seated on the totally geodesic x2 = 0 slice,
// fiber caps) make mass defects of singular limits visible.
inline TestFamily make_test_family(int n, const std::string& version = "v1") {
  if (version != "v1")
    throw ConfigError("make_test_family: unknown family version " + version);
  TestFamily fam;
  fam.n = n;
  fam.version = version;
  auto hal = detail::halton;
  using detail::Window;
  if (n == 2) {
    for (int i = 1; i <= 12; ++i) {
      BumpFunction f;
      f.x1 = Window{true, hal(i, 2) - 0.5, 0.10, 0.30, true};
      f.h = Window{true, 1.6 + 2.2 * hal(i, 3), 0.20, 0.54, false};
      f.fiber_active = true;
      f.fiber_center_angle = 2.0 * M_PI * hal(i, 5);
      f.fiber_plateau = 0.5;
      f.fiber_edge = 1.3;
      f.label = "bump" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    const double bc[4] = {1.15, 2.0, 3.0, 3.9};
    const double bp[4] = {0.35, 0.50, 0.70, 1.40};
    const double be[4] = {0.60, 0.90, 1.20, 5.90};
    for (int i = 0; i < 4; ++i) {
      BumpFunction f;
      f.h = Window{true, bc[i], bp[i], be[i], false};
      f.label = "hband" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    for (int i = 0; i < 2; ++i) {
      BumpFunction f;
      f.x1 = Window{true, i == 0 ? 0.0 : 0.25, 0.12, 0.30, true};
      f.h = Window{true, 2.1, 0.70, 1.05, false};
      f.label = "xprobe" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    for (int i = 0; i < 2; ++i) {
      BumpFunction f;
      f.h = Window{true, 2.1, 0.70, 1.05, false};
      f.fiber_active = true;
      f.fiber_center_angle = i == 0 ? M_PI / 2.0 : 3.0 * M_PI / 2.0;
      f.fiber_plateau = 0.45;
      f.fiber_edge = 1.05;
      f.label = "fprobe" + std::to_string(i);
      fam.funcs.push_back(f);
    }
  } else {
    for (int i = 1; i <= 18; ++i) {
      BumpFunction f;
      f.x1 = Window{true, hal(i, 2) - 0.5, 0.10, 0.28, true};
      f.x2 = Window{true, 0.14 + 0.22 * hal(i, 3), 0.05, 0.12, false};
      f.h = Window{true, 1.55 + 2.2 * hal(i, 5), 0.20, 0.50, false};
      const double z = 2.0 * hal(i, 7) - 1.0;
      const double ph = 2.0 * M_PI * hal(i, 11);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      f.fiber_active = true;
      f.fiber_dir = Eigen::Vector3d(s * std::cos(ph), s * std::sin(ph), z);
      f.fiber_plateau = 0.55;
      f.fiber_edge = 1.35;
      f.label = "bump" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    const double bc[4] = {1.1, 2.0, 3.0, 3.9};
    const double bp[4] = {0.35, 0.50, 0.70, 1.40};
    const double be[4] = {0.60, 0.90, 1.20, 5.90};
    for (int i = 0; i < 4; ++i) {
      BumpFunction f;
      f.h = Window{true, bc[i], bp[i], be[i], false};
      f.label = "hband" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    // Im-coordinate probes; the first sits on the totally geodesic slice.
    {
      BumpFunction f;
      f.x2 = Window{true, 0.0, 0.04, 0.12, false};
      f.h = Window{true, 2.75, 2.25, 6.15, false};
      f.label = "slice0";
      fam.funcs.push_back(f);
    }
    for (int i = 0; i < 2; ++i) {
      BumpFunction f;
      f.x2 = Window{true, i == 0 ? 0.17 : 0.34, 0.06, 0.13, false};
      f.h = Window{true, 2.75, 2.25, 6.15, false};
      f.label = "x2band" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    // Fiber caps: vertical and antivertical are invariant under the slice
    // gluing; the horizontal cap is kept away from it by an x2 band.
    for (int i = 0; i < 2; ++i) {
      BumpFunction f;
      f.h = Window{true, 2.1, 0.70, 1.05, false};
      f.fiber_active = true;
      f.fiber_dir = Eigen::Vector3d(0, 0, i == 0 ? 1.0 : -1.0);
      f.fiber_plateau = 0.5;
      f.fiber_edge = 1.1;
      f.label = "fcap" + std::to_string(i);
      fam.funcs.push_back(f);
    }
    {
      BumpFunction f;
      f.x2 = Window{true, 0.25, 0.10, 0.20, false};
      f.h = Window{true, 2.1, 0.70, 1.05, false};
      f.fiber_active = true;
      f.fiber_dir = Eigen::Vector3d(1, 0, 0);
      f.fiber_plateau = 0.6;
      f.fiber_edge = 1.2;
      f.label = "fcap_h";
      fam.funcs.push_back(f);
    }
    for (int i = 0; i < 4; ++i) {
      BumpFunction f;
      f.x1 = Window{true, -0.375 + 0.25 * i, 0.08, 0.22, true};
      f.x2 = Window{true, 0.25, 0.12, 0.22, false};
      f.h = Window{true, 2.1, 0.70, 1.05, false};
      f.label = "x1probe" + std::to_string(i);
      fam.funcs.push_back(f);
    }
  }
  return fam;
}

inline double integrate(const EmpiricalMeasure& m, const BumpFunction& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.samples.size(); ++i)
    acc += m.weights[i] * eval_bump(m.n, f, m.samples[i]);
  return acc;
}

// max_f |lambda(f) - ref(f)| over the family.
inline double discrepancy(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                          const TestFamily& fam) {
  if (a.n != b.n || a.n != fam.n)
    throw DimensionMismatch("discrepancy: mixed dimensions");
  double mx = 0.0;
  for (const auto& f : fam.funcs)
    mx = std::max(mx, std::abs(integrate(a, f) - integrate(b, f)));
  return mx;
}

// Weight of samples with height > h.
inline double cusp_fraction(const EmpiricalMeasure& m, double h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.samples.size(); ++i)
    if (m.samples[i].height > h) acc += m.weights[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Evolution of curves.

enum class Twist { WithZ, WithoutZ };

struct EvolveOptions {
  int threads = 1;
  bool has_interval = false;
  double lo = 0.0, hi = 0.0;  // evolve over [lo, hi] instead of the domain
};

namespace detail {

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (int i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

// Pushforward of the parameter measure on the curve under
// s -> [z(s)] a_t u(phi(s)) g0, sampled at N midpoints and reduced.
// Sampling is deterministic (midpoint rule); the seed is carried only as run
// metadata.
inline EmpiricalMeasure evolve_curve(const SmoothCurve& c,
                                     const GroupElement& g0, double t, int N,
                                     Twist twist, std::uint64_t seed = 0,
                                     const EvolveOptions& opts = {}) {
  (void)seed;
  if (N < 1) throw DimensionMismatch("evolve_curve: N >= 1 required");
  const int n = g0.n;
  if (c.dim() != n - 1)
    throw DimensionMismatch("evolve_curve: curve dimension != n-1");
  const double lo = opts.has_interval ? opts.lo : c.lo();
  const double hi = opts.has_interval ? opts.hi : c.hi();
  if (!(lo >= c.lo() - 1e-12 && hi <= c.hi() + 1e-12 && lo < hi))
    throw DimensionMismatch("evolve_curve: bad interval");
  const GroupElement at = make_a(t, n);
  EmpiricalMeasure m;
  m.n = n;
  m.samples.resize(N);
  m.weights.assign(N, 1.0 / N);
  std::exception_ptr err;
  detail::parallel_for(N, opts.threads, [&](int j) {
    try {
      const double s = lo + (j + 0.5) * (hi - lo) / N;
      GroupElement g = compose(at, compose(make_u(c.eval(s), n), g0));
      if (twist == Twist::WithZ) g = compose(normalizer_z(c, s, n), g);
      m.samples[j] = make_sample(reduce(g));
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  return m;
}

// Haar reference sample: rejection sampling of the fundamental domain with
// the hyperbolic density (y^{-2} for n = 2, t^{-3} for n = 3), uniform fiber.
inline EmpiricalMeasure haar_reference(int n, int N, std::uint64_t seed) {
  Rng rng(seed);
  EmpiricalMeasure m;
  m.n = n;
  m.samples.reserve(N);
  m.weights.assign(N, 1.0 / N);
  if (n == 2) {
    const double floor = std::sqrt(3.0) / 2.0;
    while (static_cast<int>(m.samples.size()) < N) {
      const double x = rng.uniform(-0.5, 0.5);
      const double y = floor / (1.0 - rng.uniform());  // density prop. y^{-2}
      if (x * x + y * y < 1.0) continue;               // reject below the arc
      const double alpha = 2.0 * M_PI * rng.uniform();
      // Moebius frame: i -> x + iy, then spin the fiber to angle alpha.
      MobiusElement pos = mobius_identity(2);
      const double r = std::sqrt(y);
      pos.m << r, x / r, 0.0, 1.0 / r;
      const double phi = 0.5 * (alpha - M_PI / 2.0);
      MobiusElement rot = mobius_identity(2);
      rot.m << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
      const GroupElement g = invert(from_mobius(mcompose(pos, rot)));
      m.samples.push_back(make_sample(reduce(g)));
    }
  } else {
    while (static_cast<int>(m.samples.size()) < N) {
      const double x1 = rng.uniform(-0.5, 0.5);
      const double x2 = rng.uniform(0.0, 0.5);
      // beta-marginal density prop. (1 - |beta|^2)^{-1}, bounded by 2
      const double b2 = x1 * x1 + x2 * x2;
      if (rng.uniform() > 0.5 / (1.0 - b2)) continue;
      const double tmin = std::sqrt(1.0 - b2);
      const double t = tmin / std::sqrt(1.0 - rng.uniform());  // prop. t^{-3}
      const double z = 2.0 * rng.uniform() - 1.0;
      const double ph = 2.0 * M_PI * rng.uniform();
      const double sxy = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Eigen::Vector3d dir(sxy * std::cos(ph), sxy * std::sin(ph), z);
      MobiusElement pos = mobius_identity(3);
      const double r = std::sqrt(t);
      pos.m << Complex(r), Complex(x1, x2) / r, Complex(0.0), Complex(1.0 / r);
      const GroupElement g =
          invert(from_mobius(mcompose(pos, su2_steer(dir))));
      m.samples.push_back(make_sample(reduce(g)));
    }
  }
  return m;
}

// Reference measure on the embedded modular surface inside the Picard
// manifold: an n = 2 Haar sample pushed through the block embedding.
inline EmpiricalMeasure embedded_modular_reference(int N, std::uint64_t seed) {
  const EmpiricalMeasure base = haar_reference(2, N, seed);
  EmpiricalMeasure m;
  m.n = 3;
  m.samples.reserve(N);
  m.weights = base.weights;
  for (const auto& s : base.samples)
    m.samples.push_back(make_sample(reduce(embed_in_picard(s.g))));
  return m;
}

// Discrepancy between lambda and its pushforward under left translation by
// u(r e_1) (re-reduced). Small values evidence invariance of the limit under
// the unipotent flow along the normalized tangent direction.
inline double invariance_probe(const EmpiricalMeasure& m, double r,
                               const TestFamily& fam, int threads = 1) {
  const int n = m.n;
  const GroupElement ur = make_u1(r, n);
  EmpiricalMeasure pushed;
  pushed.n = n;
  pushed.samples.resize(m.samples.size());
  pushed.weights = m.weights;
  std::exception_ptr err;
  detail::parallel_for(static_cast<int>(m.samples.size()), threads, [&](int i) {
    try {
      pushed.samples[i] = make_sample(reduce(compose(ur, m.samples[i].g)));
    } catch (...) {
      if (!err) err = std::current_exception();
    }
  });
  if (err) std::rethrow_exception(err);
  return discrepancy(m, pushed, fam);
}

// ---------------------------------------------------------------------------
// Shrinking windows.

struct WindowSchedule {
  double x = 0.5;                 // base point, contained in every window
  std::vector<double> t_values;
  std::vector<double> lengths;    // |I_k|, decreasing
  int exponent = 2;               // p in {n, 2}
};

struct ShrinkRow {
  double t = 0.0;
  double window_len = 0.0;
  double discrepancy = 0.0;
  double cusp_fraction = 0.0;
};

inline void validate_schedule(const WindowSchedule& s) {
  if (s.t_values.size() != s.lengths.size() || s.t_values.empty())
    throw ScheduleViolation("schedule: length/t mismatch");
  for (std::size_t k = 0; k + 1 < s.lengths.size(); ++k) {
    if (!(s.lengths[k + 1] <= s.lengths[k]))
      throw ScheduleViolation("schedule: window lengths must decrease");
    const double now =
        s.exponent * std::log(s.lengths[k]) + s.t_values[k];
    const double next =
        s.exponent * std::log(s.lengths[k + 1]) + s.t_values[k + 1];
    if (!(next >= now))
      throw ScheduleViolation("schedule: |I_k|^p e^{t_k} must increase");
  }
}

enum class ShrinkReference { Haar, EmbeddedModular };

struct ShrinkResult {
  ShrinkReference reference = ShrinkReference::Haar;
  std::vector<ShrinkRow> rows;
};

// Route the run: curves inside the x2 = 0 slice with tangent along e_1 are
// compared against the embedded modular-surface reference (the aligned
// degenerate case); curves inside any other sphere or affine subspace are
// not supported; generic curves are compared against Haar.
inline ShrinkReference classify_curve(const SmoothCurve& c, int n,
                                      const Tolerances& tol = default_tol()) {
  std::vector<Eigen::VectorXd> pts;
  const int probes = 64;
  for (int i = 0; i < probes; ++i)
    pts.push_back(c.eval(c.lo() + (i + 0.5) * (c.hi() - c.lo()) / probes));
  const SphereAffineFit fit = sphere_affine_residual(pts);
  if (fit.residual >= tol.containment) return ShrinkReference::Haar;
  if (n == 2)
    throw UnsupportedCase(
        "shrinking run: contained curves are not meaningful for n = 2");
  bool on_slice = true;
  for (int i = 0; i < probes && on_slice; ++i) {
    const double s = c.lo() + (i + 0.5) * (c.hi() - c.lo()) / probes;
    if (std::abs(c.eval(s)(1)) > tol.containment ||
        std::abs(c.derivative(s, 1)(1)) > tol.containment)
      on_slice = false;
  }
  if (!on_slice)
    throw UnsupportedCase(
        "shrinking run: only the aligned slice case (curve in the real line "
        "with tangent along e_1) is supported for contained curves");
  return ShrinkReference::EmbeddedModular;
}

inline ShrinkResult shrinking_window_run(const SmoothCurve& c,
                                         const GroupElement& g0,
                                         const WindowSchedule& sched, int N,
                                         const TestFamily& fam,
                                         std::uint64_t seed, int threads = 1) {
  validate_schedule(sched);
  const int n = g0.n;
  if (sched.x <= c.lo() || sched.x >= c.hi())
    throw ScheduleViolation("schedule: base point outside the curve domain");
  ShrinkResult out;
  out.reference = classify_curve(c, n);
  const EmpiricalMeasure ref =
      out.reference == ShrinkReference::Haar
          ? haar_reference(n, N, seed)
          : embedded_modular_reference(N, seed);
  for (std::size_t k = 0; k < sched.t_values.size(); ++k) {
    EvolveOptions opts;
    opts.threads = threads;
    opts.has_interval = true;
    opts.lo = std::max(c.lo(), sched.x - 0.5 * sched.lengths[k]);
    opts.hi = std::min(c.hi(), sched.x + 0.5 * sched.lengths[k]);
    const EmpiricalMeasure lam = evolve_curve(
        c, g0, sched.t_values[k], N, Twist::WithoutZ, seed, opts);
    ShrinkRow row;
    row.t = sched.t_values[k];
    row.window_len = opts.hi - opts.lo;
    row.discrepancy = discrepancy(lam, ref, fam);
    row.cusp_fraction = cusp_fraction(lam, 4.0);
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace hypflow
