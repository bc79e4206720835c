#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "hypflow/mobius.hpp"

// The discrete side: reduction of points of the quotient into a fundamental
// domain for SL(2, Z) (n = 2, modular surface) and the Picard group
// SL(2, Z[i]) (n = 3).
//
// Conventions. A group element g represents the coset g Gamma, and the
// geodesic/horospherical dynamics act by left multiplication. The point map
// sends g to M(g).(base point) with M(g) = to_mobius(g)^{-1} -- the Moebius
// matrix of the inverse -- which is the unique choice making left
// translation by a_t move base points along geodesics toward the cusp at 0
// (so that expanded horospherical arcs become long low horocycles). The
// reduction left-multiplies M(g) by lattice generators until the base point
// lies in the fundamental domain:
//   n = 2:  |Re tau| <= 1/2, |tau| >= 1           (base point i)
//   n = 3:  |Re beta| <= 1/2, 0 <= Im beta <= 1/2, |beta|^2 + t^2 >= 1
//           (base point j), where the Im >= 0 half is selected with the
//           order-2 rotation beta -> -beta of the Picard group.
// Boundary ties break toward nonnegative real parts.

namespace hypflow {

// Generator tables (Moebius side).
//   n = 2: 0: tau+1, 1: tau-1, 2: -1/tau
//   n = 3: 0: w+1, 1: w-1, 2: w+i, 3: w-i, 4: -1/w, 5: w -> -w (diag(i,-i))
inline MobiusElement lattice_generator(int n, int idx) {
  MobiusElement g = mobius_identity(n);
  if (n == 2) {
    switch (idx) {
      case 0: g.m(0, 1) = 1.0; break;
      case 1: g.m(0, 1) = -1.0; break;
      case 2: g.m << 0.0, -1.0, 1.0, 0.0; break;
      default: throw DimensionMismatch("lattice_generator: bad index");
    }
  } else {
    switch (idx) {
      case 0: g.m(0, 1) = 1.0; break;
      case 1: g.m(0, 1) = -1.0; break;
      case 2: g.m(0, 1) = Complex(0.0, 1.0); break;
      case 3: g.m(0, 1) = Complex(0.0, -1.0); break;
      case 4: g.m << 0.0, -1.0, 1.0, 0.0; break;
      case 5: g.m << Complex(0.0, 1.0), 0.0, 0.0, Complex(0.0, -1.0); break;
      default: throw DimensionMismatch("lattice_generator: bad index");
    }
  }
  return g;
}

inline int lattice_generator_count(int n) { return n == 2 ? 3 : 6; }

struct QuotientPoint {
  GroupElement g;        // the element whose coset was reduced
  MobiusElement start;   // M(g) = to_mobius(g)^{-1}
  MobiusElement rep;     // rep = (product of word generators) * start
  std::vector<int> word; // generator indices in application order
  Eigen::Vector3d base = Eigen::Vector3d::Zero();  // (x, y, 0) | (x1, x2, t)
  double height = 0.0;
  Eigen::Vector3d fiber = Eigen::Vector3d::Zero(); // unit tangent direction
  double fiber_angle = 0.0;                        // n = 2 convenience
};

namespace detail {

inline Complex base_point2(const MobiusElement& m) {
  return mobius_apply2(m, Complex(0.0, 1.0));
}

inline Quat base_point3(const MobiusElement& m) {
  return mobius_apply3(m, Quat{0.0, 0.0, 1.0, 0.0});
}

inline void fiber_readout(QuotientPoint& q) {
  if (q.rep.n == 2) {
    const Complex cd = q.rep.m(1, 0) * Complex(0.0, 1.0) + q.rep.m(1, 1);
    double ang = M_PI / 2.0 - 2.0 * std::arg(cd);
    ang = std::fmod(ang, 2.0 * M_PI);
    if (ang < 0.0) ang += 2.0 * M_PI;
    q.fiber_angle = ang;
    q.fiber = Eigen::Vector3d(std::cos(ang), std::sin(ang), 0.0);
  } else {
    const Quat d = mobius_diff3(q.rep, Quat{0.0, 0.0, 1.0, 0.0},
                                Quat{0.0, 0.0, 1.0, 0.0});
    Eigen::Vector3d v(d.w, d.x, d.y);
    q.fiber = v.normalized();
    q.fiber_angle = 0.0;
  }
}

}  // namespace detail

// Reduce the coset of g into the fundamental domain. Terminates because each
// inversion strictly increases the height of the base point; a cap of 10^4
// generator applications guards numerically pathological inputs.
inline QuotientPoint reduce(const GroupElement& g,
                            const Tolerances& tol = default_tol()) {
  const int n = g.n;
  QuotientPoint q;
  q.g = g;
  q.start = minvert(to_mobius(g, tol));
  q.rep = q.start;
  const int cap = 10000;
  int steps = 0;
  auto apply = [&](int idx) {
    if (++steps > cap)
      throw IterationCap("reduce: generator cap exceeded (pathological input)");
    q.word.push_back(idx);
    q.rep = mcompose(lattice_generator(n, idx), q.rep);
  };
  const double btol = 1e-12;
  if (n == 2) {
    while (true) {
      Complex tau = detail::base_point2(q.rep);
      const long k = std::lround(tau.real());
      if (k != 0) {
        const int idx = k > 0 ? 1 : 0;
        for (long i = 0; i < std::labs(k); ++i) apply(idx);
        tau = detail::base_point2(q.rep);
      }
      if (std::norm(tau) < 1.0 - 1e-15)
        apply(2);
      else
        break;
    }
    // Boundary ties toward nonnegative real part.
    Complex tau = detail::base_point2(q.rep);
    if (std::abs(tau.real() + 0.5) <= btol) {
      apply(0);
      tau = detail::base_point2(q.rep);
    }
    if (std::abs(std::abs(tau) - 1.0) <= btol && tau.real() < -btol) {
      apply(2);
      tau = detail::base_point2(q.rep);
    }
    q.base = Eigen::Vector3d(tau.real(), tau.imag(), 0.0);
    q.height = tau.imag();
  } else {
    while (true) {
      Quat w = detail::base_point3(q.rep);
      const long k1 = std::lround(w.w);
      const long k2 = std::lround(w.x);
      if (k1 != 0) {
        const int idx = k1 > 0 ? 1 : 0;
        for (long i = 0; i < std::labs(k1); ++i) apply(idx);
      }
      if (k2 != 0) {
        const int idx = k2 > 0 ? 3 : 2;
        for (long i = 0; i < std::labs(k2); ++i) apply(idx);
      }
      w = detail::base_point3(q.rep);
      if (w.w * w.w + w.x * w.x + w.y * w.y < 1.0 - 1e-15)
        apply(4);
      else
        break;
    }
    // Canonical half (Im beta >= 0) via the order-2 rotation, then ties.
    Quat w = detail::base_point3(q.rep);
    if (w.x < -btol || (std::abs(w.x) <= btol && w.w < -btol)) {
      apply(5);
      w = detail::base_point3(q.rep);
    }
    if (std::abs(w.w + 0.5) <= btol) {
      apply(0);
      w = detail::base_point3(q.rep);
    }
    if (std::abs(w.x + 0.5) <= btol) {
      apply(2);
      w = detail::base_point3(q.rep);
    }
    const double rr = w.w * w.w + w.x * w.x + w.y * w.y;
    if (std::abs(rr - 1.0) <= btol && w.w < -btol) {
      apply(4);
      w = detail::base_point3(q.rep);
      if (w.x < -btol) {
        apply(5);
        w = detail::base_point3(q.rep);
      }
    }
    q.base = Eigen::Vector3d(w.w, w.x, w.y);
    q.height = w.y;
  }
  detail::fiber_readout(q);
  return q;
}

inline double height(const QuotientPoint& q) { return q.height; }

// Word product as a Moebius matrix (first applied generator rightmost).
inline MobiusElement word_product(int n, const std::vector<int>& word) {
  MobiusElement acc = mobius_identity(n);
  for (int idx : word) acc = mcompose(lattice_generator(n, idx), acc);
  return acc;
}

// Random short lattice word as a group element (for equivariance tests and
// probes). The coset being reduced is g Gamma, so reduce(compose(g, gamma))
// and reduce(g) land on the same base point: M(g gamma) = gamma_mob^{-1} M(g)
// moves the start point within one Gamma-orbit.
inline GroupElement random_lattice_element(int n, Rng& rng, int len = 6) {
  MobiusElement acc = mobius_identity(n);
  const int count = lattice_generator_count(n);
  for (int i = 0; i < len; ++i)
    acc = mcompose(acc, lattice_generator(n, static_cast<int>(rng.next_u64() %
                                                              count)));
  return from_mobius(acc);
}

// Block embedding SO(Q_2) -> SO(Q_3) along the first horospherical
// coordinate: rows/columns (y, x1, z) -> (y, x1, z'), x2 fixed.
inline GroupElement embed_in_picard(const GroupElement& g2) {
  if (g2.n != 2) throw DimensionMismatch("embed_in_picard: need n = 2 input");
  GroupElement g3 = identity_element(3);
  const int map[3] = {0, 1, 3};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g3.mat(map[i], map[j]) = g2.mat(i, j);
  g3.mat(2, 2) = 1.0;
  return g3;
}

}  // namespace hypflow
