#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <utility>

#include "hypflow/common.hpp"

// The isometry group G = SO(Q_n) of the quadratic form
//   Q_n(y, x_1, ..., x_{n-1}, z) = 2yz - (x_1^2 + ... + x_{n-1}^2)
// acting on R^{n+1} with coordinates ordered (y, x_1, ..., x_{n-1}, z),
// for n = 2 (hyperbolic plane) and n = 3 (hyperbolic 3-space).
//
// Named subgroups in this realization:
//   A  = {a_t}            diagonal diag(e^t, 1, ..., 1, e^{-t})
//   U+ = {u(x)}           upper unipotent, expanded by conjugation with a_t
//   U- = {u(x)^T}         lower unipotent
//   M                     block rotations diag(1, R, 1), R in SO(n-1),
//                         together with the pair diag(-1, R, -1)
//   Z(A) = A M            block-diagonal centralizer of A
//   K                     stabilizer of e_y + e_z (a timelike vector),
//                         isomorphic to SO(n)
//   P- = U- Z(A)          lower parabolic

namespace hypflow {

struct GroupElement {
  int n;                // 2 or 3
  Eigen::MatrixXd mat;  // (n+1) x (n+1)
};

enum class Side { Upper, Lower };

inline Eigen::MatrixXd gram_matrix(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + 1, n + 1);
  j(0, n) = 1.0;
  j(n, 0) = 1.0;
  for (int i = 1; i < n; ++i) j(i, i) = -1.0;
  return j;
}

inline GroupElement identity_element(int n) {
  return {n, Eigen::MatrixXd::Identity(n + 1, n + 1)};
}

inline GroupElement make_a(double t, int n) {
  GroupElement g = identity_element(n);
  g.mat(0, 0) = std::exp(t);
  g.mat(n, n) = std::exp(-t);
  return g;
}

inline GroupElement make_u(const Eigen::VectorXd& x, int n,
                           Side side = Side::Upper) {
  if (x.size() != n - 1)
    throw DimensionMismatch("make_u: x must have n-1 components");
  GroupElement g = identity_element(n);
  for (int i = 0; i < n - 1; ++i) {
    g.mat(0, 1 + i) = x(i);
    g.mat(1 + i, n) = x(i);
  }
  g.mat(0, n) = 0.5 * x.squaredNorm();
  if (side == Side::Lower) g.mat = g.mat.transpose().eval();
  return g;
}

inline GroupElement make_u1(double x, int n, Side side = Side::Upper) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n - 1);
  v(0) = x;
  return make_u(v, n, side);
}

// diag(1, R, 1) with R in SO(n-1). For n = 2 this is trivial; for n = 3 it
// rotates the (x_1, x_2) plane by theta.
inline GroupElement make_m_rotation(double theta, int n) {
  GroupElement g = identity_element(n);
  if (n == 3) {
    g.mat(1, 1) = std::cos(theta);
    g.mat(1, 2) = -std::sin(theta);
    g.mat(2, 1) = std::sin(theta);
    g.mat(2, 2) = std::cos(theta);
  }
  return g;
}

// diag(-1, I, -1): the component of Z(A) acting as -1 on the horospherical
// coordinates; needed to normalize reversed tangents when n = 2.
inline GroupElement make_m_flip(int n) {
  GroupElement g = identity_element(n);
  g.mat(0, 0) = -1.0;
  g.mat(n, n) = -1.0;
  return g;
}

// Orthogonal change of basis taking Q_n to the standard Lorentz form
// diag(1, -1, ..., -1): columns f_0 = (e_y + e_z)/sqrt2, f_i = e_{x_i},
// f_n = (e_y - e_z)/sqrt2.
inline Eigen::MatrixXd lorentz_basis(int n) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const double r = 1.0 / std::sqrt(2.0);
  t(0, 0) = r;
  t(n, 0) = r;
  for (int i = 1; i < n; ++i) t(i, i) = 1.0;
  t(0, n) = r;
  t(n, n) = -r;
  return t;
}

// K = Stab(e_y + e_z): image of 1 (+) SO(n) under the Lorentz basis change.
// R acts on the span of f_1, ..., f_n.
inline GroupElement make_k(const Eigen::MatrixXd& r, int n) {
  if (r.rows() != n || r.cols() != n)
    throw DimensionMismatch("make_k: rotation must be n x n");
  Eigen::MatrixXd blk = Eigen::MatrixXd::Identity(n + 1, n + 1);
  blk.block(1, 1, n, n) = r;
  const Eigen::MatrixXd t = lorentz_basis(n);
  return {n, t * blk * t.transpose()};
}

// Weyl element: swaps y and z, with a compensating sign on x_1 so the
// determinant stays +1. Satisfies w = w^{-1} and w a_t w^{-1} = a_{-t}.
inline GroupElement weyl_element(int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n + 1, n + 1);
  m(0, 0) = 0.0;
  m(n, n) = 0.0;
  m(0, n) = 1.0;
  m(n, 0) = 1.0;
  m(1, 1) = -1.0;
  return {n, m};
}

inline GroupElement compose(const GroupElement& g, const GroupElement& h) {
  if (g.n != h.n) throw DimensionMismatch("compose: mixed dimensions");
  return {g.n, g.mat * h.mat};
}

// Form-preserving closed-form inverse: g^{-1} = J^{-1} g^T J (J^{-1} = J).
inline GroupElement invert(const GroupElement& g) {
  const Eigen::MatrixXd j = gram_matrix(g.n);
  return {g.n, j * g.mat.transpose() * j};
}

inline double form_residual(const GroupElement& g) {
  const Eigen::MatrixXd j = gram_matrix(g.n);
  return (g.mat.transpose() * j * g.mat - j).norm();
}

inline bool is_in_group(const GroupElement& g, double tol) {
  return form_residual(g) <= tol;
}

// Action of z in Z(A) on R^{n-1}, defined by z u(v) z^{-1} = u(z . v).
// For z = diag(alpha, R, 1/alpha) this is v -> alpha R v.
inline Eigen::VectorXd centralizer_action(const GroupElement& z,
                                          const Eigen::VectorXd& v) {
  const int n = z.n;
  const double alpha = z.mat(0, 0);
  return alpha * (z.mat.block(1, 1, n - 1, n - 1) * v);
}

inline bool in_identity_component(const GroupElement& g,
                                  const Tolerances& tol = default_tol()) {
  if (!is_in_group(g, 1e-6)) return false;
  (void)tol;
  // g preserves the upper sheet iff <g v0, v0>_J > 0 for timelike v0.
  Eigen::VectorXd v0 = Eigen::VectorXd::Zero(g.n + 1);
  v0(0) = 1.0;
  v0(g.n) = 1.0;
  const Eigen::MatrixXd j = gram_matrix(g.n);
  return (g.mat * v0).dot(j * v0) > 0.0 && g.mat.determinant() > 0.0;
}

struct BruhatResult {
  bool big_cell = false;
  GroupElement p_minus;
  std::optional<GroupElement> u_plus;  // absent on the w-cell
};

// G = P^- U^+ (big cell) or P^- w. In this realization the big cell is
// decided by the single coordinate g(0,0): for g = u^-(y) z u(x) with
// z = diag(alpha, R, 1/alpha) one has g(0,0) = alpha, while every element
// of P^- w has a vanishing (0,0) entry. The closed-form factors below were
// fixed by a one-time symbolic solve of p^- u(x) = g for generic entries.
inline BruhatResult bruhat_decompose(const GroupElement& g,
                                     const Tolerances& tol = default_tol()) {
  const int n = g.n;
  const double pivot = g.mat(0, 0);
  const double mag = std::abs(pivot);
  if (mag <= tol.bruhat_cell_floor) {
    // w-cell: g = (g w^{-1}) w with g w^{-1} in P^-.
    BruhatResult r;
    r.big_cell = false;
    r.p_minus = compose(g, weyl_element(n));  // w = w^{-1}
    return r;
  }
  if (mag <= tol.bruhat_cell)
    throw NearCellBoundary("bruhat_decompose: pivot magnitude " +
                           std::to_string(mag) +
                           " lies in the ill-conditioned band");
  const Eigen::VectorXd x = g.mat.block(0, 1, 1, n - 1).transpose() / pivot;
  BruhatResult r;
  r.big_cell = true;
  r.u_plus = make_u(x, n);
  r.p_minus = compose(g, invert(*r.u_plus));
  return r;
}

// p in P^- (lower block triangular) factors as p = u^-(y) z with
// z = diag(alpha, R, 1/alpha) in Z(A); y = p(1:n, 0)/alpha.
inline std::pair<GroupElement, GroupElement> pminus_factor(
    const GroupElement& p, const Tolerances& tol = default_tol()) {
  const int n = p.n;
  double upper = 0.0;
  for (int jc = 1; jc <= n; ++jc) upper = std::max(upper, std::abs(p.mat(0, jc)));
  for (int i = 1; i < n; ++i) upper = std::max(upper, std::abs(p.mat(i, n)));
  if (upper > tol.bruhat_recompose * std::max(1.0, p.mat.norm()))
    throw NotInSubgroup("pminus_factor: input is not lower block triangular");
  const double alpha = p.mat(0, 0);
  if (std::abs(alpha) < tol.bruhat_cell_floor)
    throw NotInSubgroup("pminus_factor: degenerate corner entry");
  const Eigen::VectorXd y = p.mat.block(1, 0, n - 1, 1) / alpha;
  const GroupElement um = make_u(y, n, Side::Lower);
  return {um, compose(invert(um), p)};
}

namespace detail {

// Rotation in SO(m) taking unit vector a to unit vector b, identity on the
// orthogonal complement of span(a, b).
inline Eigen::MatrixXd rotation_between(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& b) {
  const int m = static_cast<int>(a.size());
  const double c = a.dot(b);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(m, m);
  if (c > 1.0 - 1e-14) return eye;
  if (c < -1.0 + 1e-14) {
    // Rotation by pi in a plane containing a.
    if (m == 2) return -eye;
    // m >= 3: rotate by pi about an axis orthogonal to a.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    int k = 0;
    for (int i = 1; i < m; ++i)
      if (std::abs(a(i)) < std::abs(a(k))) k = i;
    w(k) = 1.0;
    w -= a * a(k);
    w.normalize();
    return 2.0 * w * w.transpose() - eye;
  }
  Eigen::VectorXd w = (b - c * a).normalized();
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  return eye + (c - 1.0) * (a * a.transpose() + w * w.transpose()) +
         s * (w * a.transpose() - a * w.transpose());
}

}  // namespace detail

struct KakResult {
  GroupElement k1;
  double t = 0.0;
  GroupElement k2;
};

// Cartan decomposition g = k1 a_t k2 with k1, k2 in K and t >= 0.
// Requires g in the identity component.
inline KakResult kak_decompose(const GroupElement& g) {
  const int n = g.n;
  const Eigen::MatrixXd t = lorentz_basis(n);
  const Eigen::MatrixXd gs = t.transpose() * g.mat * t;  // standard Lorentz form
  const Eigen::VectorXd c = gs.col(0);
  if (c(0) < 0.0)
    throw NonIdentityComponent("kak_decompose: g is not in the identity component");
  const double cosh_t = std::max(1.0, c(0));
  const double tt = std::acosh(cosh_t);
  KakResult out;
  out.t = tt;
  Eigen::MatrixXd k1s = Eigen::MatrixXd::Identity(n + 1, n + 1);
  const double sh = std::sqrt(std::max(0.0, cosh_t * cosh_t - 1.0));
  if (sh > 1e-12) {
    const Eigen::VectorXd d = c.tail(n) / sh;
    Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
    en(n - 1) = 1.0;
    k1s.block(1, 1, n, n) = detail::rotation_between(en, d);
  }
  // Standard boost in the (f_0, f_n) plane.
  Eigen::MatrixXd as = Eigen::MatrixXd::Identity(n + 1, n + 1);
  as(0, 0) = cosh_t;
  as(0, n) = sh;
  as(n, 0) = sh;
  as(n, n) = cosh_t;
  const Eigen::MatrixXd k2s = as.inverse() * k1s.transpose() * gs;
  out.k1 = {n, t * k1s * t.transpose()};
  out.k2 = {n, t * k2s * t.transpose()};
  return out;
}

// Random element of SO(m) from Gaussian QR (test/sampling helper).
inline Eigen::MatrixXd random_rotation(int m, Rng& rng) {
  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < m; ++i)
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

// Random word in the generators a_t, u(x), u^-(x), K; stays in the identity
// component by construction.
inline GroupElement random_element(int n, Rng& rng, int word_length = 8,
                                   double scale = 0.8) {
  GroupElement g = identity_element(n);
  for (int i = 0; i < word_length; ++i) {
    const std::uint64_t pick = rng.next_u64() % 4;
    switch (pick) {
      case 0:
        g = compose(g, make_a(scale * rng.normal(), n));
        break;
      case 1: {
        Eigen::VectorXd x(n - 1);
        for (int k = 0; k < n - 1; ++k) x(k) = scale * rng.normal();
        g = compose(g, make_u(x, n));
        break;
      }
      case 2: {
        Eigen::VectorXd x(n - 1);
        for (int k = 0; k < n - 1; ++k) x(k) = scale * rng.normal();
        g = compose(g, make_u(x, n, Side::Lower));
        break;
      }
      default:
        g = compose(g, make_k(random_rotation(n, rng), n));
        break;
    }
  }
  return g;
}

}  // namespace hypflow
