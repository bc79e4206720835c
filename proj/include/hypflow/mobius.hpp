#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>

#include "hypflow/group.hpp"

// Transport between SO(Q_n)^0 and the Moebius models:
//   n = 2: PSL(2, R) acting on sl(2, R) through litera(y, x, z) = [[-x, 2y], [-z, x]],
//          det = Q_2; the induced map sends a_t -> diag(e^{t/2}, e^{-t/2})
//          and u(x) -> [[1, x], [0, 1]].
//   n = 3: PSL(2, C) acting on Hermitian matrices X(y, x1, x2, z) =
//          [[2y, x1 + i x2], [x1 - i x2, z]] via X -> m X m^*; det = Q_3;
//          a_t and u(x) map to the same normal forms (complex entry x1 + i x2).
// Elements are identified with their negatives.

namespace hypflow {

using Complex = std::complex<double>;

struct MobiusElement {
  int n = 2;             // 2: real entries; 3: complex
  Eigen::Matrix2cd m;    // determinant 1 up to 1e-10
};

inline MobiusElement mobius_identity(int n) {
  MobiusElement e;
  e.n = n;
  e.m.setIdentity();
  return e;
}

inline MobiusElement mcompose(const MobiusElement& a, const MobiusElement& b) {
  if (a.n != b.n) throw DimensionMismatch("mcompose: mixed dimensions");
  return {a.n, a.m * b.m};
}

inline MobiusElement minvert(const MobiusElement& a) {
  MobiusElement r;
  r.n = a.n;
  r.m << a.m(1, 1), -a.m(0, 1), -a.m(1, 0), a.m(0, 0);
  return r;
}

inline double mobius_det_error(const MobiusElement& a) {
  return std::abs(a.m.determinant() - Complex(1.0, 0.0));
}

inline GroupElement from_mobius(const MobiusElement& mob) {
  const int n = mob.n;
  GroupElement g{n, Eigen::MatrixXd::Zero(n + 1, n + 1)};
  if (n == 2) {
    const double a = mob.m(0, 0).real(), b = mob.m(0, 1).real(),
                 c = mob.m(1, 0).real(), d = mob.m(1, 1).real();
    g.mat << a * a, a * b, b * b / 2.0,
             2.0 * a * c, a * d + b * c, b * d,
             2.0 * c * c, 2.0 * c * d, d * d;
  } else {
    // Images of the coordinate Hermitian matrices under X -> m X m^*.
    auto col = [&](const Eigen::Matrix2cd& x) {
      const Eigen::Matrix2cd y = mob.m * x * mob.m.adjoint();
      return Eigen::Vector4d(y(0, 0).real() / 2.0, y(0, 1).real(),
                             y(0, 1).imag(), y(1, 1).real());
    };
    Eigen::Matrix2cd xy, x1, x2, xz;
    xy << 2.0, 0.0, 0.0, 0.0;
    x1 << 0.0, 1.0, 1.0, 0.0;
    x2 << 0.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 0.0;
    xz << 0.0, 0.0, 0.0, 1.0;
    g.mat.col(0) = col(xy);
    g.mat.col(1) = col(x1);
    g.mat.col(2) = col(x2);
    g.mat.col(3) = col(xz);
  }
  return g;
}

namespace detail {

// Canonical sign: make the first entry of (a, b, c, d) with significant
// modulus have positive real part (positive imaginary as tiebreak).
inline void canonicalize_sign(Eigen::Matrix2cd& m) {
  const std::array<Complex, 4> e = {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
  double top = 0.0;
  for (const auto& v : e) top = std::max(top, std::abs(v));
  for (const auto& v : e) {
    if (std::abs(v) > 0.25 * top) {
      if (v.real() < 0.0 || (std::abs(v.real()) < 1e-14 * top && v.imag() < 0.0))
        m = -m;
      return;
    }
  }
}

}  // namespace detail

// Inverse transport. Recovers m up to sign from the quadratic expressions in
// the matrix of g; throws NonIdentityComponent when g is not in the image.
inline MobiusElement to_mobius(const GroupElement& g,
                               const Tolerances& tol = default_tol()) {
  const int n = g.n;
  MobiusElement out;
  out.n = n;
  if (n == 2) {
    const Eigen::MatrixXd& gm = g.mat;
    const double aa = gm(0, 0), bb = 2.0 * gm(0, 2), cc = gm(2, 0) / 2.0,
                 dd = gm(2, 2);
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    const std::array<double, 4> mags = {aa, bb, cc, dd};
    int k = 0;
    for (int i = 1; i < 4; ++i)
      if (mags[i] > mags[k]) k = i;
    if (mags[k] <= 0.0)
      throw NonIdentityComponent("to_mobius: no positive square entry");
    switch (k) {
      case 0:
        a = std::sqrt(aa);
        b = gm(0, 1) / a;
        c = gm(1, 0) / (2.0 * a);
        d = (1.0 + b * c) / a;
        break;
      case 1:
        b = std::sqrt(bb);
        a = gm(0, 1) / b;
        d = gm(1, 2) / b;
        c = (a * d - 1.0) / b;
        break;
      case 2:
        c = std::sqrt(cc);
        a = gm(1, 0) / (2.0 * c);
        d = gm(2, 1) / (2.0 * c);
        b = (a * d - 1.0) / c;
        break;
      default:
        d = std::sqrt(dd);
        b = gm(1, 2) / d;
        c = gm(2, 1) / (2.0 * d);
        a = (1.0 + b * c) / d;
        break;
    }
    out.m << a, b, c, d;
  } else {
    const Eigen::MatrixXd& gm = g.mat;
    const double aa = gm(0, 0), bb = 2.0 * gm(0, 3), cc = gm(3, 0) / 2.0,
                 dd = gm(3, 3);
    // Pairwise products read from the columns of g:
    const Complex ab(gm(0, 1), -gm(0, 2));        // a conj(b)
    const Complex ac((gm(1, 0) + 0.0) / 2.0, gm(2, 0) / 2.0);  // a conj(c)
    const Complex bd(gm(1, 3), gm(2, 3));         // b conj(d)
    const Complex cd(gm(3, 1) / 2.0, -gm(3, 2) / 2.0);         // c conj(d)
    const Complex spq(gm(1, 1), gm(2, 1));        // a conj(d) + b conj(c)
    const Complex dpq(gm(2, 2), -gm(1, 2));       // a conj(d) - b conj(c)
    const Complex ad = 0.5 * (spq + dpq);         // a conj(d)
    const Complex bc = 0.5 * (spq - dpq);         // b conj(c)
    const std::array<double, 4> mags = {aa, bb, cc, dd};
    int k = 0;
    for (int i = 1; i < 4; ++i)
      if (mags[i] > mags[k]) k = i;
    if (mags[k] <= 0.0)
      throw NonIdentityComponent("to_mobius: no positive modulus entry");
    Complex a, b, c, d;
    switch (k) {
      case 0:
        a = std::sqrt(aa);
        b = std::conj(ab / a);
        c = std::conj(ac / a);
        d = std::conj(ad / a);
        break;
      case 1:
        b = std::sqrt(bb);
        a = ab / std::conj(b);
        d = std::conj(bd / b);
        c = std::conj(bc / b);
        break;
      case 2:
        c = std::sqrt(cc);
        a = ac / std::conj(c);
        d = std::conj(cd / c);
        b = bc / std::conj(c);
        break;
      default:
        d = std::sqrt(dd);
        b = bd / std::conj(d);
        c = cd / std::conj(d);
        a = ad / std::conj(d);
        break;
    }
    out.m << a, b, c, d;
  }
  // Normalize the determinant drift and validate the round trip.
  const Complex det = out.m.determinant();
  if (std::abs(det) < 1e-12)
    throw NonIdentityComponent("to_mobius: degenerate extraction");
  out.m /= std::sqrt(det);
  detail::canonicalize_sign(out.m);
  const GroupElement back = from_mobius(out);
  const double scale = std::max(1.0, g.mat.norm());
  if ((back.mat - g.mat).norm() > tol.mobius_roundtrip * scale)
    throw NonIdentityComponent(
        "to_mobius: input is not in the identity component");
  return out;
}

// ---------------------------------------------------------------------------
// Quaternion helpers for the n = 3 upper half-space action. Points are
// w = x1 + x2 i + t j (k component zero); complex numbers embed in span(1, i).

struct Quat {
  double w = 0.0, x = 0.0, y = 0.0, z = 0.0;
};

inline Quat qmul(const Quat& p, const Quat& q) {
  return {p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z,
          p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w};
}

inline Quat qconj(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }
inline double qnorm2(const Quat& q) {
  return q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
}
inline Quat qinv(const Quat& q) {
  const double n2 = qnorm2(q);
  return {q.w / n2, -q.x / n2, -q.y / n2, -q.z / n2};
}
inline Quat qfrom(const Complex& c) { return {c.real(), c.imag(), 0.0, 0.0}; }

// w -> (a w + b)(c w + d)^{-1} on upper half-space.
inline Quat mobius_apply3(const MobiusElement& m, const Quat& w) {
  const Quat num = qmul(qfrom(m.m(0, 0)), w);
  const Quat den = qmul(qfrom(m.m(1, 0)), w);
  const Quat top{num.w + m.m(0, 1).real(), num.x + m.m(0, 1).imag(), num.y,
                 num.z};
  const Quat bot{den.w + m.m(1, 1).real(), den.x + m.m(1, 1).imag(), den.y,
                 den.z};
  return qmul(top, qinv(bot));
}

// Differential at w applied to tangent v: (a - f(w) c) v (c w + d)^{-1}.
inline Quat mobius_diff3(const MobiusElement& m, const Quat& w, const Quat& v) {
  const Quat fw = mobius_apply3(m, w);
  const Quat fc = qmul(fw, qfrom(m.m(1, 0)));
  const Quat coef{m.m(0, 0).real() - fc.w, m.m(0, 0).imag() - fc.x, -fc.y,
                  -fc.z};
  const Quat den = qmul(qfrom(m.m(1, 0)), w);
  const Quat bot{den.w + m.m(1, 1).real(), den.x + m.m(1, 1).imag(), den.y,
                 den.z};
  return qmul(qmul(coef, v), qinv(bot));
}

// SU(2) element whose differential at j sends the vertical direction to the
// unit vector dir = (d1, d2, d3) (coordinates 1, i, j): closed form from
// df(j) = (|a|^2 - |b|^2) j - 2 a b.
inline MobiusElement su2_steer(const Eigen::Vector3d& dir) {
  MobiusElement k;
  k.n = 3;
  const double v3 = std::max(-1.0, std::min(1.0, dir(2)));
  const double al = std::sqrt(0.5 * (1.0 + v3));
  Complex be;
  if (al > 1e-8)
    be = Complex(-dir(0), -dir(1)) / (2.0 * al);
  else
    be = Complex(1.0, 0.0);
  k.m << Complex(al, 0.0), be, -std::conj(be), Complex(al, 0.0);
  return k;
}

inline Complex mobius_apply2(const MobiusElement& m, const Complex& tau) {
  return (m.m(0, 0) * tau + m.m(0, 1)) / (m.m(1, 0) * tau + m.m(1, 1));
}

}  // namespace hypflow
