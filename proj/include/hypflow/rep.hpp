#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "hypflow/group.hpp"

// The representation V = (+)_{d=1}^{dim g} wedge^d g with the direct sum of
// the exterior powers of the adjoint action. The Lie algebra basis consists
// of a_t-eigenvectors:
//   X+_i (weight +1), H and the so(n-1) rotation generator (weight 0),
//   X-_i (weight -1),
// and the wedge monomial basis (tagged by the sum of weights) is declared
// orthonormal. Since the basis matrices are Frobenius-orthogonal with equal
// norms, this inner product is Ad(K)-invariant, so K acts orthogonally.

namespace hypflow {

struct RepSpace {
  int n = 0;
  int dim_g = 0;
  int dim = 0;
  std::vector<Eigen::MatrixXd> g_basis;  // dim_g matrices, (n+1) x (n+1)
  std::vector<int> g_weights;            // weight of each basis element
  // Wedge bookkeeping: monomials[d-1] lists ascending index tuples of size d;
  // coordinate layout is degree-major with degree_offset[d-1] the first
  // global index of degree d.
  std::vector<std::vector<std::vector<int>>> monomials;
  std::vector<int> degree_offset;
  std::vector<int> weights;  // per global coordinate
  int max_weight = 0;
};

namespace detail {

inline void enumerate_subsets(int m, int d, std::vector<std::vector<int>>& out) {
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    int k = d - 1;
    while (k >= 0 && idx[k] == m - d + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int i = k + 1; i < d; ++i) idx[i] = idx[i - 1] + 1;
  }
}

}  // namespace detail

inline RepSpace build_rep(int n) {
  if (n != 2 && n != 3) throw DimensionMismatch("build_rep: n must be 2 or 3");
  RepSpace rep;
  rep.n = n;
  const int nn = n + 1;
  auto zero = [&] { return Eigen::MatrixXd::Zero(nn, nn).eval(); };
  // X+_i: entries (0, i) and (i, n).
  for (int i = 1; i < n; ++i) {
    Eigen::MatrixXd m = zero();
    m(0, i) = 1.0;
    m(i, n) = 1.0;
    rep.g_basis.push_back(m);
    rep.g_weights.push_back(1);
  }
  // H = diag(1, 0, ..., 0, -1).
  {
    Eigen::MatrixXd m = zero();
    m(0, 0) = 1.0;
    m(n, n) = -1.0;
    rep.g_basis.push_back(m);
    rep.g_weights.push_back(0);
  }
  // Rotation generator of so(n-1) (n = 3 only).
  if (n == 3) {
    Eigen::MatrixXd m = zero();
    m(1, 2) = -1.0;
    m(2, 1) = 1.0;
    rep.g_basis.push_back(m);
    rep.g_weights.push_back(0);
  }
  // X-_i = transpose of X+_i.
  for (int i = 1; i < n; ++i) {
    Eigen::MatrixXd m = zero();
    m(i, 0) = 1.0;
    m(n, i) = 1.0;
    rep.g_basis.push_back(m);
    rep.g_weights.push_back(-1);
  }
  rep.dim_g = static_cast<int>(rep.g_basis.size());

  rep.monomials.resize(rep.dim_g);
  rep.degree_offset.resize(rep.dim_g);
  int offset = 0;
  for (int d = 1; d <= rep.dim_g; ++d) {
    detail::enumerate_subsets(rep.dim_g, d, rep.monomials[d - 1]);
    rep.degree_offset[d - 1] = offset;
    for (const auto& mono : rep.monomials[d - 1]) {
      int w = 0;
      for (int ix : mono) w += rep.g_weights[ix];
      rep.weights.push_back(w);
      ++offset;
    }
  }
  rep.dim = offset;
  rep.max_weight = n - 1;
  return rep;
}

struct WedgeVector {
  const RepSpace* rep = nullptr;
  Eigen::VectorXd coords;
};

inline WedgeVector zero_vector(const RepSpace& rep) {
  return {&rep, Eigen::VectorXd::Zero(rep.dim)};
}

inline WedgeVector basis_vector(const RepSpace& rep, int global_index) {
  WedgeVector v = zero_vector(rep);
  v.coords(global_index) = 1.0;
  return v;
}

// Adjoint matrix of g on the Lie algebra in the fixed eigenbasis. The basis
// matrices have pairwise disjoint supports, so coefficients are read off
// entrywise (averaged over the duplicated entries).
inline Eigen::MatrixXd ad_matrix(const RepSpace& rep, const GroupElement& g) {
  if (g.n != rep.n) throw DimensionMismatch("ad_matrix: mixed dimensions");
  const int n = rep.n;
  const Eigen::MatrixXd ginv = invert(g).mat;
  Eigen::MatrixXd a(rep.dim_g, rep.dim_g);
  for (int j = 0; j < rep.dim_g; ++j) {
    const Eigen::MatrixXd m = g.mat * rep.g_basis[j] * ginv;
    int row = 0;
    for (int i = 1; i < n; ++i) a(row++, j) = 0.5 * (m(0, i) + m(i, n));
    a(row++, j) = 0.5 * (m(0, 0) - m(n, n));
    if (n == 3) a(row++, j) = 0.5 * (m(2, 1) - m(1, 2));
    for (int i = 1; i < n; ++i) a(row++, j) = 0.5 * (m(i, 0) + m(n, i));
  }
  return a;
}

// Apply (+)_d wedge^d of the linear map `a` on g to a vector of V.
inline Eigen::VectorXd wedge_apply(const RepSpace& rep, const Eigen::MatrixXd& a,
                                   const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rep.dim);
  Eigen::MatrixXd sub(rep.dim_g, rep.dim_g);
  for (int d = 1; d <= rep.dim_g; ++d) {
    const auto& monos = rep.monomials[d - 1];
    const int off = rep.degree_offset[d - 1];
    const int count = static_cast<int>(monos.size());
    for (int in_ix = 0; in_ix < count; ++in_ix) {
      const double c = v(off + in_ix);
      if (c == 0.0) continue;
      const auto& cols = monos[in_ix];
      for (int out_ix = 0; out_ix < count; ++out_ix) {
        const auto& rows = monos[out_ix];
        // minor det of a[rows, cols]
        double det = 0.0;
        if (d == 1) {
          det = a(rows[0], cols[0]);
        } else if (d == 2) {
          det = a(rows[0], cols[0]) * a(rows[1], cols[1]) -
                a(rows[0], cols[1]) * a(rows[1], cols[0]);
        } else {
          Eigen::MatrixXd blk(d, d);
          for (int r = 0; r < d; ++r)
            for (int cc = 0; cc < d; ++cc) blk(r, cc) = a(rows[r], cols[cc]);
          det = blk.determinant();
        }
        out(off + out_ix) += det * c;
      }
    }
  }
  return out;
}

inline WedgeVector act(const GroupElement& g, const WedgeVector& v) {
  const RepSpace& rep = *v.rep;
  return {&rep, wedge_apply(rep, ad_matrix(rep, g), v.coords)};
}

inline WedgeVector weight_project(const WedgeVector& v, int mu) {
  const RepSpace& rep = *v.rep;
  WedgeVector out = zero_vector(rep);
  if (std::abs(mu) > rep.max_weight) return out;  // out of range: zero vector
  for (int i = 0; i < rep.dim; ++i)
    if (rep.weights[i] == mu) out.coords(i) = v.coords(i);
  return out;
}

struct StableSplit {
  WedgeVector minus, zero, plus;
};

inline StableSplit stable_project(const WedgeVector& v) {
  const RepSpace& rep = *v.rep;
  StableSplit s{zero_vector(rep), zero_vector(rep), zero_vector(rep)};
  for (int i = 0; i < rep.dim; ++i) {
    const int w = rep.weights[i];
    if (w < 0)
      s.minus.coords(i) = v.coords(i);
    else if (w == 0)
      s.zero.coords(i) = v.coords(i);
    else
      s.plus.coords(i) = v.coords(i);
  }
  return s;
}

inline double block_norm(const WedgeVector& v, int mu) {
  return weight_project(v, mu).coords.norm();
}

// mu_0 = max{mu : q_mu(v) != 0}, with a block counting as nonzero when its
// norm exceeds weight_block * ||v||. Returns -(n-1) - 1 if all blocks vanish.
inline int leading_weight(const WedgeVector& v,
                          const Tolerances& tol = default_tol()) {
  const RepSpace& rep = *v.rep;
  const double cutoff = tol.weight_block * v.coords.norm();
  for (int mu = rep.max_weight; mu >= -rep.max_weight; --mu)
    if (block_norm(v, mu) > cutoff) return mu;
  return -rep.max_weight - 1;
}

// Log-log regression slope of h -> ||q_1(u(h e_1) w0)|| over a decreasing
// grid of h values. For w0 with leading weight mu_0 <= 1 the slope is
// 1 - mu_0 as h -> 0.
inline double leading_exponent_probe(const WedgeVector& w0,
                                     const std::vector<double>& h_grid,
                                     const Tolerances& tol = default_tol()) {
  const RepSpace& rep = *w0.rep;
  if (w0.coords.norm() == 0.0)
    throw DegenerateOrbit("leading_exponent_probe: zero vector");
  if (h_grid.size() < 2)
    throw DimensionMismatch("leading_exponent_probe: need at least 2 grid points");
  std::vector<double> lx, ly;
  bool any_alive = false;
  for (double h : h_grid) {
    const WedgeVector img = act(make_u1(h, rep.n), w0);
    const double norm1 = block_norm(img, 1);
    if (norm1 >= tol.probe_floor) {
      any_alive = true;
      lx.push_back(std::log(h));
      ly.push_back(std::log(norm1));
    }
  }
  if (!any_alive || lx.size() < 2)
    throw DegenerateOrbit("leading_exponent_probe: q_1 component vanishes on the grid");
  const auto m = static_cast<double>(lx.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = m * sxx - sx * sx;
  return (m * sxy - sx * sy) / denom;
}

// Wedge of a list of Lie-algebra vectors (given by coordinates in the
// eigenbasis): coordinates of v_1 ^ ... ^ v_d in the monomial basis.
inline WedgeVector wedge_of(const RepSpace& rep,
                            const std::vector<Eigen::VectorXd>& vectors) {
  const int d = static_cast<int>(vectors.size());
  if (d < 1 || d > rep.dim_g)
    throw DimensionMismatch("wedge_of: bad number of factors");
  WedgeVector out = zero_vector(rep);
  const auto& monos = rep.monomials[d - 1];
  const int off = rep.degree_offset[d - 1];
  for (std::size_t k = 0; k < monos.size(); ++k) {
    Eigen::MatrixXd blk(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) blk(r, c) = vectors[c](monos[k][r]);
    out.coords(off + static_cast<int>(k)) = blk.determinant();
  }
  return out;
}

}  // namespace hypflow
