#include <catch2/catch_amalgamated.hpp>

#include "hypflow/rep.hpp"

using namespace hypflow;

namespace {

// Independent raising-operator oracle: the derivation extension of
// ad(X+_1) to the wedge algebra, built directly from structure constants.
// Predicts the probe slope as the smallest j with E^j q_{1-j}(w0) != 0.
Eigen::MatrixXd raising_matrix(const RepSpace& rep) {
  const int n = rep.n;
  // ad(X+_1) on the Lie algebra basis.
  GroupElement xplus{n, rep.g_basis[0]};
  Eigen::MatrixXd ad1(rep.dim_g, rep.dim_g);
  for (int j = 0; j < rep.dim_g; ++j) {
    const Eigen::MatrixXd m =
        rep.g_basis[0] * rep.g_basis[j] - rep.g_basis[j] * rep.g_basis[0];
    int row = 0;
    for (int i = 1; i < n; ++i) ad1(row++, j) = 0.5 * (m(0, i) + m(i, n));
    ad1(row++, j) = 0.5 * (m(0, 0) - m(n, n));
    if (n == 3) ad1(row++, j) = 0.5 * (m(2, 1) - m(1, 2));
    for (int i = 1; i < n; ++i) ad1(row++, j) = 0.5 * (m(i, 0) + m(n, i));
  }
  // Derivation on each wedge degree: sum over slots.
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(rep.dim, rep.dim);
  for (int d = 1; d <= rep.dim_g; ++d) {
    const auto& monos = rep.monomials[d - 1];
    const int off = rep.degree_offset[d - 1];
    for (std::size_t src = 0; src < monos.size(); ++src) {
      for (int slot = 0; slot < d; ++slot) {
        for (int tgt = 0; tgt < rep.dim_g; ++tgt) {
          const double c = ad1(tgt, monos[src][slot]);
          if (c == 0.0) continue;
          // replace index at slot with tgt, sort with sign, skip repeats
          std::vector<int> idx = monos[src];
          idx[slot] = tgt;
          double sign = 1.0;
          bool dup = false;
          for (int i = 0; i < d && !dup; ++i)
            for (int j2 = i + 1; j2 < d; ++j2)
              if (idx[i] == idx[j2]) {
                dup = true;
                break;
              }
          if (dup) continue;
          std::vector<int> sorted = idx;
          for (std::size_t i = 1; i < sorted.size(); ++i)
            for (std::size_t j2 = i; j2 > 0 && sorted[j2 - 1] > sorted[j2]; --j2) {
              std::swap(sorted[j2 - 1], sorted[j2]);
              sign = -sign;
            }
          // locate target monomial
          const auto it = std::lower_bound(monos.begin(), monos.end(), sorted);
          const int dst = static_cast<int>(it - monos.begin());
          e(off + dst, off + static_cast<int>(src)) += sign * c;
        }
      }
    }
  }
  return e;
}

int oracle_slope(const RepSpace& rep, const WedgeVector& w0) {
  const Eigen::MatrixXd e = raising_matrix(rep);
  for (int j = 0; j <= 2 * rep.max_weight; ++j) {
    Eigen::VectorXd v = weight_project(w0, 1 - j).coords;
    for (int k = 0; k < j; ++k) v = e * v;
    if (v.norm() > 1e-10 * std::max(1.0, w0.coords.norm())) return j;
  }
  return -1;
}

}  // namespace

TEST_CASE("representation dimensions and weights") {
  SECTION("n=2: total dimension 7") { REQUIRE(build_rep(2).dim == 7); }
  SECTION("n=3: total dimension 63") { REQUIRE(build_rep(3).dim == 63); }
  SECTION("weight +1 multiplicity in the degree-1 block is n-1") {
    for (int n : {2, 3}) {
      const RepSpace rep = build_rep(n);
      int count = 0;
      for (int i = 0; i < rep.dim_g; ++i)
        if (rep.weights[rep.degree_offset[0] + i] == 1) ++count;
      REQUIRE(count == n - 1);
    }
  }
  SECTION("max |weight| over the basis is n-1") {
    for (int n : {2, 3}) {
      const RepSpace rep = build_rep(n);
      int mx = 0;
      for (int w : rep.weights) mx = std::max(mx, std::abs(w));
      REQUIRE(mx == n - 1);
    }
  }
}

TEST_CASE("wedge action") {
  SECTION("identity acts trivially") {
    const RepSpace rep = build_rep(3);
    Rng rng(5);
    WedgeVector v = zero_vector(rep);
    for (int i = 0; i < rep.dim; ++i) v.coords(i) = rng.normal();
    const WedgeVector out = act(identity_element(3), v);
    REQUIRE((out.coords - v.coords).norm() < 1e-12);
  }
  SECTION("a_t scales a pure weight-mu basis vector by e^{mu t}") {
    for (int n : {2, 3}) {
      const RepSpace rep = build_rep(n);
      for (double t : {-1.0, 1.0, 2.5}) {
        const GroupElement a = make_a(t, n);
        for (int i = 0; i < rep.dim; ++i) {
          const WedgeVector out = act(a, basis_vector(rep, i));
          const double expect = std::exp(rep.weights[i] * t);
          REQUIRE(out.coords(i) == Catch::Approx(expect).epsilon(1e-9));
          Eigen::VectorXd rest = out.coords;
          rest(i) = 0.0;
          REQUIRE(rest.norm() < 1e-9 * std::abs(expect));
        }
      }
    }
  }
  SECTION("homomorphism act(gh, v) = act(g, act(h, v))") {
    for (int n : {2, 3}) {
      const RepSpace rep = build_rep(n);
      Rng rng(17);
      for (int repn = 0; repn < 10; ++repn) {
        const GroupElement g = random_element(n, rng, 6),
                           h = random_element(n, rng, 6);
        WedgeVector v = zero_vector(rep);
        for (int i = 0; i < rep.dim; ++i) v.coords(i) = rng.normal();
        const Eigen::VectorXd lhs = act(compose(g, h), v).coords;
        const Eigen::VectorXd rhs = act(g, act(h, v)).coords;
        REQUIRE((lhs - rhs).norm() < 1e-9 * std::max(1.0, lhs.norm()));
      }
    }
  }
  SECTION("K acts orthogonally in the declared basis") {
    for (int n : {2, 3}) {
      const RepSpace rep = build_rep(n);
      Rng rng(23);
      for (int repn = 0; repn < 8; ++repn) {
        const GroupElement k = make_k(random_rotation(n, rng), n);
        WedgeVector v = zero_vector(rep);
        for (int i = 0; i < rep.dim; ++i) v.coords(i) = rng.normal();
        const double before = v.coords.norm();
        const double after = act(k, v).coords.norm();
        REQUIRE(after == Catch::Approx(before).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("weight projections") {
  const RepSpace rep = build_rep(3);
  Rng rng(29);
  WedgeVector v = zero_vector(rep);
  for (int i = 0; i < rep.dim; ++i) v.coords(i) = rng.normal();
  SECTION("projections resolve the identity") {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(rep.dim);
    for (int mu = -rep.max_weight; mu <= rep.max_weight; ++mu)
      sum += weight_project(v, mu).coords;
    REQUIRE((sum - v.coords).norm() < 1e-14);
  }
  SECTION("out-of-range mu gives the zero vector") {
    REQUIRE(weight_project(v, rep.max_weight + 1).coords.norm() == 0.0);
  }
  SECTION("projections are mutually orthogonal") {
    for (int mu = -rep.max_weight; mu <= rep.max_weight; ++mu)
      for (int nu = mu + 1; nu <= rep.max_weight; ++nu)
        REQUIRE(std::abs(weight_project(v, mu).coords.dot(
                    weight_project(v, nu).coords)) == 0.0);
  }
  SECTION("equivariance: q_mu(a_t v) = e^{mu t} q_mu(v)") {
    for (double t : {-10.0, -1.0, 1.0, 10.0}) {
      const WedgeVector av = act(make_a(t, 3), v);
      for (int mu = -2; mu <= 2; ++mu) {
        const Eigen::VectorXd lhs = weight_project(av, mu).coords;
        const Eigen::VectorXd rhs =
            std::exp(mu * t) * weight_project(v, mu).coords;
        REQUIRE((lhs - rhs).norm() <= 1e-9 * std::max(1e-30, rhs.norm()));
      }
    }
  }
}

TEST_CASE("stable/unstable split") {
  const RepSpace rep = build_rep(2);
  Rng rng(31);
  WedgeVector v = zero_vector(rep);
  for (int i = 0; i < rep.dim; ++i) v.coords(i) = rng.normal();
  SECTION("parts sum to the identity and respect supports") {
    const StableSplit s = stable_project(v);
    REQUIRE((s.minus.coords + s.zero.coords + s.plus.coords - v.coords)
                .norm() == 0.0);
    const WedgeVector v0 = weight_project(v, 0);
    const StableSplit s0 = stable_project(v0);
    REQUIRE(s0.minus.coords.norm() == 0.0);
    REQUIRE(s0.plus.coords.norm() == 0.0);
    REQUIRE((s0.zero.coords - v0.coords).norm() == 0.0);
  }
  SECTION("positive part expands at least like e^t") {
    const StableSplit s = stable_project(v);
    REQUIRE(s.plus.coords.norm() > 0.0);
    for (double t : {0.5, 1.0, 2.0}) {
      const WedgeVector av = act(make_a(t, 2), v);
      const StableSplit sa = stable_project(av);
      REQUIRE(sa.plus.coords.norm() >=
              std::exp(t) * s.plus.coords.norm() * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("leading exponent probe") {
  // 2.5 decades, small enough that subleading terms do not bias the fit
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(std::pow(10.0, -1.5 - i / 8.0));

  SECTION("u-fixed top-weight vector: slope 0") {
    // X+_1 generates a u(e_1)-fixed line in degree 1 (n=2): mu_0 = 1 and the
    // q_1 component is constant along the orbit.
    const RepSpace rep = build_rep(2);
    const WedgeVector w0 = basis_vector(rep, 0);
    REQUIRE(leading_weight(w0) == 1);
    const double slope = leading_exponent_probe(w0, grid);
    REQUIRE(slope == Catch::Approx(0.0).margin(1e-6));
  }
  SECTION("lowest-weight vector of the n=2 adjoint block: slope 2") {
    // Closed form: Ad(u(h)) X- = X- + h H - (h^2/2) X+, so the q_1 part has
    // norm h^2/2 and the log-log slope is 1 - mu_0 = 2.
    const RepSpace rep = build_rep(2);
    const int xminus = rep.degree_offset[0] + 2;
    const WedgeVector w0 = basis_vector(rep, xminus);
    REQUIRE(leading_weight(w0) == -1);
    const double slope = leading_exponent_probe(w0, grid);
    REQUIRE(slope == Catch::Approx(2.0).margin(1e-3));
    // frozen closed-form check of the coefficient at one h
    const WedgeVector img = act(make_u1(0.01, 2), w0);
    REQUIRE(block_norm(img, 1) == Catch::Approx(0.5e-4).epsilon(1e-9));
  }
  SECTION("random supported vectors match the series-expansion oracle") {
    for (int n : {2, 3}) {
      const RepSpace rep = build_rep(n);
      Rng rng(47);
      for (int mu0 = 1; mu0 >= 1 - n; --mu0) {
        // random vector supported on weights <= mu0 with q_{mu0} != 0
        WedgeVector w0 = zero_vector(rep);
        for (int i = 0; i < rep.dim; ++i)
          if (rep.weights[i] <= mu0) w0.coords(i) = rng.normal();
        if (block_norm(w0, mu0) < 0.1) continue;
        REQUIRE(leading_weight(w0) == mu0);
        const int j = oracle_slope(rep, w0);
        REQUIRE(j == 1 - mu0);  // generic vectors survive the raising power
        const double slope = leading_exponent_probe(w0, grid);
        REQUIRE(slope == Catch::Approx(static_cast<double>(1 - mu0)).margin(0.05));
      }
    }
  }
  SECTION("degenerate orbit raises") {
    // top wedge is G-invariant with weight 0 and has no q_1 component along
    // the whole orbit
    const RepSpace rep = build_rep(2);
    const WedgeVector top = basis_vector(rep, rep.dim - 1);
    REQUIRE_THROWS_AS(leading_exponent_probe(top, grid), DegenerateOrbit);
  }
}

TEST_CASE("wedge_of") {
  const RepSpace rep = build_rep(2);
  SECTION("top wedge of the basis is the last coordinate") {
    std::vector<Eigen::VectorXd> vs;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
      e(i) = 1.0;
      vs.push_back(e);
    }
    const WedgeVector w = wedge_of(rep, vs);
    REQUIRE(w.coords(rep.dim - 1) == Catch::Approx(1.0));
    REQUIRE(w.coords.norm() == Catch::Approx(1.0));
  }
  SECTION("antisymmetry") {
    Rng rng(3);
    Eigen::VectorXd a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a(i) = rng.normal();
      b(i) = rng.normal();
    }
    const WedgeVector ab = wedge_of(rep, {a, b});
    const WedgeVector ba = wedge_of(rep, {b, a});
    REQUIRE((ab.coords + ba.coords).norm() < 1e-14);
  }
}
