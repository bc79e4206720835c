#include <catch2/catch_amalgamated.hpp>

#include "hypflow/quotient.hpp"

using namespace hypflow;

namespace {

bool in_domain(const QuotientPoint& q, double eps = 1e-9) {
  if (q.g.n == 2) {
    const double x = q.base(0), y = q.base(1);
    return std::abs(x) <= 0.5 + eps && x * x + y * y >= 1.0 - eps;
  }
  const double x1 = q.base(0), x2 = q.base(1), t = q.base(2);
  return std::abs(x1) <= 0.5 + eps && x2 >= -eps && x2 <= 0.5 + eps &&
         x1 * x1 + x2 * x2 + t * t >= 1.0 - eps;
}

}  // namespace

TEST_CASE("Moebius transport") {
  SECTION("a_t maps to diag(e^{t/2}, e^{-t/2}) up to sign") {
    for (int n : {2, 3}) {
      const MobiusElement m = to_mobius(make_a(0.8, n));
      const double l = std::exp(0.4);
      const double err1 = std::abs(m.m(0, 0) - Complex(l)) +
                          std::abs(m.m(1, 1) - Complex(1.0 / l));
      const double err2 = std::abs(m.m(0, 0) + Complex(l)) +
                          std::abs(m.m(1, 1) + Complex(1.0 / l));
      REQUIRE(std::min(err1, err2) < 1e-10);
      REQUIRE(std::abs(m.m(0, 1)) < 1e-12);
      REQUIRE(std::abs(m.m(1, 0)) < 1e-12);
    }
  }
  SECTION("u(x) maps to the unit upper-triangular with translation entry x") {
    const MobiusElement m2 = to_mobius(make_u1(1.75, 2));
    REQUIRE(std::abs(m2.m(0, 1) - Complex(1.75)) < 1e-10);
    const MobiusElement m3 = to_mobius(make_u(Eigen::Vector2d(0.4, -1.1), 3));
    REQUIRE(std::abs(m3.m(0, 1) - Complex(0.4, -1.1)) < 1e-10);
    REQUIRE(std::abs(m3.m(0, 0) - Complex(1.0)) < 1e-10);
  }
  SECTION("identity maps to identity") {
    for (int n : {2, 3}) {
      const MobiusElement m = to_mobius(identity_element(n));
      REQUIRE((m.m - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
    }
  }
  SECTION("round trip and intertwining on random elements") {
    for (int n : {2, 3}) {
      Rng rng(13);
      for (int rep = 0; rep < 30; ++rep) {
        const GroupElement g = random_element(n, rng, 8, 0.5);
        const MobiusElement m = to_mobius(g);
        REQUIRE(mobius_det_error(m) < 1e-10);
        REQUIRE((from_mobius(m).mat - g.mat).norm() <
                1e-9 * std::max(1.0, g.mat.norm()));
        // homomorphism up to sign
        const GroupElement h = random_element(n, rng, 8, 0.5);
        const MobiusElement mh = to_mobius(h);
        const MobiusElement prod = to_mobius(compose(g, h));
        const Eigen::Matrix2cd expected = m.m * mh.m;
        const double err = std::min((prod.m - expected).norm(),
                                    (prod.m + expected).norm());
        REQUIRE(err < 1e-8 * std::max(1.0, expected.norm()));
      }
    }
  }
  SECTION("weight relation carries over: m(a_t) m(u(x)) m(a_t)^{-1}") {
    const MobiusElement ma = to_mobius(make_a(0.6, 3));
    const MobiusElement mu = to_mobius(make_u(Eigen::Vector2d(0.3, 0.2), 3));
    const MobiusElement lhs = mcompose(mcompose(ma, mu), minvert(ma));
    const MobiusElement rhs =
        to_mobius(make_u(std::exp(0.6) * Eigen::Vector2d(0.3, 0.2), 3));
    REQUIRE(std::min((lhs.m - rhs.m).norm(), (lhs.m + rhs.m).norm()) < 1e-10);
  }
  SECTION("non-identity-component input raises") {
    REQUIRE_THROWS_AS(to_mobius(make_m_flip(2)), NonIdentityComponent);
  }
}

TEST_CASE("fundamental-domain reduction, n=2") {
  SECTION("identity reduces to base point i with empty word") {
    const QuotientPoint q = reduce(identity_element(2));
    REQUIRE(q.word.empty());
    REQUIRE(q.base(0) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(q.base(1) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(height(q) == Catch::Approx(1.0));
  }
  SECTION("u(5) reduces by five unit translations to base point i") {
    // The frame-to-point map sends u(5) to tau = -5 + i, so the word is five
    // forward unit translations.
    const QuotientPoint q = reduce(make_u1(5.0, 2));
    REQUIRE(q.word == std::vector<int>({0, 0, 0, 0, 0}));
    REQUIRE(q.base(0) == Catch::Approx(0.0).margin(1e-10));
    REQUIRE(q.base(1) == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("word bookkeeping: rep = word product times start") {
    Rng rng(3);
    for (int rep = 0; rep < 15; ++rep) {
      GroupElement g = identity_element(2);
      for (int i = 0; i < 40; ++i)
        g = compose(g, from_mobius(lattice_generator(
                           2, static_cast<int>(rng.next_u64() % 3))));
      g = compose(g, make_a(rng.uniform(-0.5, 1.5), 2));
      const QuotientPoint q = reduce(g);
      REQUIRE(in_domain(q));
      const MobiusElement wp = word_product(2, q.word);
      REQUIRE((mcompose(wp, q.start).m - q.rep.m).norm() < 1e-8);
    }
  }
  SECTION("reduction is idempotent") {
    Rng rng(5);
    const GroupElement g = random_element(2, rng, 10, 0.6);
    const QuotientPoint q = reduce(g);
    // the element whose frame maps to the reduced representative
    const QuotientPoint q2 = reduce(from_mobius(minvert(q.rep)));
    REQUIRE(q2.word.empty());
    REQUIRE((q2.base - q.base).norm() < 1e-9);
  }
  SECTION("Gamma-equivariance of base coordinates") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
      const GroupElement g = random_element(2, rng, 8, 0.6);
      const GroupElement gamma = random_lattice_element(2, rng, 6);
      const QuotientPoint a = reduce(g);
      const QuotientPoint b = reduce(compose(g, gamma));
      REQUIRE((a.base - b.base).norm() < 1e-8);
      REQUIRE((a.fiber - b.fiber).norm() < 1e-8);
    }
  }
  SECTION("height is at least sqrt(3)/2") {
    Rng rng(17);
    for (int rep = 0; rep < 30; ++rep) {
      const QuotientPoint q = reduce(random_element(2, rng, 10, 0.7));
      REQUIRE(height(q) >= std::sqrt(3.0) / 2.0 - 1e-9);
    }
  }
  SECTION("left translation by a_t sends the base toward the cusp floor") {
    // base(a_t) = e^{-t} i before reduction; after reduction the height is
    // e^{t} (the geodesic from i toward 0 climbs the cusp after inversion).
    const QuotientPoint q = reduce(make_a(3.0, 2));
    REQUIRE(q.base(1) == Catch::Approx(std::exp(3.0)).epsilon(1e-9));
  }
}

TEST_CASE("fundamental-domain reduction, n=3") {
  SECTION("identity reduces to base point j") {
    const QuotientPoint q = reduce(identity_element(3));
    REQUIRE(q.word.empty());
    REQUIRE(q.base(2) == Catch::Approx(1.0));
    REQUIRE(height(q) == Catch::Approx(1.0));
  }
  SECTION("random words reduce into the Picard domain with exact bookkeeping") {
    Rng rng(23);
    for (int rep = 0; rep < 15; ++rep) {
      GroupElement g = identity_element(3);
      for (int i = 0; i < 40; ++i)
        g = compose(g, from_mobius(lattice_generator(
                           3, static_cast<int>(rng.next_u64() % 6))));
      g = compose(g, compose(make_a(rng.uniform(-0.5, 1.0), 3),
                             make_m_rotation(rng.uniform(0.0, 6.0), 3)));
      const QuotientPoint q = reduce(g);
      REQUIRE(in_domain(q));
      const MobiusElement wp = word_product(3, q.word);
      REQUIRE((mcompose(wp, q.start).m - q.rep.m).norm() < 1e-8);
    }
  }
  SECTION("Gamma-equivariance of base coordinates") {
    Rng rng(29);
    for (int rep = 0; rep < 20; ++rep) {
      const GroupElement g = random_element(3, rng, 8, 0.5);
      const GroupElement gamma = random_lattice_element(3, rng, 6);
      const QuotientPoint a = reduce(g);
      const QuotientPoint b = reduce(compose(g, gamma));
      REQUIRE((a.base - b.base).norm() < 1e-8);
    }
  }
  SECTION("height floor of the Picard domain") {
    Rng rng(31);
    for (int rep = 0; rep < 30; ++rep) {
      const QuotientPoint q = reduce(random_element(3, rng, 10, 0.5));
      REQUIRE(height(q) >= 1.0 / std::sqrt(2.0) - 1e-9);
    }
  }
}

TEST_CASE("fiber direction readout") {
  SECTION("n=2: identity frame points straight up") {
    const QuotientPoint q = reduce(identity_element(2));
    REQUIRE(q.fiber_angle == Catch::Approx(M_PI / 2.0));
  }
  SECTION("n=2: the K-component only spins the fiber") {
    // left multiplication by elements of Stab(i sqrt 2)... use a_t: frame at
    // reduced height e^t looking along the geodesic.
    const QuotientPoint q = reduce(make_a(2.0, 2));
    // the geodesic from i to 0 flips to point upward after the inversion
    REQUIRE(std::abs(std::sin(q.fiber_angle)) > 0.99);
  }
  SECTION("n=3: identity frame points up; k-part of the derivative vanishes") {
    const QuotientPoint q = reduce(identity_element(3));
    REQUIRE((q.fiber - Eigen::Vector3d(0, 0, 1)).norm() < 1e-12);
  }
  SECTION("height is K-fiber-independent") {
    Rng rng(41);
    for (int n : {2, 3}) {
      // right K-factor in the Stab(base frame) sense: compose with the SU
      // steering element through the group side
      const GroupElement g = random_element(n, rng, 8, 0.5);
      const QuotientPoint q = reduce(g);
      GroupElement k;
      if (n == 2) {
        // group element whose Moebius image fixes i: from_mobius of a rotation
        MobiusElement rot = mobius_identity(2);
        const double th = 0.7;
        rot.m << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
        k = from_mobius(rot);
      } else {
        k = from_mobius(su2_steer(Eigen::Vector3d(0.6, 0.0, 0.8)));
      }
      // The fiber circle/sphere over base(g) is the left coset of the
      // base-point stabilizer: base(k g) = M(g)(k_mob^{-1}(i)) = base(g)
      // whenever k_mob fixes i (resp. j).
      const QuotientPoint q2 = reduce(compose(invert(k), g));
      REQUIRE(height(q2) == Catch::Approx(height(q)).epsilon(1e-9));
    }
  }
}

TEST_CASE("embedding into the Picard manifold") {
  Rng rng(43);
  const GroupElement g2 = random_element(2, rng, 8, 0.5);
  const GroupElement g3 = embed_in_picard(g2);
  SECTION("embedded element preserves the n=3 form") {
    REQUIRE(is_in_group(g3, 1e-9));
  }
  SECTION("embedding intertwines a_t and u(x e_1)") {
    REQUIRE((embed_in_picard(make_a(0.9, 2)).mat - make_a(0.9, 3).mat).norm() <
            1e-12);
    REQUIRE((embed_in_picard(make_u1(0.7, 2)).mat - make_u1(0.7, 3).mat)
                .norm() < 1e-12);
  }
  SECTION("embedded points have real base coordinate") {
    const QuotientPoint q = reduce(g3);
    REQUIRE(std::abs(q.base(1)) < 1e-9);  // x2 = 0 on the embedded surface
  }
}
