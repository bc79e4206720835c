#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace hypflow {

// Central tolerance configuration. All numerical thresholds used by the
// library live here; functions take an optional Tolerances argument and
// default to these values.
struct Tolerances {
  double form_residual = 1e-9;       // Gram-identity Frobenius residual
  double weight_relation = 1e-10;    // a_t u(x) a_{-t} = u(e^t x)
  double bruhat_recompose = 1e-10;   // big-cell refactorization
  double bruhat_cell = 1e-10;        // big-cell decision coordinate
  double bruhat_cell_floor = 1e-12;  // below this, treat as w-cell outright
  double kak_recompose = 1e-9;
  double mobius_roundtrip = 1e-9;
  double mobius_det = 1e-10;
  double fd_boundary = 1e-9;         // fundamental-domain slack
  double word_product = 1e-8;        // reduction word bookkeeping
  double vanishing_derivative = 1e-12;
  double taylor_match = 1e-12;
  double rolle_slack = 1e-9;         // relative slack when re-verifying the bound
  double containment = 1e-8;         // sphere/affine containment threshold
  double sg_zero = 1e-8;             // relative threshold for the S_g detector
  double weight_block = 1e-10;       // relative block-norm cutoff for mu_0
  double probe_floor = 1e-14;        // degenerate-orbit cutoff
};

inline const Tolerances& default_tol() {
  static const Tolerances t{};
  return t;
}

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error { using Error::Error; };
struct NearCellBoundary : Error { using Error::Error; };
struct NotInSubgroup : Error { using Error::Error; };
struct NonIdentityComponent : Error { using Error::Error; };
struct DegenerateOrbit : Error { using Error::Error; };
struct VanishingDerivative : Error { using Error::Error; };
struct VerificationFailed : Error { using Error::Error; };
struct OrderOverflow : Error { using Error::Error; };
struct IterationCap : Error { using Error::Error; };
struct NoValidInterval : Error { using Error::Error; };
struct SupTooSmall : Error { using Error::Error; };
struct ScheduleViolation : Error { using Error::Error; };
struct UnsupportedCase : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Seeded RNG with portable output. mt19937_64 output is fully specified by
// the standard; the uniform maps below avoid the implementation-defined
// std::uniform_*_distribution so that streams are identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller (deterministic pair consumption).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }
  std::uint64_t next_u64() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hypflow
