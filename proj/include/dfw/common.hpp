#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfw {

using ByteVec = std::vector<std::uint8_t>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// imgcodec
struct EmptyInput final : Error { using Error::Error; };
struct ShapeMismatch final : Error { using Error::Error; };

// rbm / dbn
struct DimensionMismatch final : Error { using Error::Error; };
struct EmptyBatch final : Error { using Error::Error; };
struct TooLarge final : Error { using Error::Error; };
struct EmptyData final : Error { using Error::Error; };
struct UnknownLabel final : Error { using Error::Error; };

// serialization
struct IoFailure final : Error { using Error::Error; };
struct BadMagic final : Error { using Error::Error; };
struct ChecksumMismatch final : Error { using Error::Error; };
struct VersionUnsupported final : Error { using Error::Error; };
struct ParseError final : Error { using Error::Error; };

// dataset
struct BadLabel final : Error { using Error::Error; };
struct DuplicatePath final : Error { using Error::Error; };
struct NoPositives final : Error { using Error::Error; };

// chain / consensus
struct AuthFailure final : Error { using Error::Error; };
struct DuplicateVerdict final : Error { using Error::Error; };
struct EmptyVerdicts final : Error { using Error::Error; };
struct UnknownNode final : Error { using Error::Error; };

// cli
struct ConfigError final : Error { using Error::Error; };
struct InvariantViolation final : Error { using Error::Error; };

// splitmix64; used to derive independent seeds from a base seed
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic RNG wrapper. Distributions are hand-rolled so streams are
// reproducible independent of the standard library's <random> internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return gen_() % n; }

  // Box-Muller with cached spare
  double normal(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dfw
