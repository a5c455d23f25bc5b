// Shared scalar/matrix aliases, unit conversions, error types, and the
// deterministic RNG used across the library.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace uavplan {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// --- unit conversions (dB only at boundaries; everything internal is linear W/m/Hz) ---

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// --- error hierarchy ---

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParameterError : public Error {
 public:
  using Error::Error;
};
class PlacementError : public Error {
 public:
  using Error::Error;
};
class ParseError : public Error {
 public:
  using Error::Error;
};
class SingularityError : public Error {
 public:
  using Error::Error;
};
class DomainError : public Error {
 public:
  using Error::Error;
};
class CapabilityError : public Error {
 public:
  using Error::Error;
};
class LinearizationError : public Error {
 public:
  using Error::Error;
};
class InitializationError : public Error {
 public:
  using Error::Error;
};
class AssignmentError : public Error {
 public:
  using Error::Error;
};
class Rank1ViolationError : public Error {
 public:
  Rank1ViolationError(const std::string& what, double ratio) : Error(what), eig_ratio(ratio) {}
  double eig_ratio;
};

// --- deterministic RNG ---
//
// All randomness in the library flows through this wrapper. Distribution
// transforms are spelled out explicitly (no std::*_distribution) so that a
// given seed produces the same stream on every standard-conforming platform.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) { return mix64(a ^ mix64(b)); }

class Rng {
 public:
  // xorshift128+ seeded via splitmix; small, fast, stable across platforms
  explicit Rng(std::uint64_t seed)
      : s0_(mix64(seed)), s1_(mix64(seed ^ 0xDEADBEEFCAFEF00Dull)) {
    if (s0_ == 0 && s1_ == 0) s1_ = 1;
  }

  std::uint64_t next_u64() {
    std::uint64_t x = s0_;
    const std::uint64_t y = s1_;
    s0_ = y;
    x ^= x << 23;
    s1_ = x ^ y ^ (x >> 17) ^ (y >> 26);
    return s1_ + y;
  }

  // uniform in [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double phase() { return 2.0 * kPi * uniform01(); }

  // circularly symmetric complex Gaussian with E|z|^2 = variance
  Complex cnormal(double variance) {
    // Box-Muller; guard log(0)
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1) * variance);
    return Complex(r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2));
  }

 private:
  std::uint64_t s0_, s1_;
};

}  // namespace uavplan
