#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace qpmap {

// Rotation number used throughout unless the caller overrides it: the
// golden mean (sqrt(5)-1)/2, written out so the literal rounds to the
// nearest double once, at compile time.
inline constexpr double kGoldenMean = 0.61803398874989484820458683436563811772;

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Orbit left the numerical domain (|x| above the escape bound).
struct DivergedOrbit : std::runtime_error {
  explicit DivergedOrbit(const std::string& what) : std::runtime_error(what) {}
};

// Too few usable samples to decide (e.g. not enough returns to a theta window).
struct InsufficientSamples : std::runtime_error {
  explicit InsufficientSamples(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver ran out of iterations without meeting its tolerance.
struct NoConvergence : std::runtime_error {
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct SingularJacobian : std::runtime_error {
  explicit SingularJacobian(const std::string& what) : std::runtime_error(what) {}
};

// Grid doubling kept moving the integral value; the integrand is too rough
// (typically a near-zero of the fiber derivative under the log).
struct QuadratureNonConvergent : std::runtime_error {
  explicit QuadratureNonConvergent(const std::string& what) : std::runtime_error(what) {}
};

struct NoTangencyInRange : std::runtime_error {
  explicit NoTangencyInRange(const std::string& what) : std::runtime_error(what) {}
};

struct MissingArtifact : std::runtime_error {
  explicit MissingArtifact(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qpmap
