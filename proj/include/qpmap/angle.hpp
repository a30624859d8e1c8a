#pragma once

#include <cmath>

namespace qpmap {

// Reduce to the fundamental domain [0,1). One floor subtraction keeps the
// result exact for inputs already in range and costs nothing in hot loops.
inline double wrap_unit(double t) {
  t -= std::floor(t);
  // floor(-1e-17) = -1 makes t == 1.0 after the subtraction; fold it back.
  return t < 1.0 ? t : 0.0;
}

// Point on the circle T = R/Z. Arithmetic always re-reduces, so a stored
// value is in [0,1) by construction. Iteration advances one omega at a
// time (never accumulating n*omega), which keeps the marginal dynamics a
// rigid rotation up to one rounding per step.
class Angle {
 public:
  Angle() = default;
  explicit Angle(double raw) : v_(wrap_unit(raw)) {}

  double value() const { return v_; }

  Angle& advance(double omega) {
    v_ = wrap_unit(v_ + omega);
    return *this;
  }

  friend Angle operator+(Angle a, double w) { return Angle(a.v_ + w); }

 private:
  double v_ = 0.0;
};

// theta0 + n*omega mod 1 in one shot. The mesh reconstruction needs the
// n-step rotation of a point without walking the orbit; the single product
// keeps the error at one rounding instead of n.
inline double rotate_n(double theta0, double omega, long long n) {
  return wrap_unit(theta0 + std::fmod(static_cast<double>(n) * omega, 1.0));
}

}  // namespace qpmap
