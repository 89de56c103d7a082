#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace beurling {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// All recoverable failures (bad input, solver non-convergence, broken
// invariants) surface as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reduce an angle into (-pi, pi].
inline double wrap_phase(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Reduce an angle into [0, 2pi).
inline double wrap_positive(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

// Iterated logarithms log_2 = log log, log_3 = log log log.
inline double log2i(double y) { return std::log(std::log(y)); }
inline double log_of_log(double logy) { return std::log(logy); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace beurling
