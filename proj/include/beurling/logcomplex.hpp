#pragma once

#include <cmath>
#include <limits>

#include "beurling/common.hpp"

namespace beurling {

// Complex number stored as (log|z|, arg z). Zero is logmag = -inf.
struct LogComplex {
  double logmag = -std::numeric_limits<double>::infinity();
  double phase = 0.0;

  static LogComplex from(cplx z) {
    if (z == cplx(0.0, 0.0)) return {};
    return {std::log(std::abs(z)), std::arg(z)};
  }
  // exp(z) where Im z may be a reduced phase.
  static LogComplex exp_of(cplx z) { return {z.real(), wrap_phase(z.imag())}; }

  bool is_zero() const { return std::isinf(logmag) && logmag < 0; }

  LogComplex operator*(const LogComplex& o) const {
    if (is_zero() || o.is_zero()) return {};
    return {logmag + o.logmag, wrap_phase(phase + o.phase)};
  }
  LogComplex operator/(const LogComplex& o) const {
    return {logmag - o.logmag, wrap_phase(phase - o.phase)};
  }
  LogComplex operator*(cplx z) const { return *this * from(z); }

  // Sum via rescaling by the larger magnitude.
  LogComplex operator+(const LogComplex& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    const double ref = std::max(logmag, o.logmag);
    cplx a = std::polar(std::exp(logmag - ref), phase);
    cplx b = std::polar(std::exp(o.logmag - ref), o.phase);
    cplx s = a + b;
    if (s == cplx(0.0, 0.0)) return {};
    return {ref + std::log(std::abs(s)), std::arg(s)};
  }
  LogComplex operator-() const { return {logmag, wrap_phase(phase + kPi)}; }
  LogComplex operator-(const LogComplex& o) const { return *this + (-o); }

  // Value scaled by exp(-shift); useful to compare terms of wildly different size.
  cplx scaled(double shift) const {
    if (is_zero()) return {0.0, 0.0};
    return std::polar(std::exp(logmag - shift), phase);
  }
  cplx to_cplx() const { return scaled(0.0); }
  LogComplex conj() const { return {logmag, wrap_phase(-phase)}; }
};

}  // namespace beurling
