#pragma once

// Arbitrary-precision helpers (MPFR via Boost.Multiprecision). Used only for
// solving the construction sequences and for reducing huge phases mod 2pi.

#include <boost/multiprecision/mpfr.hpp>
#include <string>

namespace beurling {

using hpf = boost::multiprecision::mpfr_float;

// Sets the working precision (decimal digits) for newly created hpf values and
// restores the previous value on destruction.
class HpDigits {
 public:
  explicit HpDigits(unsigned digits);
  ~HpDigits();
  HpDigits(const HpDigits&) = delete;
  HpDigits& operator=(const HpDigits&) = delete;

 private:
  unsigned saved_;
};

unsigned hp_digits();
hpf hp_pi();
double to_d(const hpf& v);
// v mod 2pi in [0, 2pi), evaluated at the precision of v.
double mod_2pi(const hpf& v);
// Distance of v/(2pi) to the nearest integer, relative to |v|/(2pi).
double lattice_defect(const hpf& v, const hpf& period);
std::string hp_str(const hpf& v, int digits = 0);
hpf hp_parse(const std::string& s);

}  // namespace beurling
