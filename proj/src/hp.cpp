#include "beurling/hp.hpp"

#include <cmath>
#include <sstream>

namespace beurling {

HpDigits::HpDigits(unsigned digits) : saved_(hpf::default_precision()) {
  hpf::default_precision(digits);
}

HpDigits::~HpDigits() { hpf::default_precision(saved_); }

unsigned hp_digits() { return hpf::default_precision(); }

hpf hp_pi() {
  hpf r;
  mpfr_const_pi(r.backend().data(), MPFR_RNDN);
  return r;
}

double to_d(const hpf& v) { return v.convert_to<double>(); }

double mod_2pi(const hpf& v) {
  hpf two_pi = 2 * hp_pi();
  hpf r = v - two_pi * floor(v / two_pi);
  double d = to_d(r);
  if (d >= 2.0 * 3.14159265358979323846) d = 0.0;
  return d < 0 ? 0.0 : d;
}

double lattice_defect(const hpf& v, const hpf& period) {
  hpf q = v / period;
  hpf frac = q - boost::multiprecision::round(q);
  if (q == 0) return to_d(abs(frac));
  return to_d(abs(frac) / abs(q));
}

std::string hp_str(const hpf& v, int digits) {
  std::ostringstream os;
  os.precision(digits > 0 ? digits : static_cast<int>(v.precision()));
  os << std::scientific << v;
  return os.str();
}

hpf hp_parse(const std::string& s) { return hpf(s); }

}  // namespace beurling
