#include "doctest.h"

#include <cmath>

#include "beurling/contour.hpp"

using namespace beurling;

namespace {

const SequenceTable& standard() {
  static const SequenceTable t = build_sequences(ParamSet::toy(20.0, 1));
  return t;
}

// zeta(s) = 1/(1 - 2^{-s}): the only integers are the powers of 2.
cplx log_zeta_two(cplx s) { return -std::log(1.0 - std::exp(-s * std::log(2.0))); }

}  // namespace

TEST_CASE("envelope exponent with alpha = 1") {
  const double lx = 158.0, l2 = std::log(lx);
  CHECK(envelope_log(lx, 1.0, 1.0, 0.0) == doctest::Approx(lx - std::sqrt(2.0 * lx * l2)).epsilon(1e-14));
  const double b = 0.55;
  CHECK(envelope_log(lx, 1.0, 1.0, b) ==
        doctest::Approx(lx - std::sqrt(2.0 * lx * l2) * (1 + b * std::log(l2) / l2)).epsilon(1e-14));
  CHECK(envelope_log(lx, 0.5, 0.7, 0.0) < lx);
}

TEST_CASE("track names") {
  CHECK(track_from_name(track_name(Track::Discrete)) == Track::Discrete);
  CHECK(track_name(Track::Continuous) == "continuous");
  CHECK_THROWS_AS(track_from_name("both"), Error);
}

TEST_CASE("vertical Perron integral counts the powers of 2") {
  const PerronValue v = perron_vertical(log_zeta_two, 10.5, 1.5, 2000.0, 1e-9);
  // 1, 2, 4, 8.
  CHECK(std::abs(v.value - 4.0) <= v.error_bound + v.quad_error);
  CHECK(std::abs(v.value - 4.0) < 0.1);
  CHECK(v.error_bound < 1.0);
  // The conjugate fold matches the two-sided integral.
  CHECK(perron_vertical_full(log_zeta_two, 10.5, 1.5, 2000.0, 1e-9) == doctest::Approx(v.value).epsilon(1e-8));
  CHECK_THROWS_AS(perron_vertical(log_zeta_two, 10.5, 1.0, 10.0), Error);
}

TEST_CASE("the effective Perron bound shrinks as T grows") {
  double prev = std::numeric_limits<double>::infinity();
  for (double lt : {2.0, 4.0, 6.0, 8.0}) {
    const double b = perron_error_bound_log(std::log(1000.0), 1.5, lt);
    CHECK(b < prev);
    prev = b;
  }
}

TEST_CASE("closed loop below A_0: vertical line = residue + shifted contour") {
  const ClosedLoopReport r = closed_loop(standard(), 0, 200.0, 1.5, 1e3);
  CHECK(r.relative_residual < 1e-8);
  CHECK(r.oracle_N == doctest::Approx(200.0));
  CHECK(r.residue == doctest::Approx(200.0 * residue_and_density(standard(), 0).rho_K).epsilon(1e-12));
  CHECK(r.to_json().contains("relative_residual"));
  CHECK_THROWS_AS(closed_loop(standard(), 0, 200.0, 1.5, 1e3, 1.2), Error);
}

TEST_CASE("shifted contour at logB0 = 20: connected pieces, sign and margin") {
  ShiftedOptions opt;
  opt.T2_offset = -1.0;
  const PerronReport r = shifted_total(standard(), 0, opt);
  const auto& seg = r.contour.segments;
  REQUIRE(seg.size() > 4);
  for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
    const Endpoint &b = seg[i].b, &a = seg[i + 1].a;
    CHECK(b.far == a.far);
    CHECK(b.sigma == doctest::Approx(a.sigma).epsilon(1e-12));
    if (b.far) CHECK(b.log_t == doctest::Approx(a.log_t));
    else CHECK(b.u == doctest::Approx(a.u).scale(1e-12));
  }
  // Saddles in increasing order of t along the chain.
  int last_m = -r.contour.M - 1;
  for (const auto& s : seg)
    if (s.kind == "gamma") {
      CHECK(s.m == last_m + 1);
      last_m = s.m;
    }
  CHECK(last_m == r.contour.M);
  CHECK(r.s0.sign == 1);
  CHECK(r.margin > 1.0);
  CHECK(r.margin >= r.margin_default_T2);
  CHECK(r.log_others_total < r.s0.log_lower);
  CHECK(r.contour.to_csv().find("gamma_0") != std::string::npos);
}
