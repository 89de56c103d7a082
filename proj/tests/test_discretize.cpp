#include "doctest.h"

#include <boost/math/special_functions/expint.hpp>
#include <cmath>

#include "beurling/discretize.hpp"
#include "beurling/quadrature.hpp"

using namespace beurling;

namespace {

const Construction& small() {
  static const Construction c(build_sequences(ParamSet::toy(4.0, 1)));
  return c;
}

// Covers the first row and its square powers; well below A_1.
const CountingTable& table() {
  static const CountingTable F(small(), 9.0);
  return F;
}

}  // namespace

TEST_CASE("target names") {
  CHECK(target_from_name(target_name(SampleTarget::RiemannPiC)) == SampleTarget::RiemannPiC);
  CHECK_THROWS_AS(target_from_name("pi"), Error);
}

TEST_CASE("exact derivative of pi_C against difference quotients") {
  const Construction& c = small();
  const auto& r = c.table().row(0);
  for (SampleTarget tg : {SampleTarget::PiC, SampleTarget::RiemannPiC}) {
    auto F = [&](double l) { return tg == SampleTarget::PiC ? c.pi(c.point(l)) : c.Pi(c.point(l)); };
    for (double l : {1.0, r.logA_d + 0.37, r.logB_d - 0.2, r.logB_d + r.dC / 2, 7.3, 2 * r.logA_d + 0.11}) {
      const double h = 1e-6;
      const double fd = (F(l + h) - F(l - h)) / (2 * h);
      CHECK(counting_deriv(c, l, tg) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("Hermite table reproduces pi_C and inverts it") {
  const Construction& c = small();
  const CountingTable& F = table();
  for (double l : {0.8, 2.5, 3.3, 4.0282, 5.5, 8.9}) {
    CHECK(F.value(l) == doctest::Approx(c.pi(c.point(l))).epsilon(1e-10));
    CHECK(F.deriv(l) == doctest::Approx(counting_deriv(c, l, SampleTarget::PiC)).epsilon(1e-5));
  }
  for (double y : {0.5, 10.0, 123.4, F.total() - 0.5}) CHECK(F.value(F.invert(y)) == doctest::Approx(y).epsilon(1e-12));
  CHECK_THROWS_AS(F.value(9.5), Error);
  CHECK_THROWS_AS(F.invert(F.total() + 1.0), Error);
}

TEST_CASE("one prime per unit cell, deterministic in the seed") {
  const CountingTable& F = table();
  const DiscreteSystem a = sample_primes(F, 7), b = sample_primes(F, 7), d = sample_primes(F, 8);
  REQUIRE(a.primes.size() == static_cast<std::size_t>(std::floor(F.total())));
  a.validate();
  for (std::size_t j = 0; j < a.primes.size(); ++j) {
    const double v = F.value(std::log(a.primes[j].value));
    CHECK(v > static_cast<double>(j) - 1e-9);
    CHECK(v <= static_cast<double>(j + 1) + 1e-9);
    CHECK(a.primes[j].value == b.primes[j].value);
  }
  CHECK(a.primes[5].value != d.primes[5].value);
  std::vector<double> grid;
  for (int i = 0; i <= 900; ++i) grid.push_back(i * 0.01);
  const double gap = sup_counting_gap(a, F, grid);
  CHECK(gap <= 1.0);
  CHECK(gap > 0.5);
}

TEST_CASE("exp_integral matches quadrature of the table derivative") {
  const CountingTable& F = table();
  for (double t : {0.0, 3.0, 50.0, 400.0}) {
    auto re = [&](double l) { return std::cos(t * l) * F.deriv(l); };
    auto im = [&](double l) { return -std::sin(t * l) * F.deriv(l); };
    const int pieces = 900 + static_cast<int>(t * 8);
    const cplx exact(gauss_kronrod(re, 0.0, 8.0, 1e-12, 1e-12, 40000, pieces).value,
                     gauss_kronrod(im, 0.0, 8.0, 1e-12, 1e-12, 40000, pieces).value);
    CHECK(std::abs(F.exp_integral(8.0, t) - exact) < 1e-8 * std::max(1.0, std::abs(exact)));
  }
  CHECK(F.exp_integral(8.0, 0.0).real() == doctest::Approx(F.value(8.0) - F.value(0.0)).epsilon(1e-12));
}

TEST_CASE("exponential sums of a sample stay on the square-root scale") {
  const DiscreteSystem ds = sample_primes(table(), 3);
  const auto s = exp_sum_statistic(ds, table(), 40, 1e4, 3);
  REQUIRE(s.size() == 40);
  std::vector<double> r;
  for (const auto& x : s) {
    CHECK(x.y >= std::exp(1.0) * (1 - 1e-12));
    CHECK(x.t <= 1e4);
    r.push_back(x.ratio);
  }
  CHECK(quantile(r, 0.95) < 3.0);
}

TEST_CASE("quantile interpolates between order statistics") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0}, 0.25) == doctest::Approx(1.25));
  CHECK(quantile({4.0, 1.0}, 1.0) == 4.0);
  CHECK_THROWS_AS(quantile({}, 0.5), Error);
}

TEST_CASE("Mellin transforms of the Li density") {
  for (double lA : {2.0, 13.0}) {
    for (double s : {1.5, 3.0}) {
      auto f = [&](double l) { return std::exp((1.0 - s) * l) * -std::expm1(-l) / l; };
      const double top = lA + 80.0 / (s - 1.0);
      const double exact = gauss_kronrod(f, lA, top, 0.0, 1e-13, 4000, 16).value;
      CHECK(li_tail_mellin_real(lA, s) == doctest::Approx(exact).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(li_tail_mellin_real(2.0, 1.0), Error);
  // Head plus tail is log(s/(s - 1)).
  const double s = 2.5;
  CHECK(li_head_mellin(3.0, s).real() + li_tail_mellin_real(3.0, s) == doctest::Approx(std::log(s / (s - 1))).epsilon(1e-10));
  const cplx z(1.2, 30.0);
  auto fr = [&](double l) { return (std::exp((1.0 - z) * l) * (-std::expm1(-l) / l)).real(); };
  CHECK(li_head_mellin(4.0, z).real() ==
        doctest::Approx(gauss_kronrod(fr, 1e-12, 4.0, 0.0, 1e-13, 4000, 40).value).epsilon(1e-9));
}

TEST_CASE("phase buckets of width pi/80 centred on multiples of pi/80") {
  CHECK(phase_bucket(0.0) == 0);
  CHECK(phase_bucket(kPi / 80) == 1);
  CHECK(phase_bucket(-kPi / 80) == 159);
  CHECK(phase_bucket(kPi / 160 - 1e-12) == 0);
  CHECK(phase_bucket(kPi / 160 + 1e-12) == 1);
  CHECK(phase_bucket(kPi) == 80);
  CHECK(phase_bucket(-kPi / 160) == 0);
}

TEST_CASE("q-trick on a synthetic phase history") {
  const SequenceTable& t = small().table();
  CHECK_THROWS_AS(qtrick_select({{0, 0.1}, {0, 0.2}, {1, 0.0}}, t), Error);
  CHECK_THROWS_AS(qtrick_select({{0, 0.1}, {0, 0.2}, {2, 0.0}, {1, 0.0}}, t), Error);
  // Everything already in S_0: no extra prime.
  const QTrickResult none = qtrick_select({{0, 0.0}, {0, 0.01}, {1, -0.01}, {1, 0.0}}, t);
  CHECK_FALSE(none.needed);
  CHECK(none.found);
  // Even samples in bucket 3, odd ones in bucket 1.
  const double w = kPi / 80;
  const QTrickResult r = qtrick_select({{0, 3 * w}, {0, 3 * w + 0.001}, {1, w}, {1, w - 0.002}}, t);
  CHECK(r.l == 3);
  CHECK(r.r == 1);
  CHECK_FALSE(r.relabeled);
  CHECK(r.even_counts[3] == 2);
  CHECK(r.odd_counts[1] == 2);
  REQUIRE(r.found);
  {
    // Recompute both phase conditions for the chosen q independently.
    HpDigits scope(t.digits);
    const hpf lq = log(hpf(r.q));
    for (int K : {0, 1}) {
      const double ph = mod_2pi(t.row(K).tau * lq);
      const cplx z = std::polar(1.0 / r.q, -ph);
      const double lhs = (-3.0 * std::log(1.0 - z)).imag() + (K == 0 ? 3 : 1) * w;
      CHECK(std::abs(lhs) < kPi / 40);
    }
    CHECK(std::abs(r.q - 80 / kPi) <= 0.5 + 1e-12);
    CHECK(r.tail < kPi / 160);
  }
  CHECK(r.to_json().contains("l"));
}

TEST_CASE("x~ probe on the 3-smooth numbers") {
  DiscreteSystem ds;
  ds.primes = {{2.0, 1}, {3.0, 1}};
  const IntegerStream st = enumerate_integers(ds, std::log(100.0));
  const XTilde a = probe_x_tilde(st, 10.0);
  CHECK(a.in_window == 1);  // 9
  CHECK(a.x_tilde == doctest::Approx(9.5));
  CHECK(a.clearance == doctest::Approx(0.5));
  CHECK(a.certified);
  const XTilde b = probe_x_tilde(st, 30.0);  // 27 < [29, 30] < 32
  CHECK(b.in_window == 0);
  CHECK(b.x_tilde == doctest::Approx(29.5));
  CHECK(b.clearance == doctest::Approx(2.5));
  CHECK_THROWS_AS(probe_x_tilde(st, 200.0), Error);
}

TEST_CASE("hybrid measure: prime powers below A_1, then dLi") {
  DiscreteSystem ds;
  ds.primes = {{2.0, 1}, {3.5, 2}};
  ds.special = SpecialPrime{25.5, 2};
  const SequenceTable& t = small().table();
  const HalfLineMeasure m = hybrid_measure(ds, t, 0);
  const double lA = t.logA_next(0);
  double direct = 0.0;
  for (auto [v, w] : std::vector<std::pair<double, double>>{{2.0, 1.0}, {3.5, 2.0}, {25.5, 2.0}})
    for (int nu = 1; nu * std::log(v) < lA; ++nu) direct += w / nu;
  CHECK(m.cumulative(lA - 1e-9) == doctest::Approx(direct));
  REQUIRE(m.pieces.size() == 1);
  CHECK(m.pieces[0].a == lA);
  CHECK(m.pieces[0].tag == PieceTag::LiTail);
}
