#include "doctest.h"

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <cmath>
#include <vector>

#include "beurling/construction.hpp"
#include "beurling/measures.hpp"
#include "beurling/pipeline.hpp"
#include "beurling/quadrature.hpp"
#include "beurling/rng.hpp"

using namespace beurling;

namespace {

double euler_gamma() { return boost::math::constants::euler<double>(); }

// Ordinary primes below n.
std::vector<int> primes_below(int n) {
  std::vector<bool> sieve(n + 1, true);
  std::vector<int> p;
  for (int i = 2; i <= n; ++i) {
    if (!sieve[i]) continue;
    p.push_back(i);
    for (long j = static_cast<long>(i) * i; j <= n; j += i) sieve[j] = false;
  }
  return p;
}

}  // namespace

TEST_CASE("Li(x) = Ein(log x) against the exponential integral") {
  for (double L : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0, 200.0}) {
    const double ein = boost::math::expint(L) - euler_gamma() - std::log(L);
    CHECK(Li_log(L) == doctest::Approx(ein).epsilon(1e-12));
  }
  CHECK(Li_log(0.0) == 0.0);
  CHECK_THROWS_AS(Li_log(-1.0), Error);
  CHECK(Li_diff(5.0, 5.0 + 1e-9) == doctest::Approx(std::expm1(5.0) / 5.0 * 1e-9).epsilon(1e-6));
  CHECK(Li_diff(3.0, 9.0) == doctest::Approx(Li_log(9.0) - Li_log(3.0)).epsilon(1e-13));
}

TEST_CASE("li_log is the Mobius sum of Li(x^{1/n})/n") {
  // sum_n mu(n)/n Ein(L/n). The first two Taylor terms of Ein are summed in
  // closed form (1/zeta(2), 1/zeta(3)) so the remaining terms decay like n^-4.
  const double inv_zeta2 = 6.0 / (kPi * kPi), inv_zeta3 = 1.0 / 1.2020569031595942854;
  for (double L : {5.0, 13.8, 30.0}) {
    double r = L * inv_zeta2 + L * L / 4.0 * inv_zeta3;
    for (int n = 1; n <= 4000; ++n) {
      const int mu = mobius(n);
      if (mu == 0) continue;
      const double y = L / n;
      const double rest = y > 0.05 ? boost::math::expint(y) - euler_gamma() - std::log(y) - y - y * y / 4
                                   : y * y * y / 18 + y * y * y * y / 96 + std::pow(y, 5) / 600;
      r += mu * rest / n;
    }
    CHECK(li_log(L) == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("mobius values") {
  const int expect[] = {1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0, -1, 1, 1, 0};
  for (int n = 1; n <= 16; ++n) CHECK(mobius(n) == expect[n - 1]);
  CHECK_THROWS_AS(mobius(0), Error);
}

TEST_CASE("Riemann prime counting round trip on the ordinary primes") {
  const auto ps = primes_below(10000);
  auto pi = [&](double l) {
    const double x = std::exp(l) * (1 + 1e-12);
    return static_cast<double>(std::upper_bound(ps.begin(), ps.end(), x) - ps.begin());
  };
  auto Pi = [&](double l) { return prime_to_riemann(pi, l, std::log(2.0)); };
  for (double x : {10.0, 100.0, 1000.0, 9999.0}) {
    const double l = std::log(x);
    // Direct oracle: sum over prime powers 1/nu.
    double direct = 0.0;
    for (int p : ps)
      for (int nu = 1; std::pow(p, nu) <= x * (1 + 1e-12); ++nu) direct += 1.0 / nu;
    CHECK(Pi(l) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(riemann_to_prime(Pi, l, std::log(2.0)) == doctest::Approx(pi(l)).epsilon(1e-12));
  }
}

TEST_CASE("exp* of discrete Riemann measures equals heap enumeration") {
  const ExpStarCheck r = check_exp_star(2024, 30, 5000.0);
  CHECK(r.systems == 30);
  CHECK(r.probes > 100);
  CHECK(r.mismatches == 0);
  CHECK(r.max_abs_diff < 1e-8);
}

TEST_CASE("exp* of a continuous measure: 1 + P + P*P/2 below the cube of the support start") {
  // P = main-term density on [1, 10); below e^3 only the first two powers contribute.
  HalfLineMeasure P;
  P.pieces.push_back({1.0, 10.0, PieceTag::MainTerm, {}, 0.0, 1.0, 0});
  const double top = 2.8;
  const HalfLineMeasure E = exp_star(P, top, 1e-6);
  // dP(u) = (1 - 1/u) du on [e, e^10).
  auto cum = [](double l) { return l <= 1.0 ? 0.0 : std::exp(l) - std::exp(1.0) - (l - 1.0); };
  auto conv = [&](double l) {
    if (l <= 2.0) return 0.0;
    // int P(x/u) dP(u) over log u in [1, l - 1].
    auto f = [&](double t) { return std::expm1(t) * cum(l - t); };
    return gauss_kronrod(f, 1.0, l - 1.0, 0.0, 1e-13, 2000).value;
  };
  for (double l : {0.5, 1.5, 2.2, 2.5, top}) {
    const double expect = 1.0 + cum(l) + 0.5 * conv(l);
    CHECK(E.cumulative(l) == doctest::Approx(expect).epsilon(1e-5));
  }
}

TEST_CASE("Mellin transform of a main-term piece against the closed form") {
  HalfLineMeasure M;
  const double L = 4.0;
  M.pieces.push_back({0.0, L, PieceTag::MainTerm, {}, 0.0, 1.0, 0});
  for (cplx s : {cplx(2.0, 3.0), cplx(0.5, 10.0), cplx(1.5, -40.0)}) {
    const cplx X = std::exp(cplx(L, 0.0));
    const cplx exact = (std::pow(X, 1.0 - s) - 1.0) / (1.0 - s) + (std::pow(X, -s) - 1.0) / s;
    CHECK(std::abs(mellin_transform(M, s, TailModel::None) - exact) < 1e-10 * std::abs(exact));
  }
  HalfLineMeasure tail;
  tail.pieces.push_back({0.0, std::numeric_limits<double>::infinity(), PieceTag::LiTail, {}, 0.0, 1.0, 0});
  CHECK_THROWS_AS(mellin_transform(tail, cplx(2, 0), TailModel::None), Error);
  // int_1^inf u^{-s} (1 - 1/u)/log u du = log(s/(s - 1)).
  const cplx s(2.5, 1.0);
  CHECK(std::abs(mellin_transform(tail, s, TailModel::LiTail) - std::log(s / (s - 1.0))) < 1e-9);
}

TEST_CASE("R-deviation piece mass against direct quadrature") {
  DensityPiece p;
  p.a = 2.0;
  p.b = 4.0;
  p.tag = PieceTag::RDeviation;
  const double tau = 37.0, phase = 0.4;
  p.params = {tau, phase, 2.0, 0.0};
  auto dens = [&](double l) {
    const double v = std::exp(l);
    return (1.0 - 1.0 / v) * 0.5 * std::cos(tau * (l - 2.0) + phase) * v;  // du = v dl
  };
  for (double x : {2.5, 3.3, 4.0, 5.0}) {
    const double exact = gauss_kronrod(dens, 2.0, std::min(x, 4.0), 0.0, 1e-13, 2000, 40).value;
    CHECK(p.mass(x) == doctest::Approx(exact).epsilon(1e-9));
  }
  CHECK(p.density(3.0) == doctest::Approx(dens(3.0) / std::exp(3.0)).epsilon(1e-13));
}

TEST_CASE("HalfLineMeasure validation and JSON round trip") {
  HalfLineMeasure m;
  m.atoms = {{0.5, 1.0}, {1.5, 0.25}};
  m.pieces.push_back({0.0, 1.0, PieceTag::MainTerm, {}, 0.0, 1.0, 0});
  m.pieces.push_back({1.0, 2.0, PieceTag::SDeviation, {0.0}, 0.0, -0.5, 0});
  m.validate();
  const HalfLineMeasure back = HalfLineMeasure::from_json(m.to_json());
  CHECK(back.to_json().dump() == m.to_json().dump());
  for (double l : {0.2, 0.5, 1.2, 1.5, 3.0}) CHECK(back.cumulative(l) == doctest::Approx(m.cumulative(l)));
  HalfLineMeasure bad = m;
  bad.pieces.push_back({1.5, 2.5, PieceTag::MainTerm, {}, 0.0, 1.0, 0});
  CHECK_THROWS_AS(bad.validate(), Error);
  HalfLineMeasure neg;
  neg.atoms = {{-0.1, 1.0}};
  CHECK_THROWS_AS(neg.validate(), Error);
}

TEST_CASE("merge_atoms joins coincident positions") {
  std::vector<Atom> a = {{1.0, 1.0}, {0.5, 2.0}, {1.0 + 1e-14, 3.0}};
  merge_atoms(a);
  REQUIRE(a.size() == 2);
  CHECK(a[0].logu == 0.5);
  CHECK(a[1].w == doctest::Approx(4.0));
}
