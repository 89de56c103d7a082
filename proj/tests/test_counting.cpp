#include "doctest.h"

#include <cmath>
#include <map>

#include "beurling/counting.hpp"
#include "beurling/pipeline.hpp"

using namespace beurling;

namespace {

DiscreteSystem system_of(std::vector<std::pair<double, int>> ps) {
  DiscreteSystem ds;
  for (auto [v, m] : ps) ds.primes.push_back({v, m});
  return ds;
}

// Brute-force count of ordinary integers <= x whose prime factors all lie in ps.
long smooth_count(const std::vector<int>& ps, double x) {
  long n = 0;
  for (long k = 1; k <= static_cast<long>(x); ++k) {
    long r = k;
    for (int p : ps)
      while (r % p == 0) r /= p;
    if (r == 1) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("3-smooth numbers: enumeration matches brute force") {
  const DiscreteSystem ds = system_of({{2.0, 1}, {3.0, 1}});
  const IntegerStream st = enumerate_integers(ds, std::log(1000.0));
  for (double x : {1.0, 2.0, 10.5, 100.0, 999.0, 1000.0})
    CHECK(st.count(std::log(x) + 1e-12) == smooth_count({2, 3}, x));
  // {1, 2, 3, 4, 6, 8, 9} lie below 10.5.
  CHECK(st.count(std::log(10.5)) == 7);
  CHECK(st.collisions == 0);
  CHECK_THROWS_AS(st.count(std::log(2000.0)), Error);
}

TEST_CASE("multiplicity two of a single prime gives j + 1 integers at p^j") {
  const DiscreteSystem ds = system_of({{2.0, 2}});
  const IntegerStream st = enumerate_integers(ds, std::log(1025.0));
  REQUIRE(st.entries.size() == 11);
  for (int j = 0; j <= 10; ++j) {
    CHECK(st.entries[j].logvalue == doctest::Approx(j * std::log(2.0)));
    CHECK(st.entries[j].multiplicity == j + 1);
  }
  CHECK(st.total == 66);
}

TEST_CASE("coincident products are merged into one entry") {
  // 4 is a prime here and also 2 * 2.
  const DiscreteSystem ds = system_of({{2.0, 1}, {4.0, 1}});
  const IntegerStream st = enumerate_integers(ds, std::log(16.5));
  std::map<long, long> mult;
  for (const auto& e : st.entries) mult[std::lround(std::exp(e.logvalue))] = e.multiplicity;
  CHECK(mult[4] == 2);   // 2^2, 4
  CHECK(mult[8] == 2);   // 2^3, 2*4
  CHECK(mult[16] == 3);  // 2^4, 2^2*4, 4^2
  CHECK(st.collisions > 0);
}

TEST_CASE("counting functions of the ordinary primes up to 7 at x = 30") {
  const DiscreteSystem ds = system_of({{2.0, 1}, {3.0, 1}, {5.0, 1}, {7.0, 1}});
  const double x = 30.5;
  const IntegerStream st = enumerate_integers(ds, std::log(x));
  const CountingValues v = counting_functions(ds, st, std::log(x));
  double psi = 0.0, Pi = 0.0;
  for (int p : {2, 3, 5, 7})
    for (int nu = 1; std::pow(p, nu) <= x; ++nu) {
      psi += std::log(p);
      Pi += 1.0 / nu;
    }
  CHECK(v.N == smooth_count({2, 3, 5, 7}, x));
  CHECK(v.psi == doctest::Approx(psi).epsilon(1e-13));
  CHECK(v.Pi == doctest::Approx(Pi).epsilon(1e-13));
  CHECK(ds.prime_count(std::log(x)) == 4);
}

TEST_CASE("the adjoined prime q enters the generators with multiplicity l") {
  DiscreteSystem ds = system_of({{2.0, 1}});
  ds.special = SpecialPrime{25.5, 2};
  const auto g = ds.generator_logs();
  REQUIRE(g.size() == 3);
  CHECK(g[1] == doctest::Approx(std::log(25.5)));
  CHECK(g[2] == doctest::Approx(std::log(25.5)));
}

TEST_CASE("validation and JSON round trip") {
  CHECK_THROWS_AS(system_of({{3.0, 1}, {2.0, 1}}).validate(), Error);
  CHECK_THROWS_AS(system_of({{1.0, 1}}).validate(), Error);
  CHECK_THROWS_AS(system_of({{2.0, 0}}).validate(), Error);
  const DiscreteSystem ds = random_small_system(3, 1, 8);
  const DiscreteSystem back = DiscreteSystem::from_json(ds.to_json());
  CHECK(back.to_json().dump() == ds.to_json().dump());
  CHECK_THROWS_AS(enumerate_integers(ds, -1.0), Error);
}

TEST_CASE("enumeration budget truncates") {
  EnumerateOptions opt;
  opt.max_count = 50;
  const IntegerStream st = enumerate_integers(system_of({{1.01, 1}}), std::log(1e6), opt);
  CHECK(st.truncated);
}

TEST_CASE("stream CSV lists cumulative counts") {
  const IntegerStream st = enumerate_integers(system_of({{2.0, 1}}), std::log(8.5));
  const std::string csv = st.to_csv();
  CHECK(csv.rfind("logvalue,cumulative_N\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
