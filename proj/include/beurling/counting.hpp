#pragma once

// Discrete generalized prime systems and exact enumeration of their
// generalized integers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "beurling/measures.hpp"

namespace beurling {

struct DiscretePrime {
  double value;
  int multiplicity = 1;
};

// Extra prime adjoined with multiplicity l (phase correction).
struct SpecialPrime {
  double q;
  int l;
};

struct DiscreteSystem {
  std::vector<DiscretePrime> primes;
  std::optional<SpecialPrime> special;
  std::uint64_t rng_seed = 0;

  void validate() const;
  // One log-value per generator instance (multiplicities expanded), sorted.
  std::vector<double> generator_logs() const;
  // Number of primes (counted with multiplicity) not exceeding e^logx.
  double prime_count(double logx) const;
  // Atoms (1/nu) at nu*log p for every prime power up to e^log_xmax.
  HalfLineMeasure riemann_measure(double log_xmax) const;

  nlohmann::json to_json() const;
  static DiscreteSystem from_json(const nlohmann::json& j);
};

struct IntegerEntry {
  double logvalue;
  long multiplicity;
};

struct IntegerStream {
  std::vector<IntegerEntry> entries;
  double log_xmax = 0.0;
  bool truncated = false;
  // Groups that merged products of different multisets within tolerance.
  long collisions = 0;
  long total = 0;
  double merge_tol = kLogCollisionTol;

  // N(e^logx); throws if logx lies beyond the enumerated range.
  long count(double logx) const;
  std::string to_csv() const;
};

struct EnumerateOptions {
  long max_count = 20000000;
  double merge_tol = kLogCollisionTol;
};

IntegerStream enumerate_integers(const DiscreteSystem& ds, double log_xmax,
                                 const EnumerateOptions& opt = {});

struct CountingValues {
  double N;
  double psi;
  double Pi;
};

CountingValues counting_functions(const DiscreteSystem& ds, const IntegerStream& stream,
                                  double logx);

}  // namespace beurling
