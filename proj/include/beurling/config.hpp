#pragma once

// Run configuration for the batch front-end: parameters, tolerances, seed,
// stage toggles and output location. Loaded from JSON, validated against a
// fixed schema, then overridden by command-line flags.

#include <cstdint>
#include <string>

#include "json.hpp"
#include "beurling/construction.hpp"
#include "beurling/contour.hpp"
#include "beurling/discretize.hpp"

namespace beurling {

struct StageToggles {
  bool construct = true;
  bool zeta = true;
  bool saddle = true;
  bool perron = true;
  bool discretize = true;
  bool count = true;
  bool report = true;
};

struct PerronConfig {
  bool scan_T2 = true;   // false keeps T2 = tau +- exp((log B)^{alpha/2})
  double b = 0.0;        // <= 0 selects alpha/(alpha+1) + 0.05
  double D_hat = 1.0;    // discrete track only
  double loop_x = 1000.0;
  double loop_kappa = 1.5;
  double loop_T = 1e4;
};

struct DiscretizeConfig {
  double seed_logB0 = 4.0;  // separate, much smaller table: pi_C is tabulated up to A_{K+1}
  SampleTarget target = SampleTarget::PiC;
  int exp_samples = 50;
  double exp_t_max = 1e6;
  double gap_t_max = 1e3;
  double table_step = 1e-3;
};

struct RunConfig {
  ParamSet params;
  double tol = 1e-9;
  std::uint64_t seed = 1;
  int K = 0;
  Track track = Track::Continuous;
  std::string out_dir = "out";
  std::string primes_path;  // empty: <out_dir>/primes.json
  StageToggles stages;
  PerronConfig perron;
  DiscretizeConfig discretize;
  long count_budget = 20000000;

  void validate() const;
  nlohmann::json to_json() const;
  // Checks j against the schema first; missing keys keep their defaults.
  static RunConfig from_json(const nlohmann::json& j);
  // FNV-1a 64 of the canonical dump without out_dir, as 16 hex digits.
  std::string hash() const;
  std::string primes_file() const;
};

RunConfig load_config(const std::string& path);

// Throws Error naming the first offending key.
void check_config_schema(const nlohmann::json& j);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace beurling
