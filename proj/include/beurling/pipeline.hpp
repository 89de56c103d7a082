#pragma once

// Stage runners behind the command-line front-end. Each stage writes its
// artifacts into the configured output directory and records them so that a
// manifest can be written afterwards.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "beurling/config.hpp"
#include "beurling/counting.hpp"

namespace beurling {

struct ArtifactFile {
  std::string name;
  std::string hash;  // fnv1a of the bytes written
};

struct StageOutput {
  std::string stage;
  std::vector<ArtifactFile> files;
  nlohmann::json summary;
};

struct ConstructionChecks {
  int psi_points = 0;
  int psi_violations = 0;
  double psi_min_margin = 0.0;     // min of psi' - (1/2)(1 - 1/x)
  double max_continuity = 0.0;     // |R_k(B_k) - R_k(B_k) closed form| / R_k(B_k)
  double max_S_at_C = 0.0;         // |S_k(C_k)| / R_k(B_k)
  double max_lattice = 0.0;
  double max_phase = 0.0;
  double max_C_residual = 0.0;
  nlohmann::json to_json() const;
};

ConstructionChecks check_construction(const Construction& c, int points, std::uint64_t seed);

// Random system with at most max_primes primes (sorted), for oracle tests.
DiscreteSystem random_small_system(std::uint64_t seed, std::uint64_t index, int max_primes);

struct ExpStarCheck {
  int systems = 0;
  long probes = 0;
  long mismatches = 0;
  double max_abs_diff = 0.0;
};

// Compares exp* of the Riemann measure with heap enumeration at every
// generalized integer and just below it.
ExpStarCheck check_exp_star(std::uint64_t seed, int systems, double x_max);

struct WedgeFuzz {
  int trials = 0;
  int violations = 0;
  double min_slack = 0.0;  // min of rho - cos(omega) int |F|, relative
};

WedgeFuzz fuzz_wedge(std::uint64_t seed, int trials);

struct CheckResult {
  std::string suite;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  nlohmann::json to_json() const;
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }

  StageOutput construct();
  StageOutput zeta();
  StageOutput saddle();
  StageOutput perron();
  StageOutput discretize();
  StageOutput count();
  StageOutput report();
  // Enabled stages in pipeline order.
  std::vector<StageOutput> run_enabled();
  VerifyReport verify();

  // manifest.json keeps one entry per command that has run in out_dir.
  void write_manifest(const std::string& command, const std::vector<StageOutput>& outputs,
                      int threads) const;

 private:
  const Construction& construction();
  const Construction& discrete_construction();
  void require_artifact(const std::string& name, const std::string& stage) const;
  void emit(StageOutput& out, const std::string& name, const std::string& bytes) const;
  void emit_json(StageOutput& out, const std::string& name, const nlohmann::json& j) const;
  nlohmann::json read_json(const std::string& name) const;

  RunConfig cfg_;
  std::unique_ptr<Construction> c_;
  std::unique_ptr<Construction> cd_;
};

nlohmann::json version_info();

}  // namespace beurling
