// beurling_lab: batch front-end over the construction, analysis and
// discretization stages. Every command writes into --out and updates
// manifest.json there.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "beurling/pipeline.hpp"

using namespace beurling;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha, c, tol;
  std::optional<std::string> mode, track;
  std::optional<int> K;
};

RunConfig resolve(const Overrides& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw Error("config: cannot open " + o.config_path);
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("config: " + o.config_path + ": " + e.what());
    }
    check_config_schema(j);
  }
  // Flags are merged into the JSON so that a single validation pass covers both.
  if (o.out) j["out_dir"] = *o.out;
  if (o.seed) j["seed"] = *o.seed;
  if (o.tol) j["tol"] = *o.tol;
  if (o.track) j["track"] = *o.track;
  if (o.K) {
    j["K"] = *o.K;
    int km = j.contains("params") ? j["params"].value("K_max", 1) : 1;
    if (*o.K > km) j["params"]["K_max"] = *o.K;
  }
  if (o.alpha) j["params"]["alpha"] = *o.alpha;
  if (o.c) j["params"]["c"] = *o.c;
  if (o.mode) j["params"]["mode"] = *o.mode;
  return RunConfig::from_json(j);
}

int thread_cap() {
  const char* env = std::getenv("BEURLING_LAB_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) throw Error("BEURLING_LAB_THREADS must be a positive integer");
  // Stages run serially, so any cap >= 1 is honored; it is recorded in the manifest.
  return static_cast<int>(v);
}

void print_summary(const std::vector<StageOutput>& outs) {
  for (const auto& o : outs) {
    std::cout << o.stage;
    if (!o.summary.is_null()) std::cout << ' ' << o.summary.dump();
    std::cout << '\n';
    for (const auto& f : o.files) std::cout << "  " << f.name << ' ' << f.hash << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized prime systems with large oscillation: construction, analysis, discretization"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--alpha", o.alpha, "exponent alpha in (0, 1]");
  app.add_option("--c", o.c, "constant c > 0");
  app.add_option("--mode", o.mode, "strict or toy")->check(CLI::IsMember({"strict", "toy"}));
  app.add_option("--K", o.K, "truncation row")->check(CLI::NonNegativeNumber);
  app.add_option("--track", o.track, "continuous or discrete")->check(CLI::IsMember({"continuous", "discrete"}));
  app.add_option("--tol", o.tol, "quadrature tolerance");

  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"construct", "solve the sequences and check the construction invariants"},
      {"zeta", "residue, density and log zeta samples near 1 + i tau_K"},
      {"saddle", "certified saddles and steepest paths"},
      {"perron", "shifted contour bounds and the closed-loop Cauchy check"},
      {"discretize", "sample a discrete system from pi_C"},
      {"count", "enumerate generalized integers of the sampled system"},
      {"verify", "run the invariant suite; nonzero exit on failure"},
      {"report", "summarize the artifacts in the output directory"},
      {"run", "all stages enabled in the configuration, in order"}};
  for (const auto& [name, help] : cmds) app.add_subcommand(name, help)->callback([&chosen, n = name] { chosen = n; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const int threads = thread_cap();
    Pipeline p(resolve(o));
    std::vector<StageOutput> outs;
    if (chosen == "verify") {
      const VerifyReport rep = p.verify();
      StageOutput v{"verify", {}, {}};
      for (const auto& c : rep.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.suite << ": " << c.name << " (" << c.detail << ")\n";
      const std::string bytes = rep.to_json().dump(1) + "\n";
      {
        std::ofstream os(std::filesystem::path(p.config().out_dir) / "verify.json", std::ios::binary);
        os << bytes;
      }
      v.files.push_back({"verify.json", fnv1a_hex(bytes)});
      outs.push_back(v);
      p.write_manifest(chosen, outs, threads);
      return rep.ok() ? 0 : 1;
    }
    if (chosen == "construct") outs.push_back(p.construct());
    else if (chosen == "zeta") outs.push_back(p.zeta());
    else if (chosen == "saddle") outs.push_back(p.saddle());
    else if (chosen == "perron") outs.push_back(p.perron());
    else if (chosen == "discretize") outs.push_back(p.discretize());
    else if (chosen == "count") outs.push_back(p.count());
    else if (chosen == "report") outs.push_back(p.report());
    else if (chosen == "run") outs = p.run_enabled();
    p.write_manifest(chosen, outs, threads);
    print_summary(outs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
