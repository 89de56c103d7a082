#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "beurling/config.hpp"

using namespace beurling;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("beurling_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + BEURLING_LAB_BIN + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kToy = std::string(BEURLING_SOURCE_DIR) + "/tools/toy_config.json";

}  // namespace

TEST_CASE("FNV-1a 64 reference vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("config schema rejects unknown keys and wrong types") {
  CHECK_THROWS_AS(check_config_schema({{"tolerance", 1e-9}}), Error);
  CHECK_THROWS_AS(check_config_schema({{"tol", "small"}}), Error);
  CHECK_THROWS_AS(check_config_schema({{"K", 1.5}}), Error);
  CHECK_THROWS_AS(check_config_schema({{"perron", {{"loop_y", 3}}}}), Error);
  CHECK_THROWS_AS(check_config_schema({{"stages", {{"zeta", 1}}}}), Error);
  CHECK_NOTHROW(check_config_schema({{"tol", 1e-6}, {"stages", {{"zeta", false}}}}));
  CHECK_THROWS_AS(RunConfig::from_json({{"tol", 2.0}}), Error);
  CHECK_THROWS_AS(RunConfig::from_json({{"K", 5}}), Error);
}

TEST_CASE("config round trip; the hash ignores the output directory") {
  RunConfig a = load_config(kToy);
  const RunConfig b = RunConfig::from_json(a.to_json());
  CHECK(b.to_json() == a.to_json());
  CHECK(b.hash() == a.hash());
  RunConfig c = a;
  c.out_dir = "elsewhere";
  CHECK(c.hash() == a.hash());
  c.seed = 99;
  CHECK(c.hash() != a.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("construct writes artifacts and a manifest, byte-identical across runs") {
  const fs::path d1 = scratch("c1"), d2 = scratch("c2");
  REQUIRE(run("construct --config " + kToy + " --out " + d1.string()) == 0);
  REQUIRE(run("construct --config " + kToy + " --out " + d2.string()) == 0);
  for (const char* f : {"sequences.json", "construction.json", "pnt_defect.csv", "manifest.json"}) {
    CHECK(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  const auto m = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  CHECK(m.at("commands").contains("construct"));
  CHECK(m.contains("versions"));
}

TEST_CASE("errors exit with status 2") {
  const fs::path d = scratch("err");
  CHECK(run("zeta --config " + kToy + " --out " + d.string()) == 2);   // no sequences.json yet
  CHECK(run("count --config " + kToy + " --out " + d.string()) == 2);  // no primes file
  const fs::path bad = d / "bad.json";
  fs::create_directories(d);
  std::ofstream(bad) << R"({"tol": 1e-9, "colour": "red"})";
  CHECK(run("construct --config " + bad.string() + " --out " + d.string()) == 2);
  CHECK(run("construct --config " + kToy + " --out " + d.string(), "BEURLING_LAB_THREADS=0") == 2);
  CHECK(run("construct --config " + kToy + " --out " + d.string(), "BEURLING_LAB_THREADS=two") == 2);
  CHECK(run("construct --config " + kToy + " --mode fast --out " + d.string()) != 0);
  CHECK(run("construct --config " + kToy + " --out " + d.string(), "BEURLING_LAB_THREADS=3") == 0);
  const auto m = nlohmann::json::parse(slurp(d / "manifest.json"));
  CHECK(m.at("commands").at("construct").at("thread_cap") == 3);
}

TEST_CASE("verify passes on the toy configuration") {
  const fs::path d = scratch("verify");
  CHECK(run("verify --config " + kToy + " --out " + d.string()) == 0);
  const auto v = nlohmann::json::parse(slurp(d / "verify.json"));
  CHECK(v.at("ok") == true);
}
