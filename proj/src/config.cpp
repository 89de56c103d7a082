#include "beurling/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>

#include "beurling/common.hpp"

namespace beurling {

namespace {

using json = nlohmann::json;

enum class Kind { Number, Integer, Boolean, String, Object };

struct Field {
  Kind kind;
  const std::map<std::string, Field>* children = nullptr;
};

const std::map<std::string, Field>& growth_schema() {
  static const std::map<std::string, Field> s = {{"f_coef", {Kind::Number}},  {"f_pow", {Kind::Number}},
                                                 {"g_const", {Kind::Number}}, {"g_slope", {Kind::Number}},
                                                 {"x_margin", {Kind::Number}}};
  return s;
}

const std::map<std::string, Field>& params_schema() {
  static const std::map<std::string, Field> s = {
      {"alpha", {Kind::Number}},      {"c", {Kind::Number}},
      {"mode", {Kind::String}},       {"K_max", {Kind::Integer}},
      {"seed_logB0", {Kind::Number}}, {"precision_digits", {Kind::Integer}},
      {"growth", {Kind::Object, &growth_schema()}}};
  return s;
}

const std::map<std::string, Field>& stages_schema() {
  static const std::map<std::string, Field> s = {
      {"construct", {Kind::Boolean}}, {"zeta", {Kind::Boolean}},  {"saddle", {Kind::Boolean}},
      {"perron", {Kind::Boolean}},    {"discretize", {Kind::Boolean}}, {"count", {Kind::Boolean}},
      {"report", {Kind::Boolean}}};
  return s;
}

const std::map<std::string, Field>& perron_schema() {
  static const std::map<std::string, Field> s = {
      {"scan_T2", {Kind::Boolean}}, {"b", {Kind::Number}},          {"D_hat", {Kind::Number}},
      {"loop_x", {Kind::Number}},   {"loop_kappa", {Kind::Number}}, {"loop_T", {Kind::Number}}};
  return s;
}

const std::map<std::string, Field>& discretize_schema() {
  static const std::map<std::string, Field> s = {
      {"seed_logB0", {Kind::Number}}, {"target", {Kind::String}},    {"exp_samples", {Kind::Integer}},
      {"exp_t_max", {Kind::Number}},  {"gap_t_max", {Kind::Number}}, {"table_step", {Kind::Number}}};
  return s;
}

const std::map<std::string, Field>& root_schema() {
  static const std::map<std::string, Field> s = {
      {"params", {Kind::Object, &params_schema()}},
      {"tol", {Kind::Number}},
      {"seed", {Kind::Integer}},
      {"K", {Kind::Integer}},
      {"track", {Kind::String}},
      {"out_dir", {Kind::String}},
      {"primes_path", {Kind::String}},
      {"stages", {Kind::Object, &stages_schema()}},
      {"perron", {Kind::Object, &perron_schema()}},
      {"discretize", {Kind::Object, &discretize_schema()}},
      {"count_budget", {Kind::Integer}}};
  return s;
}

bool kind_ok(Kind k, const json& v) {
  switch (k) {
    case Kind::Number: return v.is_number();
    case Kind::Integer: return v.is_number_integer();
    case Kind::Boolean: return v.is_boolean();
    case Kind::String: return v.is_string();
    case Kind::Object: return v.is_object();
  }
  return false;
}

void check_object(const json& j, const std::map<std::string, Field>& schema, const std::string& prefix) {
  if (!j.is_object()) throw Error("config: " + (prefix.empty() ? std::string("root") : prefix) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    auto it = schema.find(key);
    if (it == schema.end()) throw Error("config: unknown key " + path);
    if (!kind_ok(it->second.kind, value)) throw Error("config: wrong type for " + path);
    if (it->second.children) check_object(value, *it->second.children, path);
  }
}

}  // namespace

void check_config_schema(const json& j) { check_object(j, root_schema(), ""); }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void RunConfig::validate() const {
  params.validate();
  require(tol > 0 && tol < 1, "config: tol must lie in (0, 1)");
  require(K >= 0 && K <= params.K_max, "config: K must lie in [0, K_max]");
  require(!out_dir.empty(), "config: out_dir is empty");
  require(perron.loop_x > 1, "config: perron.loop_x must exceed 1");
  require(perron.loop_kappa > 1, "config: perron.loop_kappa must exceed 1");
  require(perron.loop_T > 1, "config: perron.loop_T must exceed 1");
  require(perron.D_hat >= 0, "config: perron.D_hat must be >= 0");
  require(discretize.seed_logB0 > 1 && discretize.seed_logB0 <= 6,
          "config: discretize.seed_logB0 must lie in (1, 6] (pi_C is tabulated cell by cell)");
  require(discretize.exp_samples > 0, "config: discretize.exp_samples must be positive");
  require(discretize.exp_t_max > 0 && discretize.gap_t_max > 0, "config: discretize t ranges must be positive");
  require(discretize.table_step > 0 && discretize.table_step <= 0.1, "config: discretize.table_step out of range");
  require(count_budget > 0, "config: count_budget must be positive");
}

json RunConfig::to_json() const {
  return {{"params", params.to_json()},
          {"tol", tol},
          {"seed", seed},
          {"K", K},
          {"track", track_name(track)},
          {"out_dir", out_dir},
          {"primes_path", primes_path},
          {"stages",
           {{"construct", stages.construct},
            {"zeta", stages.zeta},
            {"saddle", stages.saddle},
            {"perron", stages.perron},
            {"discretize", stages.discretize},
            {"count", stages.count},
            {"report", stages.report}}},
          {"perron",
           {{"scan_T2", perron.scan_T2},
            {"b", perron.b},
            {"D_hat", perron.D_hat},
            {"loop_x", perron.loop_x},
            {"loop_kappa", perron.loop_kappa},
            {"loop_T", perron.loop_T}}},
          {"discretize",
           {{"seed_logB0", discretize.seed_logB0},
            {"target", target_name(discretize.target)},
            {"exp_samples", discretize.exp_samples},
            {"exp_t_max", discretize.exp_t_max},
            {"gap_t_max", discretize.gap_t_max},
            {"table_step", discretize.table_step}}},
          {"count_budget", count_budget}};
}

RunConfig RunConfig::from_json(const json& j) {
  check_config_schema(j);
  RunConfig r;
  if (j.contains("params")) r.params = ParamSet::from_json(j["params"]);
  r.tol = j.value("tol", r.tol);
  if (j.contains("seed")) {
    require(j["seed"].get<long long>() >= 0, "config: seed must be >= 0");
    r.seed = j["seed"].get<std::uint64_t>();
  }
  r.K = j.value("K", r.K);
  if (j.contains("track")) r.track = track_from_name(j["track"].get<std::string>());
  r.out_dir = j.value("out_dir", r.out_dir);
  r.primes_path = j.value("primes_path", r.primes_path);
  if (j.contains("stages")) {
    const auto& s = j["stages"];
    r.stages.construct = s.value("construct", r.stages.construct);
    r.stages.zeta = s.value("zeta", r.stages.zeta);
    r.stages.saddle = s.value("saddle", r.stages.saddle);
    r.stages.perron = s.value("perron", r.stages.perron);
    r.stages.discretize = s.value("discretize", r.stages.discretize);
    r.stages.count = s.value("count", r.stages.count);
    r.stages.report = s.value("report", r.stages.report);
  }
  if (j.contains("perron")) {
    const auto& p = j["perron"];
    r.perron.scan_T2 = p.value("scan_T2", r.perron.scan_T2);
    r.perron.b = p.value("b", r.perron.b);
    r.perron.D_hat = p.value("D_hat", r.perron.D_hat);
    r.perron.loop_x = p.value("loop_x", r.perron.loop_x);
    r.perron.loop_kappa = p.value("loop_kappa", r.perron.loop_kappa);
    r.perron.loop_T = p.value("loop_T", r.perron.loop_T);
  }
  if (j.contains("discretize")) {
    const auto& d = j["discretize"];
    r.discretize.seed_logB0 = d.value("seed_logB0", r.discretize.seed_logB0);
    if (d.contains("target")) r.discretize.target = target_from_name(d["target"].get<std::string>());
    r.discretize.exp_samples = d.value("exp_samples", r.discretize.exp_samples);
    r.discretize.exp_t_max = d.value("exp_t_max", r.discretize.exp_t_max);
    r.discretize.gap_t_max = d.value("gap_t_max", r.discretize.gap_t_max);
    r.discretize.table_step = d.value("table_step", r.discretize.table_step);
  }
  r.count_budget = j.value("count_budget", r.count_budget);
  r.validate();
  return r;
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("out_dir");
  return fnv1a_hex(j.dump());
}

std::string RunConfig::primes_file() const {
  return primes_path.empty() ? out_dir + "/primes.json" : primes_path;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error("config: " + path + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

}  // namespace beurling
