#include "beurling/counting.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include "beurling/rng.hpp"

namespace beurling {

void DiscreteSystem::validate() const {
  for (std::size_t i = 0; i < primes.size(); ++i) {
    if (!(primes[i].value > 1.0)) throw Error("discrete prime must exceed 1");
    if (primes[i].multiplicity < 1) throw Error("prime multiplicity must be positive");
    if (i > 0 && primes[i].value < primes[i - 1].value) throw Error("primes must be sorted");
  }
  if (special) {
    if (!(special->q > 1.0)) throw Error("special prime must exceed 1");
    if (special->l < 0) throw Error("special multiplicity must be non-negative");
  }
}

std::vector<double> DiscreteSystem::generator_logs() const {
  std::vector<double> g;
  for (const auto& p : primes)
    for (int i = 0; i < p.multiplicity; ++i) g.push_back(std::log(p.value));
  if (special)
    for (int i = 0; i < special->l; ++i) g.push_back(std::log(special->q));
  std::sort(g.begin(), g.end());
  return g;
}

double DiscreteSystem::prime_count(double logx) const {
  double n = 0.0;
  for (const auto& p : primes) {
    if (std::log(p.value) > logx + kLogCollisionTol) break;
    n += p.multiplicity;
  }
  if (special && std::log(special->q) <= logx + kLogCollisionTol) n += special->l;
  return n;
}

HalfLineMeasure DiscreteSystem::riemann_measure(double log_xmax) const {
  std::vector<Atom> atoms;
  auto add_powers = [&](double value, double weight) {
    const double lp = std::log(value);
    for (int nu = 1; nu * lp <= log_xmax + kLogCollisionTol; ++nu) atoms.push_back({nu * lp, weight / nu});
  };
  for (const auto& p : primes) add_powers(p.value, p.multiplicity);
  if (special && special->l > 0) add_powers(special->q, special->l);
  return HalfLineMeasure::from_atoms(std::move(atoms));
}

nlohmann::json DiscreteSystem::to_json() const {
  nlohmann::json j;
  j["rng_algorithm"] = kRngAlgorithm;
  j["rng_seed"] = rng_seed;
  j["primes"] = nlohmann::json::array();
  for (const auto& p : primes) j["primes"].push_back({p.value, p.multiplicity});
  if (special) j["special"] = {{"q", special->q}, {"l", special->l}};
  return j;
}

DiscreteSystem DiscreteSystem::from_json(const nlohmann::json& j) {
  DiscreteSystem ds;
  ds.rng_seed = j.value("rng_seed", std::uint64_t{0});
  for (const auto& p : j.at("primes")) ds.primes.push_back({p.at(0).get<double>(), p.at(1).get<int>()});
  if (j.contains("special")) ds.special = SpecialPrime{j["special"].at("q").get<double>(), j["special"].at("l").get<int>()};
  ds.validate();
  return ds;
}

long IntegerStream::count(double logx) const {
  if (logx > log_xmax + merge_tol) throw Error("count: x beyond the enumerated range");
  auto it = std::upper_bound(entries.begin(), entries.end(), logx + kLogCollisionTol,
                             [](double v, const IntegerEntry& e) { return v < e.logvalue; });
  long n = 0;
  for (auto e = entries.begin(); e != it; ++e) n += e->multiplicity;
  return n;
}

std::string IntegerStream::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "logvalue,cumulative_N\n";
  long n = 0;
  for (const auto& e : entries) {
    n += e.multiplicity;
    os << e.logvalue << ',' << n << '\n';
  }
  return os.str();
}

IntegerStream enumerate_integers(const DiscreteSystem& ds, double log_xmax, const EnumerateOptions& opt) {
  if (log_xmax < 0) throw Error("enumerate_integers: x_max must be >= 1");
  ds.validate();
  const std::vector<double> g = ds.generator_logs();
  IntegerStream out;
  out.log_xmax = log_xmax;
  out.merge_tol = opt.merge_tol;

  struct Node {
    double v;
    std::size_t j;
    double parent;
    std::uint64_t hash;
    std::uint64_t parent_hash;
    bool operator>(const Node& o) const { return v > o.v; }
  };
  auto gen_hash = [](std::size_t j) { return splitmix_mix(0x51ed27ULL + j); };

  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> heap;
  const double cap = log_xmax + opt.merge_tol;
  if (!g.empty() && g[0] <= cap) heap.push({g[0], 0, 0.0, gen_hash(0), 0});

  // Current merge group.
  double anchor = 0.0;
  std::set<std::uint64_t> group_hashes{0};
  out.entries.push_back({0.0, 1});
  out.total = 1;
  auto close_group = [&]() {
    if (group_hashes.size() > 1) ++out.collisions;
  };

  while (!heap.empty()) {
    if (out.total >= opt.max_count) {
      out.truncated = true;
      break;
    }
    Node n = heap.top();
    heap.pop();
    if (n.v - anchor <= opt.merge_tol) {
      out.entries.back().multiplicity += 1;
      group_hashes.insert(n.hash);
    } else {
      close_group();
      out.entries.push_back({n.v, 1});
      anchor = n.v;
      group_hashes = {n.hash};
    }
    ++out.total;
    // Append the same generator again.
    if (n.v + g[n.j] <= cap) heap.push({n.v + g[n.j], n.j, n.v, n.hash + gen_hash(n.j), n.hash});
    // Replace the last generator by the next one.
    if (n.j + 1 < g.size() && n.parent + g[n.j + 1] <= cap)
      heap.push({n.parent + g[n.j + 1], n.j + 1, n.parent, n.parent_hash + gen_hash(n.j + 1), n.parent_hash});
  }
  close_group();
  if (out.truncated) out.log_xmax = out.entries.back().logvalue;
  return out;
}

CountingValues counting_functions(const DiscreteSystem& ds, const IntegerStream& stream, double logx) {
  if (logx < 0) throw Error("counting_functions: x must be >= 1");
  CountingValues cv{0.0, 0.0, 0.0};
  cv.N = static_cast<double>(stream.count(logx));
  auto add = [&](double value, double weight) {
    const double lp = std::log(value);
    for (int nu = 1; nu * lp <= logx + kLogCollisionTol; ++nu) {
      cv.Pi += weight / nu;
      cv.psi += weight * lp;
    }
  };
  for (const auto& p : ds.primes) {
    if (std::log(p.value) > logx + kLogCollisionTol) break;
    add(p.value, p.multiplicity);
  }
  if (ds.special && ds.special->l > 0) add(ds.special->q, ds.special->l);
  return cv;
}

}  // namespace beurling
