#include "beurling/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "beurling/quadrature.hpp"

namespace beurling {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (1 - e^{-l}) / l, continuous at l = 0.
double one_minus_inv_over_log(double l) {
  if (std::abs(l) < 1e-8) return 1.0 - 0.5 * l;
  return -std::expm1(-l) / l;
}

double grid_cumulative(const std::vector<double>& p, double l) {
  const std::size_t n = p.size() / 2;
  if (n == 0 || l <= p[0]) return 0.0;
  if (l >= p[2 * (n - 1)]) return p[2 * (n - 1) + 1];
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (p[2 * mid] <= l) lo = mid; else hi = mid;
  }
  const double l0 = p[2 * lo], l1 = p[2 * hi];
  const double c0 = p[2 * lo + 1], c1 = p[2 * hi + 1];
  const double frac = std::expm1(l - l0) / std::expm1(l1 - l0);
  return c0 + (c1 - c0) * frac;
}

double grid_density(const std::vector<double>& p, double l) {
  const std::size_t n = p.size() / 2;
  if (n < 2 || l < p[0] || l >= p[2 * (n - 1)]) return 0.0;
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    std::size_t mid = (lo + hi) / 2;
    if (p[2 * mid] <= l) lo = mid; else hi = mid;
  }
  const double l0 = p[2 * lo], l1 = p[2 * hi];
  return (p[2 * hi + 1] - p[2 * lo + 1]) / (std::exp(l0) * std::expm1(l1 - l0));
}

double main_weight(const DensityPiece& pc) {
  if (pc.tag == PieceTag::RDeviation) return pc.params.size() > 3 ? pc.params[3] : 0.0;
  if (pc.tag == PieceTag::SDeviation) return pc.params.empty() ? 0.0 : pc.params[0];
  return 0.0;
}

// Base density w.r.t. dv at v = e^l, before the 1/l^p factor.
double base_density(const DensityPiece& pc, double l) {
  switch (pc.tag) {
    case PieceTag::MainTerm:
      return -std::expm1(-l);
    case PieceTag::LiTail:
      return one_minus_inv_over_log(l);
    case PieceTag::RDeviation: {
      const double tau = pc.params.at(0), ph = pc.params.at(1), lref = pc.params.at(2);
      return -std::expm1(-l) * (main_weight(pc) + 0.5 * std::cos(tau * (l - lref) + ph));
    }
    case PieceTag::SDeviation:
      return -std::expm1(-l) * (main_weight(pc) - 0.5);
    case PieceTag::Grid:
      return grid_density(pc.params, l);
  }
  return 0.0;
}

double base_with_power(const DensityPiece& pc, double l) {
  double d = base_density(pc, l);
  if (pc.log_power > 0) d /= std::pow(l, pc.log_power);
  return d;
}

// int (1 - 1/v) dv over [e^va, e^vh].
double main_mass(double va, double vh) { return std::exp(va) * std::expm1(vh - va) - (vh - va); }

// Mass of the unscaled base on [e^va, e^vh] in v-coordinates.
double base_mass(const DensityPiece& pc, double va, double vh, double tol) {
  if (vh <= va) return 0.0;
  if (pc.log_power == 0) {
    switch (pc.tag) {
      case PieceTag::MainTerm:
        return main_mass(va, vh);
      case PieceTag::SDeviation:
        return (main_weight(pc) - 0.5) * main_mass(va, vh);
      case PieceTag::LiTail:
        return Li_diff(va, vh);
      case PieceTag::Grid:
        return grid_cumulative(pc.params, vh) - grid_cumulative(pc.params, va);
      case PieceTag::RDeviation: {
        const double tau = pc.params.at(0), ph = pc.params.at(1), lref = pc.params.at(2);
        auto prim = [&](double l) {
          const double th = tau * (l - lref) + ph;
          double v = std::exp(l) * (std::cos(th) + tau * std::sin(th)) / (1.0 + tau * tau);
          v -= (tau == 0.0) ? l * std::cos(th) : std::sin(th) / tau;
          return 0.5 * v;
        };
        return prim(vh) - prim(va) + main_weight(pc) * main_mass(va, vh);
      }
    }
  }
  auto f = [&](double l) { return base_with_power(pc, l) * std::exp(l); };
  int pieces = 1;
  if (pc.tag == PieceTag::RDeviation) {
    pieces = std::max(1, static_cast<int>(std::abs(pc.params.at(0)) * (vh - va) / kPi));
    pieces = std::min(pieces, 200000);
  }
  auto r = gauss_kronrod(f, va, vh, tol, 1e-13, std::max(4000, 4 * pieces), pieces);
  if (!r.converged && r.error > 1e3 * tol) throw Error("density piece mass quadrature did not converge");
  return r.value;
}

std::vector<double> build_grid(const std::function<double(double)>& G, double lo, double hi,
                               double tol, int max_nodes) {
  struct Node {
    double l, c;
  };
  std::map<double, double> nodes;
  const double g0 = G(lo);
  const int n0 = 17;
  for (int i = 0; i <= n0; ++i) {
    const double l = lo + (hi - lo) * i / n0;
    nodes[l] = (i == 0) ? 0.0 : G(l) - g0;
  }
  bool refined = true;
  while (refined && static_cast<int>(nodes.size()) < max_nodes) {
    refined = false;
    std::vector<Node> add;
    auto it = nodes.begin();
    auto nx = std::next(it);
    for (; nx != nodes.end(); ++it, ++nx) {
      const double l0 = it->first, l1 = nx->first;
      if (l1 - l0 < 1e-12) continue;
      const double m = 0.5 * (l0 + l1);
      const double gm = G(m) - g0;
      const double frac = std::expm1(m - l0) / std::expm1(l1 - l0);
      const double interp = it->second + (nx->second - it->second) * frac;
      if (std::abs(gm - interp) > tol) add.push_back({m, gm});
      if (static_cast<int>(nodes.size() + add.size()) >= max_nodes) break;
    }
    for (const auto& n : add) nodes[n.l] = n.c;
    refined = !add.empty();
  }
  if (refined) throw Error("grid refinement exceeded the node budget before reaching tol");
  std::vector<double> params;
  params.reserve(2 * nodes.size());
  for (const auto& [l, c] : nodes) {
    params.push_back(l);
    params.push_back(c);
  }
  return params;
}

}  // namespace

std::string tag_name(PieceTag t) {
  switch (t) {
    case PieceTag::MainTerm: return "main-term";
    case PieceTag::RDeviation: return "R-deviation";
    case PieceTag::SDeviation: return "S-deviation";
    case PieceTag::LiTail: return "Li-tail";
    case PieceTag::Grid: return "grid";
  }
  return "?";
}

PieceTag tag_from_name(const std::string& s) {
  if (s == "main-term") return PieceTag::MainTerm;
  if (s == "R-deviation") return PieceTag::RDeviation;
  if (s == "S-deviation") return PieceTag::SDeviation;
  if (s == "Li-tail") return PieceTag::LiTail;
  if (s == "grid") return PieceTag::Grid;
  throw Error("unknown density tag: " + s);
}

double DensityPiece::density(double logu) const {
  if (logu < a || logu >= b) return 0.0;
  return scale * std::exp(-shift) * base_with_power(*this, logu - shift);
}

double DensityPiece::mass(double logx, double tol) const {
  const double hi = std::min(b, logx);
  if (hi <= a) return 0.0;
  return scale * base_mass(*this, a - shift, hi - shift, tol);
}

cplx DensityPiece::mellin(cplx s, double tol) const {
  const cplx pref = scale * std::exp(-shift * s);
  const double va = a - shift;
  if (std::isinf(b)) {
    if (tag != PieceTag::LiTail || log_power != 0)
      throw Error("unmet tail tolerance: infinite density piece without the Li-tail model");
    // int_{e^va}^inf v^{-s} dLi(v) = log(s/(s-1)) - int_1^{e^va} v^{-s} dLi(v)
    auto f = [&](double l) -> cplx {
      return std::exp(l * (1.0 - s)) * one_minus_inv_over_log(l);
    };
    cplx head{0.0, 0.0};
    if (va > 0) {
      auto r = gauss_kronrod(f, 0.0, va, tol * 1e-2, 1e-13, 20000,
                             std::max(1, static_cast<int>(std::abs(s.imag()) * va / kPi)));
      head = r.value;
    }
    return pref * (std::log(s / (s - 1.0)) - head);
  }
  const double vh = b - shift;
  if (tag == PieceTag::Grid && log_power == 0) {
    cplx acc{0.0, 0.0};
    const std::size_t n = params.size() / 2;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double l0 = params[2 * i], l1 = params[2 * i + 2];
      const double d = (params[2 * i + 3] - params[2 * i + 1]) / (std::exp(l0) * std::expm1(l1 - l0));
      const cplx w = 1.0 - s;
      cplx seg;
      if (std::abs(w) < 1e-12) seg = l1 - l0;
      else seg = (std::exp(w * l1) - std::exp(w * l0)) / w;
      acc += d * seg;
    }
    return pref * acc;
  }
  auto f = [&](double l) -> cplx { return std::exp(l * (1.0 - s)) * base_with_power(*this, l); };
  double osc = std::abs(s.imag());
  if (tag == PieceTag::RDeviation) osc += std::abs(params.at(0));
  const int pieces = std::min(200000, std::max(1, static_cast<int>(osc * (vh - va) / kPi)));
  auto r = gauss_kronrod(f, va, vh, tol, 1e-13, std::max(4000, 4 * pieces), pieces);
  if (!r.converged && r.error > 1e3 * tol) throw Error("Mellin quadrature did not converge");
  return pref * r.value;
}

HalfLineMeasure HalfLineMeasure::delta_one() {
  HalfLineMeasure m;
  m.atoms.push_back({0.0, 1.0});
  return m;
}

HalfLineMeasure HalfLineMeasure::from_atoms(std::vector<Atom> atoms) {
  HalfLineMeasure m;
  m.atoms = std::move(atoms);
  merge_atoms(m.atoms);
  return m;
}

void HalfLineMeasure::validate() const {
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].logu >= 0.0)) throw Error("atom outside [1, inf)");
    if (i > 0 && !(atoms[i].logu > atoms[i - 1].logu)) throw Error("atoms not strictly increasing");
  }
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!(p.a >= 0.0)) throw Error("density piece outside [1, inf)");
    if (!(p.b > p.a)) throw Error("empty or reversed density interval");
    if (i > 0 && p.a < pieces[i - 1].b - 1e-15) throw Error("density pieces overlap or are unsorted");
  }
}

double HalfLineMeasure::atom_cumulative(double logx) const {
  double acc = 0.0;
  for (const auto& at : atoms) {
    if (at.logu > logx + kLogCollisionTol) break;
    acc += at.w;
  }
  return acc;
}

double HalfLineMeasure::cumulative(double logx) const {
  double acc = atom_cumulative(logx);
  for (const auto& p : pieces) acc += p.mass(logx);
  return acc;
}

HalfLineMeasure HalfLineMeasure::restricted(double logx) const {
  HalfLineMeasure m;
  for (const auto& at : atoms)
    if (at.logu <= logx + kLogCollisionTol) m.atoms.push_back(at);
  for (auto p : pieces) {
    if (p.a >= logx) continue;
    p.b = std::min(p.b, logx);
    m.pieces.push_back(p);
  }
  return m;
}

HalfLineMeasure HalfLineMeasure::scaled(double w) const {
  HalfLineMeasure m = *this;
  for (auto& at : m.atoms) at.w *= w;
  for (auto& p : m.pieces) p.scale *= w;
  return m;
}

bool HalfLineMeasure::has_infinite_piece() const {
  for (const auto& p : pieces)
    if (std::isinf(p.b)) return true;
  return false;
}

nlohmann::json HalfLineMeasure::to_json() const {
  nlohmann::json j;
  j["atoms"] = nlohmann::json::array();
  for (const auto& at : atoms) j["atoms"].push_back({at.logu, at.w});
  j["pieces"] = nlohmann::json::array();
  for (const auto& p : pieces) {
    nlohmann::json q;
    q["a"] = p.a;
    if (std::isinf(p.b)) q["b"] = "inf"; else q["b"] = p.b;
    q["tag"] = tag_name(p.tag);
    q["params"] = p.params;
    q["shift"] = p.shift;
    q["scale"] = p.scale;
    q["log_power"] = p.log_power;
    j["pieces"].push_back(q);
  }
  return j;
}

HalfLineMeasure HalfLineMeasure::from_json(const nlohmann::json& j) {
  HalfLineMeasure m;
  for (const auto& at : j.at("atoms")) m.atoms.push_back({at.at(0).get<double>(), at.at(1).get<double>()});
  for (const auto& q : j.at("pieces")) {
    DensityPiece p;
    p.a = q.at("a").get<double>();
    if (q.at("b").is_string()) p.b = kInf; else p.b = q.at("b").get<double>();
    p.tag = tag_from_name(q.at("tag").get<std::string>());
    p.params = q.at("params").get<std::vector<double>>();
    p.shift = q.value("shift", 0.0);
    p.scale = q.value("scale", 1.0);
    p.log_power = q.value("log_power", 0);
    m.pieces.push_back(p);
  }
  m.validate();
  return m;
}

void merge_atoms(std::vector<Atom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.logu < y.logu; });
  std::vector<Atom> out;
  out.reserve(atoms.size());
  double anchor = 0.0;
  for (const auto& at : atoms) {
    if (!out.empty() && at.logu - anchor <= kLogCollisionTol) {
      out.back().w += at.w;
    } else {
      out.push_back(at);
      anchor = at.logu;
    }
  }
  atoms = std::move(out);
}

void normalize(HalfLineMeasure& m, double tol, const ConvolveOptions& opt) {
  auto& ps = m.pieces;
  std::sort(ps.begin(), ps.end(), [](const DensityPiece& x, const DensityPiece& y) { return x.a < y.a; });
  std::vector<DensityPiece> out;
  std::size_t i = 0;
  while (i < ps.size()) {
    std::size_t j = i + 1;
    double end = ps[i].b;
    while (j < ps.size() && ps[j].a < end - 1e-15) {
      end = std::max(end, ps[j].b);
      ++j;
    }
    if (j == i + 1) {
      out.push_back(ps[i]);
    } else {
      if (std::isinf(end)) throw Error("cannot merge overlapping infinite density pieces");
      const double lo = ps[i].a;
      std::vector<DensityPiece> cluster(ps.begin() + i, ps.begin() + j);
      auto G = [&](double l) {
        double acc = 0.0;
        for (const auto& p : cluster) acc += p.mass(l, tol * 1e-3);
        return acc;
      };
      DensityPiece g;
      g.a = lo;
      g.b = end;
      g.tag = PieceTag::Grid;
      g.params = build_grid(G, lo, end, tol, opt.max_grid_nodes);
      out.push_back(g);
    }
    i = j;
  }
  ps = std::move(out);
}

HalfLineMeasure add(const HalfLineMeasure& A, const HalfLineMeasure& B, double log_xmax, double tol,
                    const ConvolveOptions& opt) {
  HalfLineMeasure m = A.restricted(log_xmax);
  HalfLineMeasure b = B.restricted(log_xmax);
  m.atoms.insert(m.atoms.end(), b.atoms.begin(), b.atoms.end());
  merge_atoms(m.atoms);
  m.pieces.insert(m.pieces.end(), b.pieces.begin(), b.pieces.end());
  normalize(m, tol, opt);
  return m;
}

HalfLineMeasure mellin_convolve(const HalfLineMeasure& A, const HalfLineMeasure& B, double log_xmax,
                                double tol, const ConvolveOptions& opt) {
  if (!(tol > 0)) throw Error("mellin_convolve: tol must be positive");
  if (!(log_xmax > 0)) throw Error("mellin_convolve: x_max must exceed 1");
  HalfLineMeasure out;
  for (const auto& x : A.atoms) {
    if (x.logu > log_xmax + kLogCollisionTol) break;
    for (const auto& y : B.atoms) {
      const double l = x.logu + y.logu;
      if (l > log_xmax + kLogCollisionTol) break;
      out.atoms.push_back({l, x.w * y.w});
    }
  }
  merge_atoms(out.atoms);

  auto shifted = [&](const Atom& at, const DensityPiece& p) {
    DensityPiece q = p;
    q.a += at.logu;
    q.b = std::min(p.b + at.logu, log_xmax);
    q.shift += at.logu;
    q.scale *= at.w;
    return q;
  };
  for (const auto& at : A.atoms)
    for (const auto& p : B.pieces)
      if (p.a + at.logu < log_xmax) out.pieces.push_back(shifted(at, p));
  for (const auto& at : B.atoms)
    for (const auto& p : A.pieces)
      if (p.a + at.logu < log_xmax) out.pieces.push_back(shifted(at, p));

  long nodes_used = 0;
  for (const auto& p1 : A.pieces) {
    for (const auto& p2 : B.pieces) {
      const double lo = p1.a + p2.a;
      const double hi = std::min(p1.b + p2.b, log_xmax);
      if (hi <= lo) continue;
      auto G = [&](double X) {
        const double top = std::min(p1.b, X - p2.a);
        if (top <= p1.a) return 0.0;
        auto f = [&](double l) { return p1.density(l) * std::exp(l) * p2.mass(X - l, tol * 1e-4); };
        auto r = adaptive_trapezoid(f, p1.a, top, tol * 1e-2, opt.node_budget);
        nodes_used += r.nodes;
        if (!r.converged) throw Error("convolution refinement exceeded the node budget");
        return r.value;
      };
      DensityPiece g;
      g.a = lo;
      g.b = hi;
      g.tag = PieceTag::Grid;
      g.params = build_grid(G, lo, hi, tol, opt.max_grid_nodes);
      out.pieces.push_back(g);
    }
  }
  normalize(out, tol, opt);
  return out;
}

HalfLineMeasure exp_star(const HalfLineMeasure& P, double log_xmax, double tol, const ConvolveOptions& opt) {
  if (!(log_xmax > 0)) throw Error("exp_star: x_max must exceed 1");
  double lp_min = std::numeric_limits<double>::infinity();
  for (const auto& at : P.atoms) {
    if (at.w == 0.0) continue;
    if (!(at.logu > 0.0)) throw Error("exp_star: measure has mass at u = 1");
    lp_min = std::min(lp_min, at.logu);
  }
  for (const auto& p : P.pieces) {
    if (!(p.a > 0.0)) throw Error("exp_star: p_min must exceed 1");
    lp_min = std::min(lp_min, p.a);
  }
  HalfLineMeasure result = HalfLineMeasure::delta_one();
  if (std::isinf(lp_min)) return result;
  const int n_max = static_cast<int>(std::floor(log_xmax / lp_min + kLogCollisionTol));
  const HalfLineMeasure base = P.restricted(log_xmax);
  HalfLineMeasure power = base;
  double inv_fact = 1.0;
  const double step_tol = tol / std::max(1, n_max);
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) power = mellin_convolve(power, base, log_xmax, step_tol, opt);
    inv_fact /= n;
    result = add(result, power.scaled(inv_fact), log_xmax, step_tol, opt);
  }
  return result;
}

HalfLineMeasure chebyshev_to_riemann(const HalfLineMeasure& psi) {
  HalfLineMeasure out;
  for (const auto& at : psi.atoms) {
    if (!(at.logu > 0.0)) throw Error("chebyshev_to_riemann: atom at u = 1");
    out.atoms.push_back({at.logu, at.w / at.logu});
  }
  for (auto p : psi.pieces) {
    if (p.shift != 0.0 || p.tag == PieceTag::Grid)
      throw Error("chebyshev_to_riemann: only closed-form unshifted pieces are supported");
    if (p.tag == PieceTag::LiTail) {
      p.log_power += 1;
    } else if (p.tag == PieceTag::MainTerm && p.log_power == 0) {
      p.tag = PieceTag::LiTail;
    } else {
      p.log_power += 1;
    }
    const int effective = p.log_power + (p.tag == PieceTag::LiTail ? 1 : 0);
    if (p.a == 0.0 && effective > 1) throw Error("chebyshev_to_riemann: density unbounded at u = 1");
    out.pieces.push_back(p);
  }
  return out;
}

cplx mellin_transform(const HalfLineMeasure& M, cplx s, TailModel tail, double tol) {
  cplx acc{0.0, 0.0};
  for (const auto& at : M.atoms) acc += at.w * std::exp(-s * at.logu);
  for (const auto& p : M.pieces) {
    if (std::isinf(p.b) && tail != TailModel::LiTail)
      throw Error("unmet tail tolerance: measure has unbounded support and no tail model");
    acc += p.mellin(s, tol);
  }
  return acc;
}

int mobius(int n) {
  if (n < 1) throw Error("mobius: argument must be positive");
  int result = 1;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      result = -result;
    }
  }
  if (n > 1) result = -result;
  return result;
}

double riemann_to_prime(const LogCountingFn& Pi, double logx, double log_pfloor) {
  if (logx < 0) throw Error("riemann_to_prime: x must be >= 1");
  if (!(log_pfloor > 0)) throw Error("riemann_to_prime: p_floor must exceed 1");
  const int nu_max = std::max(1, static_cast<int>(std::floor(logx / log_pfloor)));
  double acc = 0.0;
  for (int nu = 1; nu <= nu_max; ++nu) {
    const int mu = mobius(nu);
    if (mu != 0) acc += mu * Pi(logx / nu) / nu;
  }
  return acc;
}

double prime_to_riemann(const LogCountingFn& pi, double logx, double log_pfloor) {
  if (logx < 0) throw Error("prime_to_riemann: x must be >= 1");
  if (!(log_pfloor > 0)) throw Error("prime_to_riemann: p_floor must exceed 1");
  const int nu_max = std::max(1, static_cast<int>(std::floor(logx / log_pfloor)));
  double acc = 0.0;
  for (int nu = 1; nu <= nu_max; ++nu) acc += pi(logx / nu) / nu;
  return acc;
}

double Li_log(double logx) {
  if (logx < 0) throw Error("Li: x must be >= 1");
  if (logx > 700) throw Error("Li: log x beyond double range");
  if (logx == 0) return 0.0;
  double term = 1.0, sum = 0.0;
  for (int n = 1; n < 100000; ++n) {
    term *= logx / n;
    sum += term / n;
    if (n > logx && term / n < 1e-17 * sum) break;
  }
  return sum;
}

double Li_diff(double la, double lb) {
  if (lb <= la) return -Li_diff(lb, la);
  if (lb - la <= 1.0) {
    auto f = [](double l) { return std::abs(l) < 1e-8 ? 1.0 + 0.5 * l : std::expm1(l) / l; };
    auto r = gauss_kronrod(f, la, lb, 0.0, 1e-15, 200);
    return r.value;
  }
  return Li_log(lb) - Li_log(la);
}

}  // namespace beurling
