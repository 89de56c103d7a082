#include "beurling/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "beurling/quadrature.hpp"
#include "beurling/rng.hpp"
#include "beurling/zeta.hpp"

namespace beurling {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// d li / d log x = sum_{n >= 1} l^{n-1} / (n! zeta(n + 1)).
double li_dlog(double l) {
  static std::vector<double> inv_zeta;
  double term = 1.0, sum = 0.0;
  for (int n = 1; n < 100000; ++n) {
    if (static_cast<int>(inv_zeta.size()) < n) inv_zeta.push_back(1.0 / boost::math::zeta(static_cast<double>(n + 1)));
    if (n > 1) term *= l / n;
    const double add = term * inv_zeta[n - 1];
    sum += add;
    if (n > l && add < 1e-17 * sum) break;
  }
  return sum;
}

// Deviation part of d Pi_C / d log u at log u = m, i.e. (psi' - (1 - 1/u)) u / log u.
double deviation_dlog(const Construction& c, double m) {
  const Point q = c.point(m);
  if (q.k < 0) return 0.0;
  return (c.psi_prime(q) + std::expm1(-m)) * std::exp(m) / m;
}

double ein(double z) { return kEulerGamma + std::log(z) + boost::math::expint(1, z); }

}  // namespace

std::string target_name(SampleTarget t) { return t == SampleTarget::PiC ? "pi_C" : "Pi_C"; }

SampleTarget target_from_name(const std::string& s) {
  if (s == "pi_C") return SampleTarget::PiC;
  if (s == "Pi_C") return SampleTarget::RiemannPiC;
  throw Error("unknown sampling target: " + s);
}

double counting_deriv(const Construction& c, double l, SampleTarget target) {
  if (target == SampleTarget::RiemannPiC) {
    const double main = l == 0.0 ? 1.0 : std::expm1(l) / l;
    return main + (l > 0 ? deviation_dlog(c, l) : 0.0);
  }
  double v = li_dlog(l);
  const double la0 = c.table().rows.front().logA_d;
  const int nu_max = static_cast<int>(std::floor(l / la0));
  for (int nu = 1; nu <= nu_max; ++nu) {
    const int mu = mobius(nu);
    if (mu == 0) continue;
    v += mu * deviation_dlog(c, l / nu) / (static_cast<double>(nu) * nu);
  }
  return v;
}

CountingTable::CountingTable(const Construction& c, double log_xmax, SampleTarget target, double step)
    : target_(target) {
  if (!(log_xmax > 0)) throw Error("counting table: log x_max must be positive");
  std::vector<double> breaks;
  for (const auto& r : c.table().rows)
    for (double b : {r.logA_d, r.logB_d, r.logC_d})
      for (int nu = 1; nu * b <= log_xmax; ++nu) {
        if (target == SampleTarget::RiemannPiC && nu > 1) break;
        breaks.push_back(nu * b);
      }
  const int n = static_cast<int>(std::ceil(log_xmax / step));
  for (int i = 0; i <= n; ++i) nodes_.push_back(std::min(log_xmax, i * step));
  nodes_.insert(nodes_.end(), breaks.begin(), breaks.end());
  std::sort(nodes_.begin(), nodes_.end());
  std::vector<double> kept;
  for (double x : nodes_)
    if (kept.empty() || x - kept.back() > 1e-9) kept.push_back(x);
  nodes_ = std::move(kept);
  for (double l : nodes_) {
    const Point p = c.point(l);
    F_.push_back(target == SampleTarget::PiC ? c.pi(p) : c.Pi(p));
    const double eps = 1e-11 * std::max(1.0, l);
    dl_.push_back(counting_deriv(c, l + eps, target));
    dr_.push_back(l > eps ? counting_deriv(c, l - eps, target) : dl_.back());
  }
}

std::size_t CountingTable::cell(double l) const {
  if (l < 0 || l > nodes_.back() + 1e-12) throw Error("counting table: log u out of range");
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), l);
  std::size_t i = (it == nodes_.begin()) ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

double CountingTable::value(double l) const {
  const std::size_t i = cell(l);
  const double h = nodes_[i + 1] - nodes_[i];
  const double x = (l - nodes_[i]) / h;
  const double x2 = x * x, x3 = x2 * x;
  return (2 * x3 - 3 * x2 + 1) * F_[i] + (x3 - 2 * x2 + x) * h * dl_[i] + (-2 * x3 + 3 * x2) * F_[i + 1] +
         (x3 - x2) * h * dr_[i + 1];
}

double CountingTable::deriv(double l) const {
  const std::size_t i = cell(l);
  const double h = nodes_[i + 1] - nodes_[i];
  const double x = (l - nodes_[i]) / h;
  const double x2 = x * x;
  return ((6 * x2 - 6 * x) * (F_[i] - F_[i + 1])) / h + (3 * x2 - 4 * x + 1) * dl_[i] + (3 * x2 - 2 * x) * dr_[i + 1];
}

double CountingTable::invert(double y) const {
  if (y < F_.front() || y > F_.back()) throw Error("counting table: value out of range");
  auto it = std::lower_bound(F_.begin(), F_.end(), y);
  std::size_t i = (it == F_.begin()) ? 0 : static_cast<std::size_t>(it - F_.begin()) - 1;
  i = std::min(i, nodes_.size() - 2);
  double lo = nodes_[i], hi = nodes_[i + 1];
  for (int it2 = 0; it2 < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it2) {
    const double mid = 0.5 * (lo + hi);
    if (value(mid) < y) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// int_0^e e^{w x} x^k dx for k = 0, 1, 2.
void moments(cplx w, double e, cplx out[3]) {
  if (std::abs(w) * e < 0.5) {
    for (int k = 0; k < 3; ++k) {
      cplx acc{0.0, 0.0}, wp{1.0, 0.0};
      double fact = 1.0;
      for (int j = 0; j < 30; ++j) {
        acc += wp * std::pow(e, k + j + 1) / (fact * (k + j + 1));
        wp *= w;
        fact *= (j + 1);
      }
      out[k] = acc;
    }
    return;
  }
  const cplx ew = std::exp(w * e);
  out[0] = (ew - 1.0) / w;
  out[1] = (e * ew - out[0]) / w;
  out[2] = (e * e * ew - 2.0 * out[1]) / w;
}

}  // namespace

cplx CountingTable::exp_integral(double ly, double t) const {
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < nodes_.size() && nodes_[i] < ly; ++i) {
    const double h = nodes_[i + 1] - nodes_[i];
    const double e = std::min(1.0, (ly - nodes_[i]) / h);
    const double dF = F_[i] - F_[i + 1];
    const double m0 = h * dl_[i], m1 = h * dr_[i + 1];
    const double a0 = m0, a1 = -6 * dF - 4 * m0 - 2 * m1, a2 = 6 * dF + 3 * m0 + 3 * m1;
    cplx mo[3];
    moments(cplx(0.0, -t * h), e, mo);
    acc += std::polar(1.0, -t * nodes_[i]) * (a0 * mo[0] + a1 * mo[1] + a2 * mo[2]);
  }
  return acc;
}

DiscreteSystem sample_primes(const CountingTable& F, std::uint64_t seed) {
  DiscreteSystem ds;
  ds.rng_seed = seed;
  const long n = static_cast<long>(std::floor(F.total()));
  ds.primes.reserve(n);
  for (long j = 1; j <= n; ++j) {
    const double U = counter_uniform(seed, 1, static_cast<std::uint64_t>(j));
    ds.primes.push_back({std::exp(F.invert(j - 1 + U)), 1});
  }
  return ds;
}

double sup_counting_gap(const DiscreteSystem& ds, const CountingTable& F, const std::vector<double>& log_grid) {
  std::vector<double> logs;
  for (const auto& p : ds.primes) logs.push_back(std::log(p.value));
  double sup = 0.0;
  auto probe = [&](double l) {
    const double f = F.value(l);
    const double at = static_cast<double>(std::upper_bound(logs.begin(), logs.end(), l) - logs.begin());
    const double below = static_cast<double>(std::lower_bound(logs.begin(), logs.end(), l) - logs.begin());
    sup = std::max({sup, std::abs(at - f), std::abs(below - f)});
  };
  for (double l : log_grid) probe(std::min(l, F.log_xmax()));
  for (double l : logs) probe(l);
  return sup;
}

std::vector<ExpSumSample> exp_sum_statistic(const DiscreteSystem& ds, const CountingTable& F, int n, double t_max,
                                            std::uint64_t seed) {
  std::vector<double> logs;
  for (const auto& p : ds.primes) logs.push_back(std::log(p.value));
  CounterRng rng(seed, 2);
  std::vector<ExpSumSample> out;
  const double ly_max = F.log_xmax();
  for (int i = 0; i < n; ++i) {
    ExpSumSample s;
    const double ly = rng.uniform(1.0, ly_max);
    s.y = std::exp(ly);
    s.t = std::expm1(rng.uniform() * std::log1p(t_max));
    cplx sum{0.0, 0.0};
    for (double l : logs) {
      if (l > ly) break;
      sum += std::polar(1.0, -s.t * l);
    }
    s.diff = std::abs(sum - F.exp_integral(ly, s.t));
    s.ratio = s.diff / (std::sqrt(s.y) + std::sqrt(s.y * std::log1p(s.t) / std::log1p(s.y)));
    out.push_back(s);
  }
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw Error("quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - i) * (v[i + 1] - v[i]);
}

HalfLineMeasure hybrid_measure(const DiscreteSystem& ds, const SequenceTable& t, int K) {
  const double lA = t.logA_next(K);
  std::vector<Atom> atoms;
  auto add_powers = [&](double value, double weight) {
    const double lp = std::log(value);
    for (int nu = 1; nu * lp < lA; ++nu) atoms.push_back({nu * lp, weight / nu});
  };
  for (const auto& p : ds.primes) {
    if (std::log(p.value) >= lA) break;
    add_powers(p.value, p.multiplicity);
  }
  if (ds.special && ds.special->l > 0) add_powers(ds.special->q, ds.special->l);
  HalfLineMeasure m = HalfLineMeasure::from_atoms(std::move(atoms));
  DensityPiece tail;
  tail.a = lA;
  tail.b = std::numeric_limits<double>::infinity();
  tail.tag = PieceTag::LiTail;
  m.pieces.push_back(tail);
  return m;
}

double li_tail_mellin_real(double logA, double s) {
  if (!(s > 1.0)) throw Error("Li tail transform: s must exceed 1");
  return boost::math::expint(1, (s - 1.0) * logA) - boost::math::expint(1, s * logA);
}

cplx li_head_mellin(double logA, cplx s) {
  auto f = [&](double l) -> cplx {
    const double w = l < 1e-8 ? 1.0 - 0.5 * l : -std::expm1(-l) / l;
    return std::exp((1.0 - s) * l) * w;
  };
  const double pieces = std::abs(s.imag()) * logA / kTwoPi + 1.0;
  if (pieces > 2e6) throw Error("Li head transform: height too large for quadrature");
  const int np = std::max(1, static_cast<int>(pieces));
  const double scale = std::exp(std::max(0.0, (1.0 - s.real()) * logA));
  auto r = gauss_kronrod(f, 0.0, logA, 1e-10 * scale, 1e-12, np * 4 + 1000, np);
  if (!r.converged) throw Error("Li head transform: quadrature did not converge");
  return r.value;
}

int phase_bucket(double phase) {
  const double w = wrap_positive(phase);
  const int b = static_cast<int>(std::floor((w + kPi / 160.0) / (kPi / 80.0)));
  return b % 160;
}

namespace {

// Sum over atoms of w u^{-s} at s = sigma + iT; phases reduced in high precision
// once T log u leaves the comfortable double range.
cplx atom_transform(const HalfLineMeasure& m, double sigma, const hpf& T) {
  const double Td = to_d(T);
  cplx acc{0.0, 0.0};
  if (std::abs(Td) < 1e6) {
    for (const auto& a : m.atoms) acc += a.w * std::polar(std::exp(-sigma * a.logu), -Td * a.logu);
    return acc;
  }
  for (const auto& a : m.atoms) {
    const double ph = mod_2pi(T * hpf(a.logu));
    acc += a.w * std::polar(std::exp(-sigma * a.logu), -ph);
  }
  return acc;
}

}  // namespace

cplx logzeta_gap_at(const HalfLineMeasure& hybrid, const SequenceTable& t, int K, double sigma, const hpf& T) {
  HpDigits scope(t.digits);
  const double lA = t.logA_next(K);
  const ZetaContext ctx(t, K, T, hpf(0));
  const double Td = to_d(T);
  if (std::abs(Td) * lA > 1e7) throw Error("log zeta gap: height beyond the Li head quadrature range");
  return atom_transform(hybrid, sigma, T) - li_head_mellin(lA, cplx(sigma, Td)) - ctx.segment_sum({sigma, 0.0});
}

LogZetaGap logzeta_gap(const DiscreteSystem& ds, const SequenceTable& t, int K, double t_max, int t_points) {
  HpDigits scope(t.digits);
  const HalfLineMeasure hybrid = hybrid_measure(ds, t, K);
  LogZetaGap out;
  std::vector<double> ts{0.0};
  for (int i = 0; i < t_points; ++i) ts.push_back(std::exp(std::log(0.1) + (std::log(t_max) - std::log(0.1)) * i / (t_points - 1)));
  for (double sigma : {0.75, 1.0, 1.25, 1.5}) {
    for (double tt : ts) {
      GapPoint g;
      g.sigma = sigma;
      g.t = tt;
      g.gap = logzeta_gap_at(hybrid, t, K, sigma, hpf(tt));
      g.ratio = std::abs(g.gap) / std::sqrt(std::log(tt + 2.0));
      out.D_hat = std::max(out.D_hat, g.ratio);
      out.grid.push_back(g);
    }
  }
  out.im_gap_tau = wrap_phase(logzeta_gap_at(hybrid, t, K, 1.0, t.row(K).tau).imag());
  out.bucket = phase_bucket(out.im_gap_tau);
  return out;
}

nlohmann::json LogZetaGap::to_json() const {
  nlohmann::json g = nlohmann::json::array();
  for (const auto& p : grid) g.push_back({p.sigma, p.t, p.gap.real(), p.gap.imag(), p.ratio});
  return {{"D_hat", D_hat},
          {"im_gap_at_tau", im_gap_tau},
          {"bucket", bucket},
          {"grid_columns", {"sigma", "t", "re_gap", "im_gap", "ratio"}},
          {"grid", g}};
}

QTrickResult qtrick_select(const std::vector<GapSample>& history, const SequenceTable& t) {
  QTrickResult res;
  res.even_counts.assign(160, 0);
  res.odd_counts.assign(160, 0);
  int n_even = 0, n_odd = 0;
  for (const auto& g : history) {
    if (g.K < 0 || g.K > t.K_max()) throw Error("q-trick: K outside the table");
    if (g.K % 2 == 0) { ++n_even; ++res.even_counts[phase_bucket(g.im_gap)]; }
    else { ++n_odd; ++res.odd_counts[phase_bucket(g.im_gap)]; }
  }
  if (n_even < 2 || n_odd < 2) throw Error("q-trick: need at least two even-K and two odd-K samples");
  auto modal = [](const std::vector<int>& c) {
    return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
  };
  int even_b = modal(res.even_counts), odd_b = modal(res.odd_counts);
  res.l = even_b;
  res.r = odd_b;
  if (res.l < res.r) {
    std::swap(res.l, res.r);
    res.relabeled = true;
  }
  if (res.l == 0 && res.r == 0) {
    res.needed = false;
    res.found = true;
    res.note = "phase gap already in S_0; no extra prime";
    return res;
  }
  HpDigits scope(t.digits);
  const double pi = kPi;
  const double centre = 80.0 / pi;
  const int steps = 5000;
  for (int i = 0; i <= 2 * steps && !res.found; ++i) {
    // Outward from 80/pi: 0, +h, -h, +2h, ...
    const int k = (i + 1) / 2 * ((i % 2) ? 1 : -1);
    const double q = centre + k * 1e-4;
    const hpf lq = log(hpf(q));
    double m_even = std::numeric_limits<double>::infinity(), m_odd = m_even, tail = 0.0;
    for (const auto& g : history) {
      const int target = (g.K % 2 == 0) ? even_b : odd_b;
      const double ph = mod_2pi(t.row(g.K).tau * lq);
      const cplx z = std::polar(1.0 / q, -ph);  // q^{-(1 + i tau)}
      const double lhs = (-static_cast<double>(res.l) * std::log(1.0 - z)).imag() + target * pi / 80.0;
      const double margin = pi / 40.0 - std::abs(lhs);
      if (g.K % 2 == 0) m_even = std::min(m_even, margin); else m_odd = std::min(m_odd, margin);
      // Truncation of the q series below A_{K+1}.
      const double lA = t.logA_next(g.K);
      cplx partial{0.0, 0.0}, zp = z;
      for (int nu = 1; nu * std::log(q) < lA; ++nu) {
        partial += zp / static_cast<double>(nu);
        zp *= z;
      }
      tail = std::max(tail, res.l * std::abs(std::log(1.0 - z) + partial));
    }
    if (m_even > 0 && m_odd > 0 && tail < pi / 160.0) {
      res.found = true;
      res.q = q;
      res.margin_even = m_even;
      res.margin_odd = m_odd;
      res.tail = tail;
    }
  }
  if (!res.found) res.note = "no q within 0.5 of 80/pi satisfies the phase conditions for the sampled tau_K";
  return res;
}

nlohmann::json QTrickResult::to_json() const {
  auto hist = [](const std::vector<int>& c) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i]) j[std::to_string(i)] = c[i];
    return j;
  };
  nlohmann::json j = {{"l", l},         {"r", r},
                      {"relabeled", relabeled}, {"needed", needed},
                      {"found", found}, {"even_buckets", hist(even_counts)},
                      {"odd_buckets", hist(odd_counts)}};
  if (found && needed) {
    j["q"] = q;
    j["margin_even"] = margin_even;
    j["margin_odd"] = margin_odd;
    j["tail"] = tail;
  }
  if (!note.empty()) j["note"] = note;
  return j;
}

XTilde probe_x_tilde(const IntegerStream& stream, double x) {
  if (!(x > 2.0)) throw Error("x~ probe: x must exceed 2");
  if (std::log(x) > stream.log_xmax) throw Error("x~ probe: window beyond the enumerated range");
  const double lo = x - 1.0, hi = x;
  const auto& e = stream.entries;
  auto first = std::lower_bound(e.begin(), e.end(), std::log(lo) - 1e-12,
                                [](const IntegerEntry& a, double v) { return a.logvalue < v; });
  std::vector<double> pts{lo};
  int count = 0;
  for (auto it = first; it != e.end() && it->logvalue <= std::log(hi) + 1e-12; ++it) {
    pts.push_back(std::exp(it->logvalue));
    ++count;
  }
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  // Pigeonhole: count + 1 gaps share length 1, so the largest is >= 1/(count + 1).
  if (!(1.0 / (count + 1) > 2.0 / (lo * lo))) throw Error("x~ probe: window too crowded for a certified gap");
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i + 1] - pts[i] > pts[best + 1] - pts[best]) best = i;
  XTilde out;
  out.in_window = count;
  out.x_tilde = 0.5 * (pts[best] + pts[best + 1]);
  // Nearest generalized integer anywhere in the stream.
  const double lt = std::log(out.x_tilde);
  auto it = std::lower_bound(e.begin(), e.end(), lt, [](const IntegerEntry& a, double v) { return a.logvalue < v; });
  double clear = std::numeric_limits<double>::infinity();
  if (it != e.end()) clear = std::min(clear, std::exp(it->logvalue) - out.x_tilde);
  if (it != e.begin()) clear = std::min(clear, out.x_tilde - std::exp(std::prev(it)->logvalue));
  out.clearance = clear;
  out.certified = clear >= 1.0 / (out.x_tilde * out.x_tilde);
  return out;
}

nlohmann::json XTilde::to_json() const {
  return {{"x_tilde", x_tilde}, {"clearance", clearance}, {"certified", certified}, {"in_window", in_window}};
}

DensityGap density_gap(const HalfLineMeasure& hybrid, const SequenceTable& t, int K, double pnt_sup, double log_p1,
                       double h) {
  const double lA = t.logA_next(K);
  double S1 = 0.0, Sh = 0.0;
  for (const auto& a : hybrid.atoms) {
    S1 += a.w * std::exp(-a.logu);
    Sh += a.w * std::exp(-(1.0 + h) * a.logu);
  }
  DensityGap out;
  out.log_rho_K = S1 - ein(lA);
  out.rho_K = std::exp(out.log_rho_K);
  out.rho_K_limit = h * std::exp(Sh + li_tail_mellin_real(lA, 1.0 + h));
  // Beyond A_{K+1} the defect of Pi against Li is the continuous defect plus
  // sum_{nu <= log u/log p_1} 1/nu from the one-per-cell sampling.
  const auto& P = t.params;
  auto H = [&](double l) { return 1.0 + std::log(std::max(1.0, l / log_p1)); };
  if (P.alpha == 1.0 && P.c == 1.0) {
    out.log_gap_bound = std::log(3.0 * (pnt_sup + H(lA)) * std::exp(-lA) + boost::math::expint(1, lA));
  } else {
    auto f = [&](double l) { return pnt_sup * std::exp(-P.c * std::pow(l, P.alpha)); };
    const double dens = gauss_kronrod(f, lA, lA + 400.0, 0.0, 1e-10, 2000, 16).value;
    const double edge = pnt_sup * std::exp(-P.c * std::pow(lA, P.alpha));
    out.log_gap_bound = std::log(2.0 * edge + dens + 3.0 * H(lA) * std::exp(-lA) + boost::math::expint(1, lA));
  }
  out.inv_xK = std::exp(-t.row(K).logx_d);
  return out;
}

nlohmann::json DensityGap::to_json() const {
  return {{"log_rho_K", log_rho_K},
          {"rho_K", rho_K},
          {"rho_K_limit", rho_K_limit},
          {"log_gap_bound", log_gap_bound},
          {"inv_x_K", inv_xK}};
}

DiscretizationReport discretize(const Construction& c, const CountingTable& F, const DiscretizeOptions& opt,
                                DiscreteSystem* out) {
  const SequenceTable& t = c.table();
  if (F.log_xmax() < t.logA_next(opt.K) - 1e-9) throw Error("discretize: table must reach A_{K+1}");
  DiscretizationReport rep;
  rep.seed = opt.seed;
  rep.K = opt.K;
  DiscreteSystem ds = sample_primes(F, opt.seed);
  rep.prime_count = ds.primes.size();
  rep.log_xmax = F.log_xmax();
  std::vector<double> logs;
  for (const auto& p : ds.primes) logs.push_back(std::log(p.value));
  auto pi_D = [&](double l, bool below) {
    auto it = below ? std::lower_bound(logs.begin(), logs.end(), l) : std::upper_bound(logs.begin(), logs.end(), l);
    return static_cast<double>(it - logs.begin());
  };
  std::vector<double> grid;
  for (int i = 1; i <= opt.probe_points; ++i) grid.push_back(rep.log_xmax * i / opt.probe_points);
  const double lp1 = logs.empty() ? 1.0 : logs.front();
  for (double l : grid) {
    const Point p = c.point(l);
    const double exact = opt.target == SampleTarget::PiC ? c.pi(p) : c.Pi(p);
    rep.sup_pi_gap = std::max({rep.sup_pi_gap, std::abs(pi_D(l, false) - exact), std::abs(pi_D(l, true) - exact)});
    if (l >= std::exp(1.0)) {
      double Pi = 0.0;
      for (int nu = 1; l / nu >= lp1; ++nu) Pi += pi_D(l / nu, false) / nu;
      rep.sup_Pi_gap_ratio = std::max(rep.sup_Pi_gap_ratio, std::abs(Pi - c.Pi(p)) / std::log(l));
    }
  }
  rep.sup_pi_gap = std::max(rep.sup_pi_gap, sup_counting_gap(ds, F, grid));
  rep.exp_sums = exp_sum_statistic(ds, F, opt.exp_samples, opt.exp_t_max, opt.seed);
  std::vector<double> ratios;
  for (const auto& s : rep.exp_sums) ratios.push_back(s.ratio);
  rep.exp_ratio_p95 = quantile(ratios, 0.95);
  rep.gap = logzeta_gap(ds, t, opt.K, opt.gap_t_max);
  std::vector<double> lgrid;
  for (int i = 1; i <= 400; ++i) lgrid.push_back(rep.log_xmax * i / 400.0);
  const PnTReport pnt = c.pnt_defect(opt.K, lgrid);
  const bool bounded = t.params.alpha == 1.0 && t.params.c == 1.0;
  rep.density = density_gap(hybrid_measure(ds, t, opt.K), t, opt.K, bounded ? pnt.sup_abs_Pi : pnt.sup_Pi, lp1);
  if (out) *out = std::move(ds);
  return rep;
}

nlohmann::json DiscretizationReport::to_json() const {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& s : exp_sums) ex.push_back({s.y, s.t, s.diff, s.ratio});
  return {{"seed", seed},
          {"K", K},
          {"prime_count", prime_count},
          {"log_xmax", log_xmax},
          {"sup_pi_gap", sup_pi_gap},
          {"sup_Pi_gap_over_loglog", sup_Pi_gap_ratio},
          {"exp_sum_columns", {"y", "t", "diff", "ratio"}},
          {"exp_sums", ex},
          {"exp_ratio_p95", exp_ratio_p95},
          {"log_zeta_gap", gap.to_json()},
          {"density", density.to_json()}};
}

}  // namespace beurling
