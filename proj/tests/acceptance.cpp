// Acceptance run: one [PASS]/[FAIL] line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "beurling/contour.hpp"
#include "beurling/discretize.hpp"
#include "beurling/pipeline.hpp"

using namespace beurling;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void criterion(int id, const std::string& name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > time_limit) {
    o.pass = false;
    o.detail += "; over the time limit";
  }
  if (!o.pass) ++g_failed;
  char t[32];
  std::snprintf(t, sizeof t, "%.1f s", secs);
  std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << name << " (" << o.detail << ") [" << t << "]"
            << std::endl;
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

const SequenceTable& toy(double logB0) {
  static std::map<double, SequenceTable> cache;
  auto it = cache.find(logB0);
  if (it == cache.end()) it = cache.emplace(logB0, build_sequences(ParamSet::toy(logB0, 1))).first;
  return it->second;
}

// Saddles |m| <= M at row K, computed once and shared by several criteria.
struct SaddleSet {
  double logB0 = 0;
  int K = 0;
  std::vector<SaddlePoint> saddles;  // index m + M
  int M = 0;
};

const SaddleSet& saddles(double logB0, int K) {
  static std::map<std::pair<double, int>, SaddleSet> cache;
  const auto key = std::make_pair(logB0, K);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  SaddleSet s;
  s.logB0 = logB0;
  s.K = K;
  const ZetaContext ctx = ZetaContext::at_tau(toy(logB0), K);
  s.M = std::min(saddle_count(ctx.logB()), 5);
  for (int m = -s.M; m <= s.M; ++m) s.saddles.push_back(find_saddle(ctx, m));
  return cache.emplace(key, std::move(s)).first->second;
}

const double kScales[] = {15.0, 20.0, 25.0};

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);

  criterion(1, "exp* of random discrete systems equals heap enumeration", 60.0, [] {
    const ExpStarCheck r = check_exp_star(20240611, 100, 1e4);
    return Outcome{r.systems >= 100 && r.mismatches == 0,
                   std::to_string(r.systems) + " systems, " + std::to_string(r.probes) + " probes, " +
                       std::to_string(r.mismatches) + " mismatches, max |diff| " + fmt(r.max_abs_diff)};
  });

  criterion(2, "closed-loop Cauchy test on the toy system, K = 0, x = 1000, T = 1e5", 600.0, [] {
    const ClosedLoopReport r = closed_loop(toy(20.0), 0, 1000.0, 1.5, 1e5);
    return Outcome{std::abs(r.relative_residual) < 1e-3,
                   "vertical " + fmt(r.vertical) + ", residue " + fmt(r.residue) + ", shifted " + fmt(r.shifted) +
                       ", relative residual " + fmt(r.relative_residual)};
  });

  criterion(3, "saddle certification for |m| <= min(M, 5)", 120.0, [] {
    bool ok = true;
    int count = 0;
    double worst_res = 0.0, worst_t0 = 0.0, worst_wind = 0.0;
    for (double b : kScales)
      for (int K : {0, 1}) {
        const SaddleSet& s = saddles(b, K);
        const ZetaContext ctx = ZetaContext::at_tau(toy(b), K);
        const SaddlePoint& s0 = s.saddles[s.M];
        for (const auto& sp : s.saddles) {
          ++count;
          ok = ok && sp.winding_int == 1 && sp.residual < sp.residual_threshold;
          if (sp.m != 0) ok = ok && sp.sigma < s0.sigma;
          worst_res = std::max(worst_res, sp.residual / sp.residual_threshold);
          worst_wind = std::max(worst_wind, std::abs(sp.winding - 1.0));
        }
        const double rel_t0 = std::abs(s0.u) / ctx.anchor();
        worst_t0 = std::max(worst_t0, rel_t0);
        ok = ok && rel_t0 < 1e-12;
      }
    return Outcome{ok, std::to_string(count) + " saddles over logB0 15/20/25 and K = 0, 1; max residual/threshold " +
                           fmt(worst_res) + ", max |winding - 1| " + fmt(worst_wind) + ", max |t0 - tau|/tau " +
                           fmt(worst_t0)};
  });

  criterion(4, "asymptotic residuals decrease across logB0 = 15, 20, 25", 600.0, [] {
    // Per scale: max over saddles of res_sigma and res_logx, the a-law residual of
    // Gamma_0 and |a^{+-} - log(pi/2)| at its endpoints. K = 0.
    std::vector<std::array<double, 4>> rows;
    for (double b : kScales) {
      const SaddleSet& s = saddles(b, 0);
      const ZetaContext ctx = ZetaContext::at_tau(toy(b), 0);
      const SaddlePoint& s0 = s.saddles[s.M];
      std::array<double, 4> r{0, 0, 0, 0};
      for (const auto& sp : s.saddles) {
        const SaddleAsymptotics a = saddle_asymptotics(ctx, sp, s0);
        r[0] = std::max(r[0], a.res_sigma);
        r[1] = std::max(r[1], a.res_logx);
      }
      const PathPolyline g = trace_gamma0(ctx, s0);
      r[2] = g.a_law_residual;
      r[3] = std::max(std::abs(g.a_minus - std::log(kPi / 2)), std::abs(g.a_plus - std::log(kPi / 2)));
      rows.push_back(r);
    }
    const char* names[] = {"res_sigma", "res_logx", "a_law", "a_endpoint"};
    bool ok = true;
    std::ostringstream d;
    for (int j = 0; j < 4; ++j) {
      d << (j ? "; " : "") << names[j];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        d << ' ' << fmt(rows[i][j]);
        if (i > 0 && rows[i][j] > 1.1 * rows[i - 1][j]) ok = false;
      }
    }
    return Outcome{ok, d.str()};
  });

  criterion(5, "sign of the s_0 term is (-1)^K and the other pieces stay below it", 600.0, [] {
    bool ok = true;
    std::ostringstream d;
    for (int K : {0, 1}) {
      ShiftedOptions opt;
      opt.T2_offset = -1.0;
      const PerronReport r = shifted_total(toy(20.0), K, opt);
      const int expect = K % 2 == 0 ? 1 : -1;
      ok = ok && r.s0.sign == expect && r.margin > 0.0;
      if (K == 0) ok = ok && r.margin > 1.0;
      d << (K ? "; " : "") << "K=" << K << " sign " << r.s0.sign << ", margin " << fmt(r.margin)
        << " nat (default T2: " << fmt(r.margin_default_T2) << ")";
    }
    return Outcome{ok, d.str()};
  });

  criterion(6, "construction invariants", 300.0, [] {
    bool ok = true;
    std::ostringstream d;
    double worst_lattice = 0.0;
    for (const ParamSet& p : {ParamSet::toy(20.0, 1), [] {
                                ParamSet q = ParamSet::toy(20.0, 1);
                                q.alpha = 0.5;
                                q.c = 0.7;
                                return q;
                              }()}) {
      const Construction c(build_sequences(p));
      const ConstructionChecks chk = check_construction(c, 10000, 7);
      ok = ok && chk.psi_points == 10000 && chk.psi_violations == 0 && chk.max_continuity < 1e-12 &&
           chk.max_S_at_C < 1e-12;
      // Recompute the lattice and phase conditions at 50 digits from the decimal output.
      const nlohmann::json j = c.table().to_json();
      HpDigits scope(50);
      const hpf two_pi = 2 * hp_pi();
      auto rel = [&](const hpf& v) {
        const hpf q = v / two_pi;
        return to_d(abs(q - round(q)) / q);
      };
      int k = 0;
      for (const auto& r : j.at("rows")) {
        const hpf tau(r.at("tau").get<std::string>());
        const hpf lA(r.at("logA").get<std::string>()), lB(r.at("logB").get<std::string>());
        const hpf lx(r.at("logx").get<std::string>());
        const hpf target = (k % 2 == 0) ? hp_pi() / 2 : 3 * hp_pi() / 2;
        worst_lattice = std::max({worst_lattice, rel(tau * lA), rel(tau * lB), rel(tau * lx - target)});
        ++k;
      }
      d << "alpha " << p.alpha << ": " << chk.psi_violations << "/" << chk.psi_points << " psi' violations, continuity "
        << fmt(chk.max_continuity) << ", S(C) " << fmt(chk.max_S_at_C) << "; ";
    }
    ok = ok && worst_lattice < 1e-40;
    d << "lattice/phase at 50 digits " << fmt(worst_lattice);
    return Outcome{ok, d.str()};
  });

  criterion(7, "PNT defect stable across toy scales and bounded for alpha = c = 1", 120.0, [] {
    std::vector<double> sups;
    double sup_abs = 0.0;
    for (double b : kScales) {
      const Construction c(toy(b));
      std::vector<double> grid;
      const double top = std::min(690.0, c.table().logA_next(c.table().K_max()));
      for (int i = 1; i <= 400; ++i) grid.push_back(top * i / 400.0);
      const PnTReport r = c.pnt_defect(-1, grid);
      sups.push_back(r.sup_Pi);
      sup_abs = std::max(sup_abs, r.sup_abs_Pi);
    }
    const double lo = *std::min_element(sups.begin(), sups.end()), hi = *std::max_element(sups.begin(), sups.end());
    const bool ok = lo > 0 && hi <= 2.0 * lo && sup_abs < 1.0;
    return Outcome{ok, "weighted sup " + fmt(sups[0]) + " / " + fmt(sups[1]) + " / " + fmt(sups[2]) +
                           ", max/min " + fmt(hi / lo) + ", sup |Pi_C - Li| " + fmt(sup_abs)};
  });

  criterion(8, "discretization contracts over 30 seeds", 600.0, [] {
    ParamSet p = ParamSet::toy(4.0, 1);
    const Construction c(build_sequences(p));
    const CountingTable F(c, c.table().logA_next(0));
    double worst_gap = 0.0;
    std::vector<double> p95, dhat;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
      DiscretizeOptions opt;
      opt.seed = seed;
      const DiscretizationReport r = discretize(c, F, opt);
      worst_gap = std::max(worst_gap, r.sup_pi_gap);
      p95.push_back(r.exp_ratio_p95);
      if (seed <= 10) dhat.push_back(r.gap.D_hat);
    }
    auto spread = [](const std::vector<double>& v) {
      const double med = quantile(v, 0.5);
      double s = 0.0;
      for (double x : v) s = std::max(s, std::abs(x / med - 1.0));
      return std::make_pair(med, s);
    };
    const auto [pm, ps] = spread(p95);
    const auto [dm, dsp] = spread(dhat);
    bool finite = true;
    for (double x : p95) finite = finite && std::isfinite(x);
    const bool ok = worst_gap <= 1.0 && finite && ps <= 0.5 && dsp <= 0.2;
    return Outcome{ok, "sup |pi_D - pi_C| " + fmt(worst_gap) + "; p95 median " + fmt(pm) + ", max deviation " +
                           fmt(100 * ps) + "%; D_hat median " + fmt(dm) + ", max deviation " + fmt(100 * dsp) + "%"};
  });

  criterion(9, "wedge lemma on 1000 fuzzed integrands", 60.0, [] {
    const WedgeFuzz f = fuzz_wedge(99, 1000);
    return Outcome{f.trials == 1000 && f.violations == 0,
                   std::to_string(f.violations) + " violations in " + std::to_string(f.trials) +
                       ", min relative slack " + fmt(f.min_slack)};
  });

  criterion(10, "tail routes A and B agree at every saddle", 120.0, [] {
    double worst = 0.0;
    int n = 0;
    for (double b : kScales)
      for (int K : {0, 1}) {
        const ZetaContext ctx = ZetaContext::at_tau(toy(b), K);
        for (const auto& sp : saddles(b, K).saddles) {
          worst = std::max(worst, ctx.tail_routes(sp.point()).rel_diff);
          ++n;
        }
      }
    return Outcome{worst < 1e-10, std::to_string(n) + " saddles, max relative difference " + fmt(worst)};
  });

  std::cout << (10 - g_failed) << "/10 criteria passed" << std::endl;
  return g_failed == 0 ? 0 : 1;
}
