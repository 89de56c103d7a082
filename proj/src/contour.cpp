#include "beurling/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "beurling/quadrature.hpp"

namespace beurling {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kCellStep = 0.05;  // log-spacing of bound cells
constexpr double kExactReach = 3.0; // |t - tau| up to which e^f g is evaluated exactly

double logsumexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(e^hi - e^lo) for hi > lo.
double log_diff(double hi, double lo) {
  if (lo == kNegInf) return hi;
  return hi + std::log(-std::expm1(lo - hi));
}

// log(t + 2) from log t.
double log_t_plus_2(double log_t) {
  if (log_t == kNegInf) return std::log(2.0);
  if (log_t > 40) return log_t;
  return std::log(std::exp(log_t) + 2.0);
}

// int_0^1 of the eta-type bound with the given min |v| (as a log) and the xi bound.
double row_bound(double a0, double lA, double lB, double dC, double log_v, double log_vt, double log_w) {
  auto eta_b = [&](double a, double lv) {
    const double closed = (a == 0.0) ? (lB - lA) / 4.0
                                     : (std::exp(a * lB) - std::exp(a * lA)) / (4.0 * a);
    if (lv == kNegInf) return closed;
    const double m = std::max(a * lB, a * lA);
    const double lsum = m + std::log(std::exp(a * lB - m) + std::exp(a * lA - m));
    const double decay = std::exp(lsum - std::log(4.0) - lv);
    return std::min(closed, decay);
  };
  auto f = [&](double r) {
    const double a = a0 - r;
    const double xi = 0.5 * dC * std::exp(std::max(a * lB, a * (lB + dC)));
    const double xi2 = log_w == kNegInf ? xi
                                        : std::min(xi, std::exp(std::max(a * lB, a * (lB + dC)) - log_w));
    return eta_b(a, log_v) + eta_b(a, log_vt) + xi2;
  };
  return gauss_kronrod(f, 0.0, 1.0, 0.0, 1e-6, 200, 4).value;
}

double log_tau(const ZetaContext& ctx, int k) { return ctx.table().row(k).logtau_d; }

}  // namespace

std::string track_name(Track t) { return t == Track::Continuous ? "continuous" : "discrete"; }

Track track_from_name(const std::string& s) {
  if (s == "continuous") return Track::Continuous;
  if (s == "discrete") return Track::Discrete;
  throw Error("unknown track: " + s);
}

double segment_sum_bound_far(const ZetaContext& ctx, double sigma_lo, double log_t_lo, double log_t_hi) {
  double acc = 0.0;
  for (int k = 0; k <= ctx.K(); ++k) {
    const auto& r = ctx.row(k);
    const double lt = log_tau(ctx, k);
    double log_v;
    if (lt >= log_t_lo && lt <= log_t_hi) log_v = kNegInf;
    else if (lt < log_t_lo) log_v = log_diff(log_t_lo, lt);
    else log_v = log_diff(lt, log_t_hi);
    const double log_vt = lt;
    acc += row_bound(1.0 - sigma_lo, r.lA, r.lB, r.dC, log_v, log_vt, log_t_lo);
  }
  return acc;
}

double segment_sum_bound_near(const ZetaContext& ctx, double sigma_lo, double u_lo, double u_hi) {
  const int K = ctx.K();
  const double ltK = log_tau(ctx, K);
  const double tauK = std::exp(ltK);
  double acc = 0.0;
  for (int k = 0; k <= K; ++k) {
    const auto& r = ctx.row(k);
    double vmin;
    if (k == K) {
      vmin = (u_lo <= 0.0 && u_hi >= 0.0) ? 0.0 : std::min(std::abs(u_lo), std::abs(u_hi));
    } else {
      const double gap = -tauK * std::expm1(log_tau(ctx, k) - ltK);  // tau_K - tau_k
      vmin = std::max(0.0, gap + u_lo);
    }
    const double log_v = vmin > 0 ? std::log(vmin) : kNegInf;
    const double log_vt = std::log(std::exp(log_tau(ctx, k)) + tauK + std::min(u_lo, 0.0));
    const double log_w = std::log(std::max(tauK + u_lo, 1e-300));
    acc += row_bound(1.0 - sigma_lo, r.lA, r.lB, r.dC, log_v, log_vt, log_w);
  }
  return acc;
}

namespace {

struct BoundCtx {
  const ZetaContext& ctx;
  double D;  // discrete track: exp(D sqrt(log(t + 2)))
};

// (1/pi) sup|F| length on a near cell [sigma_lo, sigma_hi] x [tau + u_lo, tau + u_hi].
double near_cell(const BoundCtx& b, double s_lo, double s_hi, double u_lo, double u_hi) {
  const double lx = b.ctx.logx();
  const double tau = std::exp(log_tau(b.ctx, b.ctx.K()));
  const double t_lo = tau + u_lo;
  const double pole = std::max(t_lo, std::min(std::abs(1.0 - s_lo), std::abs(1.0 - s_hi)));
  const double len = (s_hi - s_lo) + (u_hi - u_lo);
  const double lt_hi = std::log(tau + u_hi);
  return s_hi * lx - std::log(pole) + segment_sum_bound_near(b.ctx, s_lo, u_lo, u_hi) +
         b.D * std::sqrt(log_t_plus_2(lt_hi)) + std::log(len) - std::log(kPi);
}

// Same on a far cell with t in [e^{lo}, e^{hi}].
double far_cell(const BoundCtx& b, double s_lo, double s_hi, double lt_lo, double lt_hi, double log_len) {
  const double lx = b.ctx.logx();
  const double pole = std::max(lt_lo == kNegInf ? kNegInf : lt_lo, std::log(std::min(std::abs(1.0 - s_lo), std::abs(1.0 - s_hi)) + 1e-300));
  return s_hi * lx - pole + segment_sum_bound_far(b.ctx, s_lo, lt_lo, lt_hi) +
         b.D * std::sqrt(log_t_plus_2(lt_hi)) + log_len - std::log(kPi);
}

// Vertical near piece at sigma over |u| in [a, b] (a, b > 0) with sign.
double near_vertical(const BoundCtx& bc, double sigma, double a, double b, int sign) {
  double acc = kNegInf;
  double lo = a;
  while (lo < b) {
    const double hi = std::min(b, lo * std::exp(kCellStep) + 1e-9);
    const double u_lo = sign > 0 ? lo : -hi;
    const double u_hi = sign > 0 ? hi : -lo;
    acc = logsumexp(acc, near_cell(bc, sigma, sigma, u_lo, u_hi));
    lo = hi;
  }
  return acc;
}

// Vertical far piece at sigma over log t in [lt0, lt1]; beyond log tau_K + 60 the
// remaining stretch is bounded in one step with the bound at its lower end.
double far_vertical(const BoundCtx& bc, double sigma, double lt0, double lt1) {
  double acc = kNegInf;
  if (lt0 == kNegInf) {
    acc = far_cell(bc, sigma, sigma, kNegInf, 0.0, 0.0);
    lt0 = 0.0;
  }
  const double cut = log_tau(bc.ctx, bc.ctx.K()) + 60.0;
  double lo = lt0;
  while (lo < lt1 && lo < cut) {
    const double hi = std::min({lt1, lo + kCellStep, cut});
    acc = logsumexp(acc, far_cell(bc, sigma, sigma, lo, hi, log_diff(hi, lo)));
    lo = hi;
  }
  if (lo < lt1) {
    // int dt/t over the rest, with the bound at the lower end.
    const double lx = bc.ctx.logx();
    const double v = sigma * lx - lo + segment_sum_bound_far(bc.ctx, sigma, lo, std::numeric_limits<double>::infinity()) +
                     bc.D * std::sqrt(log_t_plus_2(lt1)) + lo + std::log(lt1 - lo) - std::log(kPi);
    acc = logsumexp(acc, v);
  }
  return acc;
}

double horizontal_far(const BoundCtx& bc, double s0, double s1, double lt) {
  double acc = kNegInf;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    const double a = std::min(s0, s1) + std::abs(s1 - s0) * i / n;
    const double b = std::min(s0, s1) + std::abs(s1 - s0) * (i + 1) / n;
    acc = logsumexp(acc, far_cell(bc, a, b, lt, lt, std::log(b - a)));
  }
  return acc;
}

double horizontal_near(const BoundCtx& bc, double s0, double s1, double u) {
  double acc = kNegInf;
  const int n = 20;
  for (int i = 0; i < n; ++i) {
    const double a = std::min(s0, s1) + std::abs(s1 - s0) * i / n;
    const double b = std::min(s0, s1) + std::abs(s1 - s0) * (i + 1) / n;
    const double c = near_cell(bc, a, b, u, u);
    acc = logsumexp(acc, c);
  }
  return acc;
}

struct ExactStats {
  double log_max = kNegInf;
  double log_abs_int = kNegInf;
  int nodes = 0;
  bool cos_ok = true;
};

ExactStats exact_polyline(const BoundCtx& bc, const std::vector<SPoint>& pts) {
  ExactStats st;
  const double lB = bc.ctx.logB();
  double prev = kNegInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double lm = bc.ctx.perron_integrand(pts[i]).logmag;
    st.log_max = std::max(st.log_max, lm);
    if (std::cos(pts[i].u * lB) > 1e-12) st.cos_ok = false;
    if (i > 0) {
      const double h = std::hypot(pts[i].sigma - pts[i - 1].sigma, pts[i].u - pts[i - 1].u);
      if (h > 0) st.log_abs_int = logsumexp(st.log_abs_int, std::log(0.5 * h) + logsumexp(lm, prev));
    }
    prev = lm;
  }
  st.nodes = static_cast<int>(pts.size());
  st.log_abs_int -= std::log(kPi);
  return st;
}

std::vector<SPoint> straight(const Endpoint& a, const Endpoint& b, int n) {
  std::vector<SPoint> pts;
  for (int i = 0; i <= n; ++i) {
    const double r = static_cast<double>(i) / n;
    pts.push_back({a.sigma + (b.sigma - a.sigma) * r, a.u + (b.u - a.u) * r});
  }
  return pts;
}

Endpoint near_pt(double sigma, double u) { return {sigma, u, 0.0, false}; }
Endpoint far_pt(double sigma, double log_t) { return {sigma, 0.0, log_t, true}; }

double endpoint_log_t(const Endpoint& e, double ltau) {
  if (e.far) return e.log_t;
  return ltau + std::log1p(e.u / std::exp(ltau));
}

}  // namespace

Contour assemble(const ZetaContext& ctx, const std::vector<SaddlePoint>& saddles,
                 const std::vector<PathPolyline>& paths, Track track, double D_hat, double T2_offset) {
  const double lB = ctx.logB(), lx = ctx.logx();
  const auto& P = ctx.table().params;
  const int M = saddle_count(lB);
  if (static_cast<int>(saddles.size()) != 2 * M + 1 || paths.size() != saddles.size())
    throw Error("assemble: need saddles and paths for all |m| <= M");
  Contour c;
  c.track = track;
  c.K = ctx.K();
  c.M = M;
  c.D_hat = D_hat;
  c.sigma0 = saddles[M].sigma;
  c.sigma_prime = c.sigma0 - 2.0 * P.c * std::pow(lB, P.alpha) / lx;
  c.T2_offset = T2_offset > 0 ? T2_offset : std::exp(std::pow(lB, P.alpha / 2.0));
  if (c.T2_offset <= std::max(std::abs(paths.front().nodes.front().u), paths.back().nodes.back().u))
    throw Error("assemble: T2 offset must exceed the saddle-path span");
  const double ltau = log_tau(ctx, ctx.K());
  const double tau = std::exp(ltau);
  c.log_T = (track == Track::Continuous ? 2.0 : 4.0) * lx;
  c.sigma_dd = c.sigma_prime - 2.0 * D_hat / std::sqrt(lx);
  c.sigma_2tau = 1.0 - (std::log(2.0) + ltau) / lB;
  c.case_id = c.sigma_2tau <= c.sigma_dd ? 1 : 2;

  const auto& first = paths.front().nodes.front();
  const auto& last = paths.back().nodes.back();
  c.T1_minus = first.u;
  c.T1_plus = last.u;
  auto add = [&](const std::string& id, const std::string& kind, int m, Endpoint a, Endpoint b) {
    ContourSegment s;
    s.id = id;
    s.kind = kind;
    s.m = m;
    s.a = a;
    s.b = b;
    c.segments.push_back(s);
  };
  const double s0 = c.sigma0, sp = c.sigma_prime, T2 = c.T2_offset;
  add("delta_3-", "delta_3", 0, far_pt(sp, kNegInf), near_pt(sp, -T2));
  add("delta_2-", "delta_2", 0, near_pt(sp, -T2), near_pt(s0, -T2));
  add("delta_1-", "delta_1", 0, near_pt(s0, -T2), near_pt(s0, c.T1_minus));
  add("join-", "join", 0, near_pt(s0, c.T1_minus), near_pt(first.sigma, first.u));
  for (int j = -M; j <= M; ++j) {
    const auto& g = paths[j + M];
    add("gamma_" + std::to_string(j), "gamma", j, near_pt(g.nodes.front().sigma, g.nodes.front().u),
        near_pt(g.nodes.back().sigma, g.nodes.back().u));
    if (j < M) {
      const auto& h = paths[j + 1 + M];
      const int id = (j + 1 > 0) ? j + 1 : j;
      add("upsilon_" + std::to_string(id), "upsilon", id, near_pt(g.nodes.back().sigma, g.nodes.back().u),
          near_pt(h.nodes.front().sigma, h.nodes.front().u));
    }
  }
  add("join+", "join", 0, near_pt(last.sigma, last.u), near_pt(s0, c.T1_plus));
  add("delta_1+", "delta_1", 0, near_pt(s0, c.T1_plus), near_pt(s0, T2));
  add("delta_2+", "delta_2", 0, near_pt(s0, T2), near_pt(sp, T2));
  if (track == Track::Continuous) {
    add("delta_3+", "delta_3", 0, near_pt(sp, T2), far_pt(sp, c.log_T));
    add("delta_4+", "delta_4", 0, far_pt(sp, c.log_T), far_pt(1.5, c.log_T));
  } else {
    const double l2tau = std::log(2.0) + ltau;
    add("delta~_3+", "delta~_3", 0, near_pt(sp, T2), near_pt(sp, tau));
    add("delta~_4+", "delta~_4", 0, near_pt(sp, tau), near_pt(c.sigma_2tau, tau));
    if (c.case_id == 1) {
      add("delta~_5+", "delta~_5", 0, near_pt(c.sigma_2tau, tau), far_pt(c.sigma_2tau, c.log_T));
      add("delta~_6+", "delta~_6", 0, far_pt(c.sigma_2tau, c.log_T), far_pt(1.5, c.log_T));
    } else {
      const double lT3 = (1.0 - c.sigma_dd) * lB;
      add("delta~_5a+", "delta~_5", 0, near_pt(c.sigma_2tau, tau), far_pt(c.sigma_dd, lT3));
      add("delta~_5b+", "delta~_5", 0, far_pt(c.sigma_dd, lT3), far_pt(c.sigma_dd, c.log_T));
      add("delta~_6+", "delta~_6", 0, far_pt(c.sigma_dd, c.log_T), far_pt(1.5, c.log_T));
    }
    (void)l2tau;
  }

  // Endpoint continuity.
  for (std::size_t i = 0; i + 1 < c.segments.size(); ++i) {
    const Endpoint& e1 = c.segments[i].b;
    const Endpoint& e2 = c.segments[i + 1].a;
    bool ok = std::abs(e1.sigma - e2.sigma) <= 1e-10;
    if (!e1.far && !e2.far) ok = ok && std::abs(e1.u - e2.u) <= 1e-10 * std::max(1.0, std::abs(e1.u));
    else ok = ok && std::abs(endpoint_log_t(e1, ltau) - endpoint_log_t(e2, ltau)) <= 1e-10 * std::max(1.0, ltau);
    if (!ok) throw Error("assemble: endpoint mismatch between " + c.segments[i].id + " and " + c.segments[i + 1].id);
  }
  return c;
}

void connector_bounds(const ZetaContext& ctx, Contour& c) {
  const BoundCtx bc{ctx, c.track == Track::Discrete ? c.D_hat : 0.0};
  const double lB = ctx.logB();
  const double ltau = log_tau(ctx, ctx.K());
  const double tau = std::exp(ltau);
  // The discrete factor near tau is taken at its largest value on the piece.
  const double d_near = bc.D * std::sqrt(log_t_plus_2(std::log(2.0) + ltau));

  auto set_exact = [&](ContourSegment& s, const std::vector<SPoint>& pts) {
    const ExactStats st = exact_polyline(bc, pts);
    double len = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      len += std::hypot(pts[i + 1].sigma - pts[i].sigma, pts[i + 1].u - pts[i].u);
    s.exact = true;
    s.nodes = st.nodes;
    s.length = len;
    s.log_length = std::log(len);
    s.log_abs_integral = st.log_abs_int + d_near;
    s.log_bound = s.log_abs_integral;
    s.cos_nonpositive = st.cos_ok;
  };

  for (auto& s : c.segments) {
    const Endpoint& a = s.a;
    const Endpoint& b = s.b;
    if (s.kind == "gamma") {
      // Path nodes are re-read from the endpoints' polyline by the caller.
      continue;
    }
    if (s.kind == "upsilon" || s.kind == "join") {
      const double len = std::hypot(b.sigma - a.sigma, b.u - a.u);
      const int n = std::max(32, static_cast<int>(len * lB * 20.0));
      set_exact(s, straight(a, b, n));
      if (s.kind != "upsilon") s.cos_nonpositive = true;
      continue;
    }
    if (s.kind == "delta_1") {
      // Exact near tau, cell bounds further out.
      const int sign = (a.u + b.u) > 0 ? 1 : -1;
      const double u_in = std::min(std::abs(a.u), std::abs(b.u));
      const double u_out = std::max(std::abs(a.u), std::abs(b.u));
      const double u_mid = std::min(kExactReach, u_out);
      const Endpoint e0 = near_pt(a.sigma, sign * u_in);
      const Endpoint e1 = near_pt(a.sigma, sign * u_mid);
      const int n = std::max(32, static_cast<int>((u_mid - u_in) * lB * 10.0));
      set_exact(s, straight(e0, e1, n));
      const double exact_part = s.log_bound;
      double cells = kNegInf;
      if (u_out > u_mid) cells = near_vertical(bc, a.sigma, u_mid, u_out, sign);
      s.exact = false;
      s.log_bound = logsumexp(exact_part, cells);
      s.length = u_out - u_in;
      s.log_length = std::log(s.length);
      continue;
    }
    if (s.kind == "delta_2" || s.kind == "delta~_4") {
      s.log_bound = horizontal_near(bc, a.sigma, b.sigma, a.u);
      s.length = std::abs(b.sigma - a.sigma);
      s.log_length = std::log(s.length);
      continue;
    }
    if (s.kind == "delta_3" && !a.far && b.far) {  // delta_3+
      const double part1 = near_vertical(bc, a.sigma, a.u, tau, +1);
      const double part2 = far_vertical(bc, a.sigma, std::log(2.0) + ltau, b.log_t);
      s.log_bound = logsumexp(part1, part2);
      s.log_length = b.log_t;
      continue;
    }
    if (s.kind == "delta_3" && a.far) {  // delta_3- from the real axis
      const double part1 = far_vertical(bc, a.sigma, kNegInf, ltau - std::log(2.0));
      const double part2 = near_vertical(bc, a.sigma, -b.u, 0.5 * tau, -1);
      s.log_bound = logsumexp(part1, part2);
      s.log_length = ltau;
      continue;
    }
    if (s.kind == "delta~_3") {
      s.log_bound = near_vertical(bc, a.sigma, a.u, b.u, +1);
      s.log_length = std::log(b.u - a.u);
      continue;
    }
    if (s.kind == "delta~_5") {
      const double lt0 = a.far ? a.log_t : std::log(2.0) + ltau;
      if (std::abs(a.sigma - b.sigma) < 1e-15) {
        s.log_bound = far_vertical(bc, a.sigma, lt0, b.log_t);
      } else {
        // Curve sigma(t) = 1 - log t/log B between 2 tau and T_3.
        double acc = kNegInf;
        for (double lo = lt0; lo < b.log_t; lo += kCellStep) {
          const double hi = std::min(b.log_t, lo + kCellStep);
          const double s_lo = 1.0 - hi / lB, s_hi = 1.0 - lo / lB;
          const double log_len = logsumexp(log_diff(hi, lo), std::log(s_hi - s_lo));
          acc = logsumexp(acc, far_cell(bc, s_lo, s_hi, lo, hi, log_len));
        }
        s.log_bound = acc;
      }
      s.log_length = b.log_t;
      continue;
    }
    if (s.kind == "delta_4" || s.kind == "delta~_6") {
      s.log_bound = horizontal_far(bc, a.sigma, b.sigma, a.log_t);
      s.length = std::abs(b.sigma - a.sigma);
      s.log_length = std::log(s.length);
      continue;
    }
    throw Error("connector_bounds: unhandled segment " + s.id);
  }
}

nlohmann::json ContourSegment::to_json() const {
  auto ep = [](const Endpoint& e) {
    nlohmann::json j = {{"sigma", e.sigma}};
    if (e.far) j["log_t"] = e.log_t; else j["t_minus_tau"] = e.u;
    return j;
  };
  nlohmann::json j = {{"id", id},       {"kind", kind},           {"m", m},
                      {"from", ep(a)},  {"to", ep(b)},            {"exact", exact},
                      {"nodes", nodes}, {"log_length", log_length}, {"log_bound", log_bound}};
  if (exact) j["log_abs_integral"] = log_abs_integral;
  if (kind == "upsilon") j["cos_nonpositive"] = cos_nonpositive;
  return j;
}

nlohmann::json Contour::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments) segs.push_back(s.to_json());
  return {{"track", track_name(track)},
          {"K", K},
          {"M", M},
          {"case", case_id},
          {"sigma0", sigma0},
          {"sigma_prime", sigma_prime},
          {"sigma_second", sigma_dd},
          {"sigma_at_2tau", sigma_2tau},
          {"T1_plus_offset", T1_plus},
          {"T1_minus_offset", T1_minus},
          {"T2_offset", T2_offset},
          {"log_T", log_T},
          {"D_hat", D_hat},
          {"segments", segs}};
}

std::string Contour::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "segment,kind,log_bound\n";
  for (const auto& s : segments) os << s.id << ',' << s.kind << ',' << s.log_bound << '\n';
  return os.str();
}

double perron_error_bound_log(double logx, double kappa, double logT) {
  // delta_1 part: x^kappa/(1 + T log x).
  const double atom = kappa * logx - logsumexp(0.0, logT + std::log(logx));
  // Density part in d = log u - log x, substituting |d| = e^y/T:
  // x int e^{(1-kappa)d} (2 + log x + d) / (1 + T|d|) dd.
  auto side = [&](int sign) {
    const double y_hi = sign > 0 ? logT + std::log(60.0 / (kappa - 1.0) + logx)
                                 : logT + std::log(logx);
    const double y_lo = -40.0;
    const int n = static_cast<int>((y_hi - y_lo) / 0.01) + 1;
    const double h = (y_hi - y_lo) / n;
    // Log-domain trapezoid.
    double acc = kNegInf;
    for (int i = 0; i <= n; ++i) {
      const double y = y_lo + h * i;
      const double ad = std::exp(y - logT);  // |d|
      const double d = sign * ad;
      const double l = logx + d;
      if (l < 0) break;
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      const double logg = (1.0 - kappa) * d + std::log(2.0 + l) + y - logsumexp(0.0, y) - logT;
      acc = logsumexp(acc, std::log(w * h) + logg);
    }
    return acc;
  };
  const double dens = logx + logsumexp(side(+1), side(-1));
  return logsumexp(atom, dens);
}

namespace {

int oscillation_pieces(double T, double freq) {
  return std::max(1, static_cast<int>(std::ceil(T * freq / (2.0 * kPi))));
}

}  // namespace

PerronValue perron_vertical(const LogZetaFn& log_zeta, double x, double kappa, double T, double tol) {
  if (!(kappa > 1.0)) throw Error("perron_vertical: kappa must exceed 1");
  const double lx = std::log(x);
  auto f = [&](double t) {
    const cplx s(kappa, t);
    return std::exp(s * lx + log_zeta(s) - std::log(s)).real();
  };
  const int pieces = oscillation_pieces(T, std::max(lx, 1.0) + 3.0);
  auto r = gauss_kronrod(f, 0.0, T, tol * x, 1e-12, pieces * 4 + 1000, pieces);
  if (!r.converged) throw Error("perron_vertical: quadrature tolerance not met");
  PerronValue out;
  out.value = r.value / kPi;
  out.quad_error = r.error / kPi;
  out.intervals = r.intervals;
  out.error_bound = std::exp(perron_error_bound_log(lx, kappa, std::log(T)));
  return out;
}

double perron_vertical_full(const LogZetaFn& log_zeta, double x, double kappa, double T, double tol) {
  const double lx = std::log(x);
  auto f = [&](double t) -> cplx {
    const cplx s(kappa, t);
    return std::exp(s * lx + log_zeta(s) - std::log(s));
  };
  const int pieces = oscillation_pieces(2 * T, std::max(lx, 1.0) + 3.0);
  auto r = gauss_kronrod(f, -T, T, tol * x, 1e-12, pieces * 4 + 1000, pieces);
  // (1/2 pi i) int F i dt.
  return (r.value / (2.0 * kPi)).real();
}

ClosedLoopReport closed_loop(const SequenceTable& t, int K, double x, double kappa, double T, double sigma_left,
                             double tol) {
  if (!(sigma_left > 0.0 && sigma_left < 1.0)) throw Error("closed_loop: sigma_left must lie in (0, 1)");
  ClosedLoopReport rep;
  rep.x = x;
  rep.kappa = kappa;
  rep.T = T;
  rep.sigma_left = sigma_left;
  HpDigits scope(t.digits);
  const ZetaContext ctx(t, K, hpf(0), hpf(std::log(x)));
  const double lx = std::log(x);
  auto F = [&](double sigma, double tt) -> cplx {
    const SPoint p{sigma, tt};
    return ctx.x_pow_zeta(p).to_cplx() / ctx.s_value(p);
  };
  double freq = lx;
  for (int k = 0; k <= K; ++k) freq = std::max(freq, ctx.row(k).lB);
  const int pieces = oscillation_pieces(T, freq + 1.0);
  const double abs_tol = tol * x;
  auto vert = [&](double sigma) {
    auto f = [&](double tt) { return F(sigma, tt).real(); };
    auto r = gauss_kronrod(f, 0.0, T, abs_tol, 1e-13, pieces * 4 + 1000, pieces);
    if (!r.converged) throw Error("closed_loop: vertical quadrature did not converge");
    rep.intervals += r.intervals;
    rep.quad_error += r.error / kPi;
    return r.value / kPi;
  };
  rep.vertical = vert(kappa);
  rep.left_line = vert(sigma_left);
  {
    auto f = [&](double sigma) { return F(sigma, T).imag(); };
    auto r = gauss_kronrod(f, sigma_left, kappa, abs_tol, 1e-13, 2000, 8);
    rep.horizontal = r.value / kPi;
    rep.quad_error += r.error / kPi;
    rep.intervals += r.intervals;
  }
  rep.residue = residue_and_density(t, K).rho_K * x;
  rep.shifted = rep.left_line + rep.horizontal;
  rep.residual = rep.vertical - rep.residue - rep.shifted;
  rep.relative_residual = std::abs(rep.residual) / std::abs(rep.vertical);
  rep.perron_error_bound = std::exp(perron_error_bound_log(lx, kappa, std::log(T)));
  rep.oracle_N = x < std::exp(t.row(0).logA_d) ? x : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

nlohmann::json ClosedLoopReport::to_json() const {
  nlohmann::json j = {{"x", x},
                      {"kappa", kappa},
                      {"T", T},
                      {"sigma_left", sigma_left},
                      {"vertical", vertical},
                      {"residue", residue},
                      {"left_line", left_line},
                      {"horizontal", horizontal},
                      {"shifted", shifted},
                      {"residual", residual},
                      {"relative_residual", relative_residual},
                      {"quad_error", quad_error},
                      {"perron_error_bound", perron_error_bound},
                      {"intervals", intervals}};
  if (std::isfinite(oracle_N)) j["oracle_N"] = oracle_N;
  return j;
}

double envelope_log(double logx, double alpha, double c, double b) {
  const double l2 = std::log(logx), l3 = std::log(l2);
  return logx - std::pow(c * (alpha + 1.0), 1.0 / (alpha + 1.0)) * std::pow(logx * l2, alpha / (alpha + 1.0)) *
                    (1.0 + b * l3 / l2);
}

PerronReport shifted_total(const SequenceTable& t, int K, const ShiftedOptions& opt) {
  const ZetaContext ctx = ZetaContext::at_tau(t, K);
  const double lB = ctx.logB(), lx = ctx.logx();
  const auto& P = t.params;
  const int M = saddle_count(lB);
  std::vector<SaddlePoint> saddles;
  std::vector<PathPolyline> paths;
  for (int m = -M; m <= M; ++m) saddles.push_back(find_saddle(ctx, m));
  const SaddlePoint& s0 = saddles[M];
  for (int m = -M; m <= M; ++m) {
    const auto& sp = saddles[m + M];
    paths.push_back(m == 0 ? trace_gamma0(ctx, sp) : trace_gamma_m(ctx, sp, taylor_radius(ctx, sp)));
  }
  PerronReport rep;
  rep.track = opt.track;
  rep.K = K;
  rep.s0 = contribution_s0(ctx, s0, paths[M], taylor_radius(ctx, s0));
  rep.log_sm_total = kNegInf;
  for (int m = -M; m <= M; ++m) {
    if (m == 0) continue;
    rep.sm.push_back(contribution_sm_bound(ctx, saddles[m + M], s0, paths[m + M]));
    rep.log_sm_total = logsumexp(rep.log_sm_total, rep.sm.back().log_bound);
  }
  auto build = [&](double T2) {
    Contour c = assemble(ctx, saddles, paths, opt.track, opt.D_hat, T2);
    connector_bounds(ctx, c);
    // Gamma_m pieces in the contour carry the path bounds.
    for (auto& s : c.segments) {
      if (s.kind != "gamma") continue;
      const auto& g = paths[s.m + M];
      s.length = g.length;
      s.log_length = std::log(g.length);
      s.nodes = static_cast<int>(g.nodes.size());
      s.exact = true;
      double mx = kNegInf;
      for (const auto& n : g.nodes) mx = std::max(mx, ctx.perron_integrand({n.sigma, n.u}).logmag);
      s.log_bound = mx + std::log(g.length) - std::log(kPi);
      if (s.m != 0)
        for (const auto& b : rep.sm)
          if (b.m == s.m) s.log_bound = s.log_abs_integral = b.log_bound;
    }
    double total = kNegInf;
    for (const auto& s : c.segments)
      if (s.kind != "gamma") total = logsumexp(total, s.log_bound);
    return std::make_pair(c, total);
  };
  const double T2_default = std::exp(std::pow(lB, P.alpha / 2.0));
  auto [c_def, tot_def] = build(opt.T2_offset > 0 ? opt.T2_offset : T2_default);
  rep.contour = c_def;
  rep.log_connector_total = tot_def;
  rep.margin_default_T2 = rep.s0.log_lower - logsumexp(rep.log_sm_total, tot_def);
  if (opt.T2_offset < 0) {
    // Scan T2 offsets below the default in steps of e^{-1/2}, keep the smallest total.
    const double floor_u = 1.5 * std::max(rep.contour.T1_plus, -rep.contour.T1_minus);
    for (double T2 = T2_default * std::exp(-0.5); T2 > floor_u; T2 *= std::exp(-0.5)) {
      auto [c, tot] = build(T2);
      if (tot < rep.log_connector_total) {
        rep.contour = c;
        rep.log_connector_total = tot;
      }
    }
  }
  rep.log_others_total = logsumexp(rep.log_sm_total, rep.log_connector_total);
  rep.margin = rep.s0.log_lower - rep.log_others_total;
  rep.log_residue_term = residue_and_density(t, K).log_rho_K + lx;
  rep.log_perron_error = perron_error_bound_log(lx, 1.5, rep.contour.log_T);
  rep.b = opt.b > 0 ? opt.b : P.alpha / (P.alpha + 1.0) + 0.05;
  rep.log_envelope = envelope_log(lx, P.alpha, P.c, rep.b);
  return rep;
}

nlohmann::json PerronReport::to_json() const {
  nlohmann::json sms = nlohmann::json::array();
  for (const auto& b : sm) sms.push_back(b.to_json());
  return {{"track", track_name(track)},
          {"K", K},
          {"log_residue_term", log_residue_term},
          {"s0", s0.to_json()},
          {"sm", sms},
          {"log_sm_total", log_sm_total},
          {"log_connector_total", log_connector_total},
          {"log_others_total", log_others_total},
          {"margin", margin},
          {"margin_default_T2", margin_default_T2},
          {"log_perron_error", log_perron_error},
          {"b", b},
          {"log_envelope", log_envelope},
          {"contour", contour.to_json()}};
}

}  // namespace beurling
