#include "beurling/construction.hpp"

#include <algorithm>
#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "beurling/quadrature.hpp"

namespace beurling {

std::string mode_name(BuildMode m) { return m == BuildMode::Strict ? "strict" : "toy"; }

BuildMode mode_from_name(const std::string& s) {
  if (s == "strict") return BuildMode::Strict;
  if (s == "toy") return BuildMode::Toy;
  throw Error("unknown mode: " + s);
}

namespace {

GrowthRule default_growth(BuildMode m) {
  GrowthRule g;
  if (m == BuildMode::Strict) {
    g.f_coef = 1.0;
    g.f_pow = 2.0;
  }
  return g;
}

double next_floor(const ParamSet& p, int k, double logB, double logC, double logx) {
  const auto& g = p.growth;
  double fl = std::log(4.0) + 2.0 * logC;
  fl = std::max(fl, g.f_coef * std::pow(logB, g.f_pow));
  fl = std::max(fl, g.g_const + g.g_slope * k);
  if (p.mode == BuildMode::Toy) fl = std::max(fl, 2.0 * logx + g.x_margin);
  return fl;
}

// w log w = V, double precision.
double solve_wlogw(double V) {
  double w = std::max(3.0, V / std::log(std::max(V, 3.0)));
  for (int i = 0; i < 100; ++i) {
    const double q = std::log(w) + std::log(std::log(w)) - std::log(V);
    const double dq = 1.0 / w + 1.0 / (w * std::log(w));
    const double step = q / dq;
    w -= step;
    if (std::abs(step) < 1e-15 * w) break;
  }
  return w;
}

hpf solve_wlogw_hp(const hpf& V) {
  hpf w = solve_wlogw(to_d(V));
  const hpf logV = log(V);
  const hpf eps = pow(hpf(10), -static_cast<int>(hp_digits()) + 5);
  for (int i = 0; i < 200; ++i) {
    hpf lw = log(w);
    hpf q = lw + log(lw) - logV;
    hpf dq = 1 / w + 1 / (w * lw);
    hpf step = q / dq;
    w -= step;
    if (abs(step) < eps * w) return w;
  }
  throw Error("x_k solver did not converge");
}

// Smallest u >= floor with u exp(c u^alpha) in 4 pi Z.
hpf solve_lattice(double floor, double alpha, double c) {
  const hpf a(alpha), cc(c);
  const hpf u0(floor);
  const hpf g0 = u0 * exp(cc * pow(u0, a));
  const hpf n = ceil(g0 / (4 * hp_pi()));
  const hpf target = log(4 * hp_pi() * n);
  const hpf eps = pow(hpf(10), -static_cast<int>(hp_digits()) + 5);
  hpf u = u0;
  for (int i = 0; i < 200; ++i) {
    hpf h = log(u) + cc * pow(u, a) - target;
    hpf dh = 1 / u + cc * a * pow(u, a - 1);
    hpf step = h / dh;
    u -= step;
    if (abs(step) < eps * u) return u;
  }
  throw Error("lattice root solver did not converge");
}

// ½ (e^l - 1)/l and its derivatives.
double h_derivative(int j, double l) {
  double binom = 1.0, fact = 1.0, acc = 0.0;
  double sign = 1.0;
  for (int i = 0; i <= j; ++i) {
    if (i > 0) {
      binom = binom * (j - i + 1) / i;
      fact *= i;
      sign = -sign;
    }
    acc += binom * sign * fact / std::pow(l, i + 1);
  }
  double jf = 1.0;
  for (int i = 2; i <= j; ++i) jf *= i;
  const double tail = ((j % 2) ? -1.0 : 1.0) * jf / std::pow(l, j + 1);
  return 0.5 * (std::exp(l) * acc - tail);
}

}  // namespace

void ParamSet::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must lie in (0, 1]");
  if (!(c > 0.0)) throw Error("c must be positive");
  if (alpha == 1.0 && c > 1.0) throw Error("alpha = 1 requires c <= 1");
  if (K_max < 0 || K_max > 6) throw Error("K_max must lie in [0, 6]");
  if (!(seed_logB0 >= 1.0)) throw Error("seed_logB0 must be at least 1");
  if (precision < 20) throw Error("precision must be at least 20 digits");
}

ParamSet ParamSet::toy(double seed, int K_max) {
  ParamSet p;
  p.seed_logB0 = seed;
  p.K_max = K_max;
  return p;
}

nlohmann::json ParamSet::to_json() const {
  return {{"alpha", alpha},
          {"c", c},
          {"mode", mode_name(mode)},
          {"K_max", K_max},
          {"seed_logB0", seed_logB0},
          {"precision_digits", precision},
          {"growth",
           {{"f_coef", growth.f_coef},
            {"f_pow", growth.f_pow},
            {"g_const", growth.g_const},
            {"g_slope", growth.g_slope},
            {"x_margin", growth.x_margin}}}};
}

ParamSet ParamSet::from_json(const nlohmann::json& j) {
  ParamSet p;
  p.alpha = j.value("alpha", p.alpha);
  p.c = j.value("c", p.c);
  p.mode = mode_from_name(j.value("mode", std::string("toy")));
  p.K_max = j.value("K_max", p.K_max);
  p.seed_logB0 = j.value("seed_logB0", p.seed_logB0);
  p.precision = j.value("precision_digits", p.precision);
  p.growth = default_growth(p.mode);
  if (j.contains("growth")) {
    const auto& g = j["growth"];
    p.growth.f_coef = g.value("f_coef", p.growth.f_coef);
    p.growth.f_pow = g.value("f_pow", p.growth.f_pow);
    p.growth.g_const = g.value("g_const", p.growth.g_const);
    p.growth.g_slope = g.value("g_slope", p.growth.g_slope);
    p.growth.x_margin = g.value("x_margin", p.growth.x_margin);
  }
  p.validate();
  return p;
}

const SequenceRow& SequenceTable::row(int k) const {
  if (k < 0 || k >= static_cast<int>(rows.size())) throw Error("row index out of range");
  return rows[k];
}

double SequenceTable::logA_next(int k) const {
  if (k + 1 < static_cast<int>(rows.size())) return rows[k + 1].logA_d;
  return guard.logA_d;
}

nlohmann::json SequenceTable::to_json() const {
  nlohmann::json j;
  j["params"] = params.to_json();
  j["digits"] = digits;
  j["rows"] = nlohmann::json::array();
  const int out_digits = static_cast<int>(digits);
  for (const auto& r : rows) {
    nlohmann::json q;
    q["k"] = r.k;
    q["logA"] = hp_str(r.logA, out_digits);
    q["logB"] = hp_str(r.logB, out_digits);
    q["logC"] = hp_str(r.logC, out_digits);
    q["tau"] = hp_str(r.tau, out_digits);
    q["eps"] = hp_str(r.eps, out_digits);
    q["logx"] = hp_str(r.logx, out_digits);
    q["logC_minus_logB"] = r.dC;
    q["floor_logB"] = r.floor_logB;
    q["lattice_A_residual"] = r.lattice_A;
    q["lattice_B_residual"] = r.lattice_B;
    q["phase_residual"] = r.phase_defect;
    q["eps_ratio"] = r.eps_ratio;
    q["C_equation_residual"] = r.c_residual;
    j["rows"].push_back(q);
  }
  j["guard"] = {{"logB", guard.logB_d}, {"logA", guard.logA_d}, {"logtau", guard.logtau_d}};
  return j;
}

hpf solve_Ck(const hpf& logB, const hpf& tau) {
  const hpf B = exp(logB);
  const hpf A = exp(logB / 2);
  const hpf R = (B - A) / (2 * (tau * tau + 1));
  hpf d = 2 * R / (B - 1);
  const hpf eps = pow(hpf(10), -static_cast<int>(hp_digits()) + 5);
  for (int i = 0; i < 100; ++i) {
    hpf F = B * expm1(d) - d - 2 * R;
    hpf dF = B * exp(d) - 1;
    hpf step = F / dF;
    d -= step;
    if (abs(step) <= eps * abs(d)) return d;
  }
  throw Error("C_k solver did not converge");
}

SequenceTable build_sequences(const ParamSet& p) {
  p.validate();
  const double al = p.alpha, c = p.c;
  // Cheap pass to size the working precision.
  double need = 0.0;
  {
    double lb = p.seed_logB0;
    for (int k = 0; k <= p.K_max; ++k) {
      const double w = solve_wlogw(c * (al + 1) * std::pow(lb, al + 1));
      need = std::max(need, (c * std::pow(lb, al) + std::log(w)) / std::log(10.0));
      // log C - log B is about 1/tau^2 and must survive next to log B.
      need = std::max(need, (2.0 * c * std::pow(lb, al) + std::log(lb)) / std::log(10.0));
      lb = next_floor(p, k, lb, lb, w);
    }
  }
  SequenceTable t;
  t.params = p;
  t.digits = p.precision + static_cast<unsigned>(std::ceil(need)) + 25;
  HpDigits scope(t.digits);

  double floor_l = p.seed_logB0;
  for (int k = 0; k <= p.K_max; ++k) {
    SequenceRow r;
    r.k = k;
    r.floor_logB = floor_l;
    r.logB = solve_lattice(floor_l, al, c);
    r.logA = r.logB / 2;
    r.tau = exp(hpf(c) * pow(r.logB, hpf(al)));
    const hpf two_pi = 2 * hp_pi();
    r.lattice_A = lattice_defect(r.tau * r.logA, two_pi);
    r.lattice_B = lattice_defect(r.tau * r.logB, two_pi);

    const hpf d = solve_Ck(r.logB, r.tau);
    r.logC = r.logB + d;
    {
      const hpf B = exp(r.logB);
      const hpf A = exp(r.logA);
      const hpf R = (B - A) / (2 * (r.tau * r.tau + 1));
      r.c_residual = to_d(abs(R - (B * expm1(d) - d) / 2) / B);
    }

    // Probe point: exact root at eps = 0, then move left onto the phase target.
    const hpf V = hpf(c * (al + 1)) * pow(r.logB, hpf(al + 1));
    const hpf w0 = solve_wlogw_hp(V);
    const hpf target = (k % 2 == 0) ? hp_pi() / 2 : 3 * hp_pi() / 2;
    hpf rem = r.tau * w0 - target;
    rem -= two_pi * floor(rem / two_pi);
    r.logx = w0 - rem / r.tau;
    r.eps = r.logB - pow(r.logx * log(r.logx) / hpf(c * (al + 1)), 1 / hpf(al + 1));
    r.phase_defect = lattice_defect(r.tau * r.logx - target, two_pi);
    if (r.eps < 0) throw Error("phase condition unreachable with eps >= 0");

    r.logA_d = to_d(r.logA);
    r.logB_d = to_d(r.logB);
    r.logC_d = to_d(r.logC);
    r.dC = to_d(d);
    r.logtau_d = to_d(log(r.tau));
    r.eps_d = to_d(r.eps);
    r.logx_d = to_d(r.logx);
    r.eps_ratio = r.eps_d * std::exp(r.logtau_d) * std::pow(r.logB_d, al) / std::log(r.logB_d);
    floor_l = next_floor(p, k, r.logB_d, r.logC_d, r.logx_d);
    t.rows.push_back(std::move(r));
  }
  t.guard.logB_d = floor_l;
  t.guard.logA_d = floor_l / 2;
  t.guard.logtau_d = c * std::pow(floor_l, al);

  for (int k = 0; k <= p.K_max; ++k) {
    const auto& r = t.rows[k];
    if (!(r.logA < r.logB && r.logB < r.logC)) throw Error("ordering A_k < B_k < C_k violated");
    if (!(r.logC_d < t.logA_next(k))) throw Error("ordering C_k < A_{k+1} violated");
    if (!(r.logx_d < t.logA_next(k)))
      throw Error("x_k >= A_{k+1}: the growth floor is too weak for this mode");
  }
  return t;
}

double li_log(double logx) {
  if (logx < 0) throw Error("li: x must be >= 1");
  if (logx > 700) throw Error("li: log x beyond double range");
  static std::vector<double> inv_zeta;
  double term = 1.0, sum = 0.0;
  for (int n = 1; n < 100000; ++n) {
    if (static_cast<int>(inv_zeta.size()) < n) inv_zeta.push_back(1.0 / boost::math::zeta(static_cast<double>(n + 1)));
    term *= logx / n;
    const double add = term / n * inv_zeta[n - 1];
    sum += add;
    if (n > logx && add < 1e-17 * sum) break;
  }
  return sum;
}

Construction::Construction(SequenceTable table) : table_(std::move(table)) {
  full_dev_.resize(table_.rows.size());
  for (std::size_t k = 0; k < table_.rows.size(); ++k) {
    const int kk = static_cast<int>(k);
    full_dev_[k] = R_integral(kk, point_at(kk, Anchor::B, 0.0)) + S_integral(kk, point_at(kk, Anchor::C, 0.0));
  }
}

int Construction::last(int K) const {
  const int km = table_.K_max();
  if (K < 0 || K > km) return km;
  return K;
}

namespace {

Point locate(const SequenceTable& t, const hpf& L) {
  Point pt;
  pt.logu = to_d(L);
  for (const auto& r : t.rows) {
    if (pt.logu < r.logA_d - 1e-6 || pt.logu > r.logC_d + 1e-6) continue;
    const hpf offA = L - r.logA;
    const hpf offB = L - r.logB;
    const hpf offC = L - r.logC;
    if (offA < 0 || offC > 0) continue;
    pt.k = r.k;
    pt.zone = (offB <= 0) ? Zone::R : Zone::S;
    pt.offA = to_d(offA);
    pt.offB = to_d(offB);
    pt.phase = mod_2pi(r.tau * L);
    break;
  }
  return pt;
}

}  // namespace

Point Construction::point(double logu) const {
  if (logu < 0) throw Error("point: x must be >= 1");
  HpDigits scope(table_.digits);
  return locate(table_, hpf(logu));
}

Point Construction::point_at(int k, Anchor anchor, double offset) const {
  HpDigits scope(table_.digits);
  const auto& r = table_.row(k);
  const hpf& base = anchor == Anchor::A ? r.logA : anchor == Anchor::B ? r.logB : r.logC;
  return locate(table_, base + hpf(offset));
}

double Construction::R_at_B(int k) const {
  const auto& r = table_.row(k);
  const double it2 = std::exp(-2.0 * r.logtau_d);
  return std::exp(r.logB_d) * (-std::expm1(-r.logA_d)) * it2 / (2.0 * (1.0 + it2));
}

DeviationValues Construction::deviation(int k, const Point& p) const {
  DeviationValues v{0, 0, 0, 0};
  if (p.k != k) return v;
  const auto& r = table_.row(k);
  if (p.zone == Zone::R) {
    const double it = std::exp(-r.logtau_d);
    const double A = std::exp(r.logA_d);
    const double x = std::exp(p.logu);
    const double th = p.phase;
    const double sh = std::sin(0.5 * th);
    const double near_a = (A * std::expm1(p.offA) * std::cos(th) - 2.0 * A * sh * sh) * it * it;
    v.R = (near_a + x * std::sin(th) * it) / (2.0 * (1.0 + it * it)) - 0.5 * std::sin(th) * it;
    v.dR = -0.5 * std::expm1(-p.logu) * std::cos(th);
  } else if (p.zone == Zone::S) {
    const double B = std::exp(r.logB_d);
    v.S = R_at_B(k) - 0.5 * (B * std::expm1(p.offB) - p.offB);
    v.dS = 0.5 * std::expm1(-p.logu);
  }
  return v;
}

double Construction::psi(const Point& p, int K) const {
  if (p.logu > 700) throw Error("psi: log x beyond double range");
  double v = std::expm1(p.logu) - p.logu;
  if (p.k >= 0 && p.k <= last(K)) {
    auto d = deviation(p.k, p);
    v += d.R + d.S;
  }
  return v;
}

double Construction::psi_prime(const Point& p, int K) const {
  double v = -std::expm1(-p.logu);
  if (p.k >= 0 && p.k <= last(K)) {
    auto d = deviation(p.k, p);
    v += d.dR + d.dS;
  }
  return v;
}

double Construction::R_integral(int k, const Point& p) const {
  const auto& r = table_.row(k);
  double off, th;
  if (p.k == k && p.zone == Zone::R) {
    off = p.offA;
    th = p.phase;
  } else if (p.k == k || p.logu > 0.5 * (r.logA_d + r.logC_d)) {
    off = r.logB_d - r.logA_d;
    th = 0.0;
  } else {
    return 0.0;
  }
  if (off <= 0) return 0.0;
  const double tau = std::exp(r.logtau_d);
  const double la = r.logA_d;
  if (tau * off <= 4000.0) {
    auto f = [&](double t) {
      const double l = la + t;
      return 0.5 * std::expm1(l) / l * std::cos(tau * t);
    };
    const int pieces = std::max(1, static_cast<int>(tau * off / kPi));
    // The integral is of size max|h|/tau but can pass through zero; tolerances scale with that size.
    const double scale = 0.5 * std::expm1(la + off) / (la + off) / tau;
    auto res = gauss_kronrod(f, 0.0, off, 1e-15 * scale, 1e-13, 20000, pieces);
    if (!res.converged && res.error > 1e-10 * std::max(std::abs(res.value), scale))
      throw Error("R integral quadrature did not converge");
    return res.value;
  }
  // Integration by parts in closed form: sum_j (-1)^j [h^(j) e^{i tau l}] / (i tau)^{j+1},
  // with e^{i tau log A} = 1.
  const double it = 1.0 / tau;
  const cplx eth = std::polar(1.0, th);
  cplx acc{0.0, 0.0};
  cplx fac = cplx(0.0, -it);  // 1/(i tau)
  double sign = 1.0;
  for (int j = 0; j <= 8; ++j) {
    const cplx term = sign * fac * (h_derivative(j, la + off) * eth - h_derivative(j, la));
    acc += term;
    if (std::abs(term) < 1e-17 * std::abs(acc)) break;
    fac *= cplx(0.0, -it);
    sign = -sign;
  }
  return acc.real();
}

double Construction::S_integral(int k, const Point& p) const {
  const auto& r = table_.row(k);
  double off;
  if (p.k == k && p.zone == Zone::S) off = p.offB;
  else if (p.k == k) return 0.0;
  else if (p.logu > 0.5 * (r.logA_d + r.logC_d)) off = r.dC;
  else return 0.0;
  if (off <= 0) return 0.0;
  const double lb = r.logB_d;
  auto f = [&](double t) { return -0.5 * std::expm1(lb + t) / (lb + t); };
  return gauss_kronrod(f, 0.0, off, 0.0, 1e-14, 200).value;
}

double Construction::Pi_deviation(const Point& p, int K) const {
  double v = 0.0;
  for (int j = 0; j <= last(K); ++j) {
    const auto& r = table_.rows[j];
    if (p.k == j) {
      if (p.zone == Zone::R) {
        v += R_integral(j, p);
      } else {
        v += R_integral(j, point_at(j, Anchor::B, 0.0)) + S_integral(j, p);
      }
      break;
    }
    // Outside [A_j, C_j]: before or after decided away from the rounded endpoints.
    if (p.logu < 0.5 * (r.logA_d + r.logC_d)) break;
    v += full_dev_[j];
  }
  return v;
}

double Construction::Pi(const Point& p, int K) const { return Li_log(p.logu) + Pi_deviation(p, K); }

double Construction::pi(const Point& p, int K) const {
  double v = li_log(p.logu);
  const double la0 = table_.rows.front().logA_d;
  const int nu_max = static_cast<int>(std::floor(p.logu / la0));
  for (int nu = 1; nu <= nu_max; ++nu) {
    const int mu = mobius(nu);
    if (mu == 0) continue;
    const Point q = nu == 1 ? p : point(p.logu / nu);
    v += mu * Pi_deviation(q, K) / nu;
  }
  return v;
}

PnTReport Construction::pnt_defect(int K, const std::vector<double>& log_grid) const {
  PnTReport rep;
  const int kl = last(K);
  rep.block_sup_Pi.assign(kl + 1, 0.0);
  const double al = table_.params.alpha, c = table_.params.c;
  auto probe = [&](const Point& p) {
    const double lx = p.logu;
    const double d = Pi_deviation(p, K);
    const double w = std::exp(c * std::pow(lx, al) - lx);
    rep.sup_Pi = std::max(rep.sup_Pi, std::abs(d) * w);
    rep.sup_abs_Pi = std::max(rep.sup_abs_Pi, std::abs(d));
    double psi_dev = -1.0 - lx;
    if (p.k >= 0 && p.k <= kl) {
      auto dv = deviation(p.k, p);
      psi_dev += dv.R + dv.S;
    }
    rep.sup_psi = std::max(rep.sup_psi, std::abs(psi_dev) * w);
    for (int j = kl; j >= 0; --j) {
      if (lx >= table_.rows[j].logA_d) {
        rep.block_sup_Pi[j] = std::max(rep.block_sup_Pi[j], std::abs(d) * w);
        break;
      }
    }
  };
  for (double lx : log_grid) probe(point(lx));
  // The deviation oscillates with frequency tau_k in log u and its amplitude
  // peaks just below B_k; a plain grid cannot resolve that phase.
  const double top = log_grid.empty() ? 0.0 : *std::max_element(log_grid.begin(), log_grid.end());
  for (int k = 0; k <= kl; ++k) {
    const auto& r = table_.rows[k];
    if (r.logB_d > top) break;
    const double inv_tau = std::exp(-r.logtau_d);
    for (int j = 0; j <= 64; ++j) probe(point_at(k, Anchor::B, -j * (4.0 * kPi / 64.0) * inv_tau));
  }
  for (int j = 0; j < kl; ++j)
    if (rep.block_sup_Pi[j + 1] > 2.0 * rep.block_sup_Pi[j]) rep.growth_flag = true;
  return rep;
}

namespace {

void append_rows(const SequenceTable& t, int kl, double X, double main, const std::function<double(int)>& RB,
                 HalfLineMeasure& m) {
  HpDigits scope(t.digits);
  double cur = 0.0;
  for (int j = 0; j <= kl; ++j) {
    const auto& r = t.rows[j];
    if (r.logA_d >= X) break;
    if (main != 0.0 && r.logA_d > cur) m.pieces.push_back({cur, r.logA_d, PieceTag::MainTerm, {}, 0.0, 1.0, 0});
    DensityPiece R;
    R.a = r.logA_d;
    R.b = std::min(r.logB_d, X);
    R.tag = PieceTag::RDeviation;
    R.params = {std::exp(r.logtau_d), mod_2pi(r.tau * hpf(r.logA_d)), r.logA_d, main};
    m.pieces.push_back(R);
    cur = R.b;
    if (r.logB_d >= X) break;
    if (r.logC_d > r.logB_d) {
      DensityPiece S;
      S.a = r.logB_d;
      S.b = std::min(r.logC_d, X);
      S.tag = PieceTag::SDeviation;
      S.params = {main};
      m.pieces.push_back(S);
      cur = S.b;
    } else {
      // (B_k, C_k) is narrower than one ulp of log B_k; keep its mass as an atom.
      m.atoms.push_back({r.logB_d, main != 0.0 ? RB(j) : -RB(j)});
    }
  }
  if (main != 0.0 && cur < X) m.pieces.push_back({cur, X, PieceTag::MainTerm, {}, 0.0, 1.0, 0});
}

}  // namespace

HalfLineMeasure Construction::psi_measure(int K, double log_xmax) const {
  HalfLineMeasure m;
  append_rows(table_, last(K), log_xmax, 1.0, [&](int j) { return R_at_B(j); }, m);
  merge_atoms(m.atoms);
  m.validate();
  return m;
}

HalfLineMeasure Construction::deviation_measure(int K, double log_xmax) const {
  HalfLineMeasure m;
  append_rows(table_, last(K), log_xmax, 0.0, [&](int j) { return R_at_B(j); }, m);
  merge_atoms(m.atoms);
  m.validate();
  return chebyshev_to_riemann(m);
}

double Construction::N_oracle(int K, double logx, double tol) const {
  if (logx > 700) throw Error("N_oracle: log x beyond double range");
  const HalfLineMeasure D = deviation_measure(K, logx);
  const HalfLineMeasure E = exp_star(D, logx, tol);
  // N = (delta_1 + du) * E evaluated at x: int_{[1,x]} (x/v) dE(v).
  return std::exp(logx) * mellin_transform(E, cplx(1.0, 0.0), TailModel::None, tol).real();
}

}  // namespace beurling
