#include "beurling/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "beurling/quadrature.hpp"

namespace beurling {

namespace {

double loglogB(const ZetaContext& ctx) { return std::log(ctx.logB()); }

double alpha_of(const ZetaContext& ctx) { return ctx.table().params.alpha; }

cplx as_z(const SPoint& p) { return {p.sigma, p.u}; }
SPoint as_p(cplx z) { return {z.real(), z.imag()}; }

bool inside(const SaddleBox& b, cplx z) {
  return z.real() > b.sigma_lo && z.real() < b.sigma_hi && z.imag() > b.u_lo && z.imag() < b.u_hi;
}

// Newton on f' from z; returns false if it leaves the box or stalls.
bool newton(const ZetaContext& ctx, const SaddleBox& box, cplx& z, int& iters) {
  for (iters = 0; iters < 100; ++iters) {
    const SPoint p = as_p(z);
    const cplx f1 = ctx.f_prime(p);
    const cplx f2 = ctx.f_second(p);
    cplx step = f1 / f2;
    double damp = 1.0;
    while (!inside(box, z - damp * step) && damp > 1e-6) damp *= 0.5;
    if (damp <= 1e-6) return false;
    z -= damp * step;
    if (std::abs(step) < 1e-15 && damp == 1.0) return true;
    if (damp == 1.0 && std::abs(step) < 1e-13 * std::max(1.0, std::abs(z))) {
      // One more full step for the last bits.
      const SPoint q = as_p(z);
      z -= ctx.f_prime(q) / ctx.f_second(q);
      return inside(box, z);
    }
  }
  return false;
}

double im_f(const ZetaContext& ctx, const SPoint& p) { return ctx.f_reduced(p).imag(); }

// RHS of the Gamma_0 equation.
double gamma0_rhs(double sigma, double theta, double logB) {
  auto f = [&](double r) { return std::exp((1.0 - sigma) * logB * r) * std::sin(theta * r) / r; };
  return 0.25 * gauss_kronrod(f, 0.5, 1.0, 0.0, 1e-14, 200).value;
}

}  // namespace

int saddle_count(double logB) { return static_cast<int>(std::floor(std::pow(std::log(logB), 0.75))); }

SaddleBox saddle_box(const ZetaContext& ctx, int m) {
  const double lB = ctx.logB();
  SaddleBox b;
  b.m = m;
  b.sigma_lo = 0.5;
  b.sigma_hi = 1.0 - 0.5 * alpha_of(ctx) * loglogB(ctx) / lB;
  b.u_lo = (2.0 * kPi * m - 0.5 * kPi) / lB;
  b.u_hi = (2.0 * kPi * m + 0.5 * kPi) / lB;
  return b;
}

double winding_number(const ZetaContext& ctx, const SaddleBox& b, int nodes, double* arg_count,
                      double* min_abs) {
  const cplx c[4] = {{b.sigma_lo, b.u_lo}, {b.sigma_hi, b.u_lo}, {b.sigma_hi, b.u_hi}, {b.sigma_lo, b.u_hi}};
  const int per_side = std::max(100, nodes / 4);
  cplx acc{0.0, 0.0};
  double arg_acc = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  for (int side = 0; side < 4; ++side) {
    const cplx z0 = c[side], z1 = c[(side + 1) % 4];
    const cplx dz = (z1 - z0) / static_cast<double>(per_side);
    cplx prev_f1;
    for (int j = 0; j <= per_side; ++j) {
      const cplx z = z0 + dz * static_cast<double>(j);
      const cplx f1 = ctx.f_prime(as_p(z));
      const cplx f2 = ctx.f_second(as_p(z));
      const double w = (j == 0 || j == per_side) ? 0.5 : 1.0;
      acc += w * f2 / f1 * dz;
      mn = std::min(mn, std::abs(f1));
      if (j > 0) arg_acc += std::arg(f1 / prev_f1);
      prev_f1 = f1;
    }
  }
  if (arg_count) *arg_count = arg_acc / kTwoPi;
  if (min_abs) *min_abs = mn;
  return (acc / cplx(0.0, kTwoPi)).real();
}

SaddlePoint find_saddle(const ZetaContext& ctx, int m, int winding_nodes) {
  if (std::abs(ctx.tau_offset()) > 1e-6) throw Error("find_saddle: context must be anchored at tau_K");
  const double lB = ctx.logB();
  const int M = saddle_count(lB);
  if (std::abs(m) > M) throw Error("find_saddle: |m| exceeds M");
  SaddlePoint sp;
  sp.m = m;
  sp.box = saddle_box(ctx, m);
  const SaddleBox& b = sp.box;
  if (!(b.sigma_hi > b.sigma_lo)) throw Error("find_saddle: empty saddle box");

  cplx z(0.5 * (b.sigma_lo + b.sigma_hi), 2.0 * kPi * m / lB);
  bool ok = newton(ctx, b, z, sp.newton_iters);
  if (!ok) {
    // Grid fallback: restart Newton from the grid point with the smallest |f'|.
    sp.used_fallback = true;
    double best = std::numeric_limits<double>::infinity();
    cplx zb = z;
    for (int i = 1; i < 24; ++i)
      for (int j = 1; j < 24; ++j) {
        const cplx q(b.sigma_lo + (b.sigma_hi - b.sigma_lo) * i / 24.0, b.u_lo + (b.u_hi - b.u_lo) * j / 24.0);
        const double a = std::abs(ctx.f_prime(as_p(q)));
        if (a < best) {
          best = a;
          zb = q;
        }
      }
    z = zb;
    ok = newton(ctx, b, z, sp.newton_iters);
    if (!ok) throw Error("find_saddle: Newton iteration diverged for m = " + std::to_string(m));
  }
  sp.sigma = z.real();
  sp.u = z.imag();
  const auto d = ctx.f_derivs(sp.point());
  sp.f = d.f;
  sp.f2 = d.f2;
  sp.residual = std::abs(d.f1);
  sp.residual_threshold = 1e-10 * std::abs(d.f2) / lB;
  sp.E = -std::log(std::abs(cplx(1.0 - sp.sigma, -sp.u)));
  sp.winding = winding_number(ctx, b, winding_nodes, &sp.arg_count, &sp.min_abs_f1);
  sp.winding_int = static_cast<int>(std::lround(sp.winding));
  if (std::abs(sp.winding - sp.winding_int) > 0.1 || sp.winding_int != 1)
    throw Error("find_saddle: box certification failed for m = " + std::to_string(m) +
                " (winding " + std::to_string(sp.winding) + ")");
  return sp;
}

nlohmann::json SaddlePoint::to_json() const {
  return {{"m", m},
          {"sigma", sigma},
          {"t_minus_tau", u},
          {"f_re", f.real()},
          {"f_im", f.imag()},
          {"f2_re", f2.real()},
          {"f2_im", f2.imag()},
          {"E", E},
          {"winding", winding},
          {"winding_int", winding_int},
          {"arg_count", arg_count},
          {"min_abs_f1_boundary", min_abs_f1},
          {"residual", residual},
          {"residual_threshold", residual_threshold},
          {"newton_iters", newton_iters},
          {"used_fallback", used_fallback}};
}

SaddleAsymptotics saddle_asymptotics(const ZetaContext& ctx, const SaddlePoint& sp, const SaddlePoint& s0) {
  const double lB = ctx.logB(), l2 = loglogB(ctx), al = alpha_of(ctx);
  SaddleAsymptotics a;
  a.m = sp.m;
  a.c_sigma = (1.0 - sp.sigma) * lB - al * l2;
  a.res_sigma = std::abs(a.c_sigma) / lB;
  const cplx v(1.0 - sp.sigma, -sp.u);
  a.res_logx = std::abs(4.0 * v * ctx.logx() * std::exp(-v * lB) - 1.0);
  a.res_logx_threshold = 10.0 * std::pow(lB, -al / 2.0);
  a.res_t = std::abs(sp.u * lB - 2.0 * kPi * sp.m * (1.0 + 1.0 / (al * l2)));
  a.E = sp.E;
  a.E_offset = sp.E - (l2 - std::log(std::log(ctx.logx())));
  a.gap = (s0.sigma - sp.sigma) * lB * l2 * l2;
  return a;
}

nlohmann::json SaddleAsymptotics::to_json() const {
  return {{"m", m},          {"c_sigma", c_sigma}, {"res_sigma", res_sigma},
          {"res_logx", res_logx}, {"res_logx_threshold", res_logx_threshold},
          {"res_t", res_t},   {"E", E},             {"E_offset", E_offset},
          {"gap", gap}};
}

double solve_gamma0_sigma(const ZetaContext& ctx, const SaddlePoint& s0, double theta) {
  if (theta == 0.0) return s0.sigma;
  const double lB = ctx.logB();
  const double sgn = theta > 0 ? 1.0 : -1.0;
  const double th = std::abs(theta);
  const double lhs = th * ctx.logx() / lB;
  // RHS decreases in sigma; at sigma_0 it is below the LHS.
  double hi = s0.sigma;
  double lo = s0.sigma - 1.0 / lB;
  while (gamma0_rhs(lo, th, lB) < lhs) {
    hi = lo;
    lo -= 1.0 / lB;
    if (lo < 0.5) throw Error("Gamma_0: bisection bracket not found");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gamma0_rhs(mid, th, lB) < lhs) hi = mid; else lo = mid;
  }
  (void)sgn;
  return 0.5 * (lo + hi);
}

namespace {

void finish_polyline(const ZetaContext& ctx, PathPolyline& g, std::size_t centre) {
  const auto& n = g.nodes;
  g.length = 0.0;
  for (std::size_t i = 0; i + 1 < n.size(); ++i)
    g.length += std::hypot(n[i + 1].sigma - n[i].sigma, n[i + 1].u - n[i].u);
  g.max_wedge = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n.size() ? i : i + 1;
    const double arg = std::atan2(n[b].u - n[a].u, n[b].sigma - n[a].sigma);
    g.nodes[i].tangent = arg;
    g.max_wedge = std::max(g.max_wedge, std::abs(wrap_phase(arg - 0.5 * kPi)));
  }
  std::vector<double> re(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) re[i] = ctx.f_reduced({n[i].sigma, n[i].u}).real();
  g.re_f_decreasing = true;
  for (std::size_t i = centre; i + 1 < n.size(); ++i)
    if (!(re[i + 1] < re[i])) g.re_f_decreasing = false;
  for (std::size_t i = centre; i > 0; --i)
    if (!(re[i - 1] < re[i])) g.re_f_decreasing = false;
}

}  // namespace

PathPolyline trace_gamma0(const ZetaContext& ctx, const SaddlePoint& s0, double dtheta) {
  if (s0.m != 0) throw Error("trace_gamma0 needs the m = 0 saddle");
  const double lB = ctx.logB();
  std::vector<double> thetas = {0.1 * dtheta, 0.25 * dtheta, 0.5 * dtheta};
  for (double th = dtheta; th < 0.5 * kPi; th += dtheta) thetas.push_back(th);
  thetas.push_back(0.5 * kPi);
  std::vector<double> sig(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) sig[i] = solve_gamma0_sigma(ctx, s0, thetas[i]);

  PathPolyline g;
  g.m = 0;
  // The equation is odd in theta, so sigma_{-theta} = sigma_theta.
  for (std::size_t i = thetas.size(); i-- > 0;) g.nodes.push_back({sig[i], -thetas[i] / lB, 0.0});
  const std::size_t centre = g.nodes.size();
  g.nodes.push_back({s0.sigma, s0.u, 0.0});
  for (std::size_t i = 0; i < thetas.size(); ++i) g.nodes.push_back({sig[i], thetas[i] / lB, 0.0});
  g.start_tag = "t_0^-";
  g.end_tag = "t_0^+";
  g.a_minus = (s0.sigma - g.nodes.front().sigma) * lB;
  g.a_plus = (s0.sigma - g.nodes.back().sigma) * lB;
  g.a_law_residual = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double a = (s0.sigma - sig[i]) * lB;
    g.a_law_residual = std::max(g.a_law_residual, std::abs(std::exp(a) * std::sin(thetas[i]) / thetas[i] - 1.0));
  }
  finish_polyline(ctx, g, centre);
  return g;
}

PathPolyline trace_gamma_m(const ZetaContext& ctx, const SaddlePoint& sm, double near_radius) {
  if (sm.m == 0) throw Error("trace_gamma_m needs m != 0");
  const double lB = ctx.logB();
  const cplx zm(sm.sigma, sm.u);
  const double target = im_f(ctx, sm.point());
  const double r_near = std::clamp(near_radius, 0.02, 1.0) / (2.0 * lB);
  const double phi = 0.5 * (kPi - std::arg(sm.f2));
  cplx dir = std::polar(1.0, phi);
  if (dir.imag() < 0) dir = -dir;
  const SaddleBox box = saddle_box(ctx, sm.m);

  // Steepest descent field: direction of decreasing Re f along Im f = const.
  auto field = [&](cplx z) {
    const cplx f1 = ctx.f_prime(as_p(z));
    const cplx d = -std::conj(f1);
    return d / std::abs(d);
  };

  auto branch = [&](cplx d0, double u_end, double& mismatch) {
    std::vector<cplx> pts;
    cplx z = zm + d0 * (1e-4 / lB);
    pts.push_back(z);
    const double h = r_near / 60.0;
    while (std::abs(z - zm) < r_near) {
      const cplx k1 = field(z);
      const cplx k2 = field(z + 0.5 * h * k1);
      const cplx k3 = field(z + 0.5 * h * k2);
      const cplx k4 = field(z + h * k3);
      z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      pts.push_back(z);
    }
    // Far field: march in t, solving Im f = Im f(s_m) for sigma.
    const double sgn = u_end > z.imag() ? 1.0 : -1.0;
    auto solve_sigma = [&](double u, double s_guess) {
      double s = s_guess;
      for (int it = 0; it < 60; ++it) {
        const SPoint p{s, u};
        const double g = im_f(ctx, p) - target;
        const double dg = ctx.f_prime(p).imag();
        double step = g / dg;
        if (std::abs(step) > 0.5 / lB) step = std::copysign(0.5 / lB, step);
        s -= step;
        if (std::abs(step) < 1e-15) return s;
      }
      if (std::abs(im_f(ctx, {s, u}) - target) > 1e-9) throw Error("Gamma_m: far-field solve failed");
      return s;
    };
    const double s_join = solve_sigma(z.imag(), z.real());
    mismatch = std::abs(s_join - z.real()) * lB;
    const int steps = 200;
    const double du = (u_end - z.imag()) / steps;
    double s = s_join, s_prev = z.real();
    for (int j = 1; j <= steps; ++j) {
      const double u = j == steps ? u_end : z.imag() + du * j;
      const double guess = 2.0 * s - s_prev;
      s_prev = s;
      s = solve_sigma(u, j == 1 ? s : guess);
      pts.push_back({s, u});
    }
    (void)sgn;
    return pts;
  };

  double mis_up = 0.0, mis_dn = 0.0;
  auto up = branch(dir, box.u_hi, mis_up);
  auto dn = branch(-dir, box.u_lo, mis_dn);
  PathPolyline g;
  g.m = sm.m;
  g.join_mismatch = std::max(mis_up, mis_dn);
  if (g.join_mismatch > 1e-3)
    throw Error("Gamma_m: near- and far-field branches do not join (mismatch " +
                std::to_string(g.join_mismatch) + "/log B)");
  for (std::size_t i = dn.size(); i-- > 0;) g.nodes.push_back({dn[i].real(), dn[i].imag(), 0.0});
  const std::size_t centre = g.nodes.size();
  g.nodes.push_back({sm.sigma, sm.u, 0.0});
  for (const auto& z : up) g.nodes.push_back({z.real(), z.imag(), 0.0});
  g.start_tag = "t_m^-";
  g.end_tag = "t_m^+";
  g.a_minus = (sm.sigma - g.nodes.front().sigma) * lB;
  g.a_plus = (sm.sigma - g.nodes.back().sigma) * lB;
  finish_polyline(ctx, g, centre);
  return g;
}

nlohmann::json PathPolyline::to_json() const {
  return {{"m", m},
          {"nodes", nodes.size()},
          {"start", start_tag},
          {"end", end_tag},
          {"length", length},
          {"a_minus", a_minus},
          {"a_plus", a_plus},
          {"max_wedge", max_wedge},
          {"a_law_residual", a_law_residual},
          {"re_f_decreasing", re_f_decreasing},
          {"join_mismatch", join_mismatch}};
}

std::string PathPolyline::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "sigma,t_minus_tau,tangent_arg\n";
  for (const auto& n : nodes) os << n.sigma << ',' << n.u << ',' << n.tangent << '\n';
  return os.str();
}

TaylorControl taylor_control(const ZetaContext& ctx, const SaddlePoint& sp, const SPoint& s) {
  const cplx d = as_z(s) - cplx(sp.sigma, sp.u);
  if (d == cplx(0.0, 0.0)) throw Error("taylor_control: s equals the saddle");
  TaylorControl t;
  const cplx df = ctx.f_reduced(s) - sp.f;
  t.lambda = 2.0 * df / (sp.f2 * d * d) - 1.0;
  t.lambda_tilde = ctx.f_prime(s) / (sp.f2 * d) - 1.0;
  return t;
}

double taylor_radius(const ZetaContext& ctx, const SaddlePoint& sp, double eps) {
  const double lB = ctx.logB();
  double last_ok = 0.0;
  for (int j = 1; j <= 150; ++j) {
    const double delta = 0.02 * j;
    bool ok = true;
    for (int a = 0; a < 16 && ok; ++a) {
      const cplx z = cplx(sp.sigma, sp.u) + std::polar(delta / lB, kTwoPi * a / 16.0);
      if (z.real() <= 0.5 || z.real() >= 1.0) {
        ok = false;
        break;
      }
      const auto t = taylor_control(ctx, sp, as_p(z));
      if (std::max(std::abs(t.lambda), std::abs(t.lambda_tilde)) >= eps) ok = false;
    }
    if (!ok) break;
    last_ok = delta;
  }
  return last_ok;
}

double third_derivative_ratio(const ZetaContext& ctx, const SaddlePoint& sp, double radius) {
  const double lB = ctx.logB(), l2 = loglogB(ctx), al = alpha_of(ctx);
  double mx = 0.0;
  for (int r = 0; r <= 4; ++r)
    for (int a = 0; a < 16; ++a) {
      const cplx z = cplx(sp.sigma, sp.u) + std::polar(radius / lB * r / 4.0, kTwoPi * a / 16.0);
      mx = std::max(mx, std::abs(ctx.f_derivs(as_p(z)).f3));
    }
  return mx * l2 / std::pow(lB, 3.0 + al);
}

WedgeResult wedge_integral(const std::vector<double>& u, const std::vector<cplx>& F, double theta0, double omega) {
  if (u.size() != F.size() || u.size() < 2) throw Error("wedge_integral: need at least two samples");
  if (!(omega >= 0.0 && omega < 0.5 * kPi)) throw Error("wedge_integral: omega must lie in [0, pi/2)");
  const cplx rot = std::polar(1.0, -theta0);
  for (std::size_t j = 0; j < F.size(); ++j) {
    if (F[j] == cplx(0.0, 0.0)) continue;
    if (std::abs(std::arg(F[j] * rot)) > omega + 1e-15)
      throw Error("wedge_integral: sample outside the wedge");
  }
  WedgeResult w;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    const double h = u[j + 1] - u[j];
    if (h < 0) throw Error("wedge_integral: nodes must be increasing");
    w.value += 0.5 * h * (F[j] + F[j + 1]);
    w.abs_integral += 0.5 * h * (std::abs(F[j]) + std::abs(F[j + 1]));
  }
  w.rho = std::abs(w.value);
  w.phi = w.rho > 0 ? std::arg(w.value * rot) : 0.0;
  w.lower_bound = std::cos(omega) * w.abs_integral;
  return w;
}

PathIntegral integrate_polyline(const ZetaContext& ctx, const std::vector<SPoint>& pts, double log_scale) {
  PathIntegral out;
  out.log_scale = log_scale;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const cplx z0 = as_z(pts[i]), z1 = as_z(pts[i + 1]);
    const cplx dz = z1 - z0;
    const double len = std::abs(dz);
    if (len == 0.0) continue;
    auto f = [&](double r) -> cplx { return ctx.perron_integrand(as_p(z0 + dz * r)).scaled(log_scale) * dz; };
    auto g = [&](double r) -> double { return std::exp(ctx.perron_integrand(as_p(z0 + dz * r)).logmag - log_scale) * len; };
    out.integral += gauss_kronrod(f, 0.0, 1.0, 0.0, 1e-10, 50).value;
    out.abs_integral += gauss_kronrod(g, 0.0, 1.0, 0.0, 1e-10, 50).value;
  }
  return out;
}

S0Contribution contribution_s0(const ZetaContext& ctx, const SaddlePoint& s0, const PathPolyline& g0,
                               double taylor_delta) {
  const int K = ctx.K();
  const double lB = ctx.logB(), lx = ctx.logx();
  const auto& P = ctx.table().params;
  S0Contribution c;
  const LogComplex F0 = ctx.perron_integrand(s0.point());
  c.log_scale = F0.logmag;
  const double parity = (K % 2 == 0) ? 1.0 : -1.0;
  c.central_phase = wrap_phase(F0.phase + (K % 2 == 0 ? 0.0 : kPi));

  std::vector<SPoint> pts;
  for (const auto& n : g0.nodes) pts.push_back({n.sigma, n.u});
  const PathIntegral I = integrate_polyline(ctx, pts, c.log_scale);
  const double im = I.integral.imag() / kPi;
  c.sign = im > 0 ? 1 : (im < 0 ? -1 : 0);
  c.value_scaled = im;
  c.log_abs = c.log_scale + std::log(std::abs(im));

  // Wedge lemma on node samples F(gamma) gamma' in arc length.
  std::vector<double> y;
  std::vector<cplx> vals;
  double acc = 0.0;
  for (std::size_t i = 0; i < g0.nodes.size(); ++i) {
    if (i > 0) acc += std::hypot(g0.nodes[i].sigma - g0.nodes[i - 1].sigma, g0.nodes[i].u - g0.nodes[i - 1].u);
    y.push_back(acc);
    const SPoint p{g0.nodes[i].sigma, g0.nodes[i].u};
    vals.push_back(ctx.perron_integrand(p).scaled(c.log_scale) * std::polar(1.0, g0.nodes[i].tangent));
    c.max_lemma_stat = std::max(c.max_lemma_stat, ctx.lemma_statistic(p));
    const cplx s = ctx.s_value(p);
    c.max_pole_phase = std::max(c.max_pole_phase, std::abs(std::arg(cplx(0.0, 1.0) / (s - 1.0))));
  }
  const double omega = 0.25 * kPi;
  const WedgeResult w = wedge_integral(y, vals, parity * 0.5 * kPi, omega);
  c.wedge_phi = w.phi;
  c.log_lower = c.log_scale + std::log(std::cos(omega) * std::cos(omega) * I.abs_integral / kPi);

  const cplx tail0 = ctx.int_eta_tail(s0.point());
  const double logtau = ctx.table().row(K).logtau_d;
  c.log_bound_saddle = lx - logtau - (1.0 - s0.sigma) * lx + tail0.real() - 0.5 * std::log(lB * lx);
  // Gaussian width: Re f(gamma(y)) >= Re f(s_0) - (1 + 1/5)|f''| y^2 / 2 for |y| < delta/log B.
  const double a = 0.6 * std::abs(s0.f2);
  const double r = taylor_delta / lB;
  const double gauss = std::sqrt(kPi / a) * std::erf(std::sqrt(a) * r);
  c.log_gauss_lower = std::log(std::cos(omega) * std::cos(omega) / kPi) + F0.logmag + std::log(gauss) - 2.0 * 0.2;
  const double l2x = std::log(lx), l3x = std::log(l2x);
  const double al = P.alpha, cc = P.c;
  c.log_explicit = lx - std::pow(cc * (al + 1.0), 1.0 / (al + 1.0)) * std::pow(lx * l2x, al / (al + 1.0)) *
                            (1.0 + al / (al + 1.0) * l3x / l2x);
  return c;
}

nlohmann::json S0Contribution::to_json() const {
  return {{"sign", sign},
          {"log_abs", log_abs},
          {"value_scaled", value_scaled},
          {"log_scale", log_scale},
          {"log_wedge_lower_bound", log_lower},
          {"log_saddle_bound", log_bound_saddle},
          {"log_gauss_lower_bound", log_gauss_lower},
          {"log_explicit_envelope", log_explicit},
          {"central_phase", central_phase},
          {"max_lemma_statistic", max_lemma_stat},
          {"max_pole_phase", max_pole_phase},
          {"wedge_phi", wedge_phi}};
}

SmBound contribution_sm_bound(const ZetaContext& ctx, const SaddlePoint& sm, const SaddlePoint& s0,
                              const PathPolyline& gm) {
  const double lB = ctx.logB(), lx = ctx.logx(), l2 = std::log(lB);
  SmBound b;
  b.m = sm.m;
  const LogComplex Fm = ctx.perron_integrand(sm.point());
  std::vector<SPoint> pts;
  for (const auto& n : gm.nodes) pts.push_back({n.sigma, n.u});
  const PathIntegral I = integrate_polyline(ctx, pts, Fm.logmag);
  b.log_bound = Fm.logmag + std::log(I.abs_integral / kPi);
  b.re_tail_m = ctx.int_eta_tail(sm.point()).real();
  b.re_tail_0 = ctx.int_eta_tail(s0.point()).real();
  b.slack = lx / (lB * l2 * l2 * l2);
  const double logtau = ctx.table().row(ctx.K()).logtau_d;
  b.log_paper_form = lx - logtau - (1.0 - sm.sigma) * lx + b.re_tail_m + std::log(gm.length);
  return b;
}

nlohmann::json SmBound::to_json() const {
  return {{"m", m},
          {"log_bound", log_bound},
          {"log_paper_form", log_paper_form},
          {"re_tail_m", re_tail_m},
          {"re_tail_0", re_tail_0},
          {"slack", slack}};
}

}  // namespace beurling
