#include "beurling/zeta.hpp"

#include <algorithm>
#include <cmath>

#include "beurling/quadrature.hpp"

namespace beurling {

cplx cexpm1(cplx z) {
  const double a = z.real(), b = z.imag();
  const double sh = std::sin(0.5 * b);
  const double re = std::expm1(a) * std::cos(b) - 2.0 * sh * sh;
  const double im = std::exp(a) * std::sin(b);
  return {re, im};
}

cplx expm1_ratio(cplx z) {
  if (std::abs(z) < 1e-5) return 1.0 + z * (0.5 + z / 6.0);
  return cexpm1(z) / z;
}

cplx tail_moment(int m, cplx z, cplx ez, cplx ez2, double tol) {
  if (std::abs(z) <= 80.0) {
    auto f = [&](double u) -> cplx { return std::exp(z * u) / std::pow(u, m); };
    const int pieces = std::max(1, static_cast<int>(std::abs(z.imag()) / kPi));
    auto r = gauss_kronrod(f, 0.5, 1.0, 0.0, tol, 4000, pieces);
    if (!r.converged) throw Error("tail integral quadrature did not converge");
    return r.value;
  }
  // Repeated integration by parts; terms decay while j < |z|/2.
  cplx acc{0.0, 0.0};
  double rising = 1.0;
  cplx zp = z;
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 200; ++j) {
    const cplx term = rising * (ez - ez2 * std::pow(2.0, m + j)) / zp;
    const double mag = std::abs(term);
    if (mag > prev) break;
    acc += term;
    if (mag < 1e-17 * std::abs(acc)) break;
    prev = mag;
    rising *= (m + j);
    zp *= z;
  }
  return acc;
}

namespace {

double reduced(const hpf& v) { return wrap_phase(mod_2pi(v)); }

}  // namespace

ZetaContext::ZetaContext(const SequenceTable& t, int K, const hpf& T, std::optional<hpf> logx)
    : table_(&t), K_(K) {
  if (K < 0 || K > t.K_max()) throw Error("zeta: K out of range");
  HpDigits scope(t.digits);
  const auto& rk = t.row(K);
  const hpf lx = logx ? *logx : rk.logx;
  if (!(to_d(lx) < t.logA_next(K))) throw Error("zeta: x must lie below A_{K+1}");
  const hpf Th(T);
  T_d_ = to_d(Th);
  logx_d_ = to_d(lx);
  phx_ = reduced(Th * lx);
  for (int k = 0; k <= K; ++k) {
    const auto& r = t.row(k);
    Row q;
    q.lA = r.logA_d;
    q.lB = r.logB_d;
    q.lC = r.logC_d;
    q.dC = r.dC;
    q.dtau = to_d(r.tau - Th);
    q.sumtau = to_d(r.tau + Th);
    q.phA = reduced(Th * r.logA);
    q.phB = reduced(Th * r.logB);
    q.phC = reduced(Th * r.logC);
    rows_.push_back(q);
  }
}

ZetaContext ZetaContext::at_tau(const SequenceTable& t, int K, std::optional<hpf> logx) {
  HpDigits scope(t.digits);
  return ZetaContext(t, K, t.row(K).tau, logx);
}

ZetaContext ZetaContext::at_zero(const SequenceTable& t, int K, std::optional<hpf> logx) {
  HpDigits scope(t.digits);
  return ZetaContext(t, K, hpf(0), logx);
}

void ZetaContext::powers(int k, const SPoint& p, cplx& Aw, cplx& Bw) const {
  const auto& r = rows_[k];
  const double a = 1.0 - p.sigma;
  Bw = std::polar(std::exp(a * r.lB), -(r.phB + p.u * r.lB));
  Aw = std::polar(std::exp(a * r.lA), -(r.phA + p.u * r.lA));
}

EtaFamily ZetaContext::eta_family(int k, const SPoint& p) const {
  const auto& r = rows_[k];
  cplx Aw, Bw;
  powers(k, p, Aw, Bw);
  const double a = 1.0 - p.sigma;
  const double dl = r.lB - r.lA;
  // B^{1-s} - A^{1-s} = A^{1-s} expm1(zAB) with a reduced phase.
  const cplx zAB(a * dl, -wrap_phase(r.phB - r.phA + p.u * dl));
  const cplx diff = Aw * cexpm1(zAB);
  const cplx v(a, r.dtau - p.u);
  const cplx vt(a, -(r.sumtau + p.u));
  EtaFamily e;
  if (std::abs(v) * dl < 1e-3) e.eta = Aw * dl * expm1_ratio(v * dl) / 4.0;
  else e.eta = diff / (4.0 * v);
  if (std::abs(vt) * dl < 1e-3) e.eta_tilde = Aw * dl * expm1_ratio(vt * dl) / 4.0;
  else e.eta_tilde = diff / (4.0 * vt);
  const cplx w(a, -(T_d_ + p.u));
  if (std::abs(w) < 1.0) {
    e.xi = -Bw * r.dC * expm1_ratio(w * r.dC) / 2.0;
  } else {
    const cplx z(a * r.dC, -wrap_phase(r.phC - r.phB + p.u * r.dC));
    e.xi = -Bw * cexpm1(z) / (2.0 * w);
  }
  return e;
}

cplx ZetaContext::segment_integral(int k, const SPoint& p, double tol) const {
  const double lB = rows_[k].lB;
  auto f = [&](double r) -> cplx {
    auto e = eta_family(k, {p.sigma + r, p.u});
    return e.eta + e.eta_tilde + e.xi;
  };
  const int pieces = std::max(1, static_cast<int>(std::ceil(lB / 8.0)));
  auto res = gauss_kronrod(f, 0.0, 1.0, tol, 1e-14, 4000, pieces);
  if (!res.converged) throw Error("segment integral quadrature did not converge");
  return res.value;
}

cplx ZetaContext::segment_sum(const SPoint& p, double tol) const {
  cplx acc{0.0, 0.0};
  for (int k = 0; k <= K_; ++k) acc += segment_integral(k, p, tol);
  return acc;
}

cplx ZetaContext::log_zeta(const SPoint& p, double tol) const {
  const cplx s = s_value(p);
  if (std::abs(s - 1.0) < 1e-8 || std::abs(s) < 1e-8) throw Error("log zeta: s too close to a pole");
  return std::log(1.0 + 1.0 / (s - 1.0)) + segment_sum(p, tol);
}

cplx ZetaContext::int_eta_tail(const SPoint& p, double tol) const {
  const auto& r = rows_[K_];
  const cplx v(1.0 - p.sigma, r.dtau - p.u);
  cplx Aw, Bw;
  powers(K_, p, Aw, Bw);
  return 0.25 * tail_moment(1, v * r.lB, Bw, Aw, tol);
}

cplx ZetaContext::int_eta_tail_b(const SPoint& p, double tol) const {
  const auto& r = rows_[K_];
  const cplx z = cplx(1.0 - p.sigma, r.dtau - p.u) * r.lB;
  cplx ez2, ez;
  powers(K_, p, ez2, ez);
  const cplx z2 = z * z, z3 = z2 * z;
  return (ez - 2.0 * ez2) / (4.0 * z) + (ez - 4.0 * ez2) / (4.0 * z2) + (ez - 8.0 * ez2) / (2.0 * z3) +
         1.5 / z3 * tail_moment(4, z, ez, ez2, tol);
}

double ZetaContext::tail_route_c(double sigma) const {
  const double y = 1.0 / ((1.0 - sigma) * logB());
  return logx_d_ / logB() * (1.0 + y + 2.0 * y * y);
}

TailRoutes ZetaContext::tail_routes(const SPoint& p) const {
  TailRoutes t;
  t.route_a = int_eta_tail(p);
  t.route_b = int_eta_tail_b(p);
  t.route_c = tail_route_c(p.sigma);
  t.rel_diff = std::abs(t.route_a - t.route_b) / std::max(std::abs(t.route_a), 1e-300);
  return t;
}

cplx ZetaContext::phi_n(int k, int n, cplx v, cplx Bw, cplx Aw) const {
  const auto& r = rows_[k];
  if (std::abs(v) * r.lB < 2.0) {
    auto f = [&](double l) -> cplx { return std::pow(l, n) * std::exp(v * (l - r.lA)); };
    auto res = gauss_kronrod(f, r.lA, r.lB, 0.0, 1e-14, 400);
    return 0.25 * Aw * res.value;
  }
  // Antiderivative e^{vl} sum_j (-1)^j n!/(n-j)! l^{n-j} / v^{j+1}.
  auto prim = [&](double l, cplx e) {
    cplx acc{0.0, 0.0};
    double coef = 1.0;
    cplx vp = v;
    for (int j = 0; j <= n; ++j) {
      acc += ((j % 2) ? -1.0 : 1.0) * coef * std::pow(l, n - j) / vp;
      coef *= (n - j);
      vp *= v;
    }
    return e * acc;
  };
  return 0.25 * (prim(r.lB, Bw) - prim(r.lA, Aw));
}

cplx ZetaContext::f_prime(const SPoint& p) const { return logx_d_ - eta_family(K_, p).eta; }

cplx ZetaContext::f_second(const SPoint& p) const {
  const auto& r = rows_[K_];
  cplx Aw, Bw;
  powers(K_, p, Aw, Bw);
  return phi_n(K_, 1, cplx(1.0 - p.sigma, r.dtau - p.u), Bw, Aw);
}

cplx ZetaContext::f_reduced(const SPoint& p) const {
  return cplx(p.sigma * logx_d_, phx_ + p.u * logx_d_) + int_eta_tail(p);
}

FDerivs ZetaContext::f_derivs(const SPoint& p) const {
  const auto& r = rows_[K_];
  cplx Aw, Bw;
  powers(K_, p, Aw, Bw);
  const cplx v(1.0 - p.sigma, r.dtau - p.u);
  FDerivs d;
  d.f = f_reduced(p);
  d.f1 = f_prime(p);
  d.f2 = phi_n(K_, 1, v, Bw, Aw);
  d.f3 = -phi_n(K_, 2, v, Bw, Aw);
  return d;
}

LogComplex ZetaContext::g_eval(const SPoint& p) const {
  const cplx s = s_value(p);
  if (std::abs(s - 1.0) < 1e-8) throw Error("g: s = 1 rejected");
  const cplx bracket = segment_sum(p) - int_eta_tail(p);
  return LogComplex::exp_of(bracket) / LogComplex::from(s - 1.0);
}

double ZetaContext::lemma_statistic(const SPoint& p) const {
  return std::abs(segment_sum(p) - int_eta_tail(p));
}

LogComplex ZetaContext::perron_integrand(const SPoint& p) const {
  return LogComplex::exp_of(f_reduced(p)) * g_eval(p);
}

LogComplex ZetaContext::x_pow_zeta(const SPoint& p) const {
  const cplx e = cplx(p.sigma * logx_d_, phx_ + p.u * logx_d_) + log_zeta(p);
  return LogComplex::exp_of(e);
}

ResidueReport residue_and_density(const SequenceTable& t, int K) {
  const ZetaContext ctx = ZetaContext::at_zero(t, K);
  ResidueReport rep;
  rep.log_rho_K = ctx.segment_sum({1.0, 0.0}).real();
  rep.rho_K = std::exp(rep.log_rho_K);
  // Remaining rows: int_1^2 (eta + eta~) << 1/(tau log B) and int_1^2 xi << 1/tau^2;
  // both sums are at most twice their first term under the growth floor.
  double lt, llb;
  if (K + 1 <= t.K_max()) {
    lt = t.row(K + 1).logtau_d;
    llb = std::log(t.row(K + 1).logB_d);
  } else {
    lt = t.guard.logtau_d;
    llb = std::log(t.guard.logB_d);
  }
  rep.log_tail = std::log(2.0) - lt - llb + std::log1p(std::exp(llb - lt));
  rep.tail = std::exp(rep.log_tail);
  rep.log_inv_xK = -t.row(K).logx_d;
  return rep;
}

double residue_limit(const SequenceTable& t, int K, double h) {
  const ZetaContext ctx = ZetaContext::at_zero(t, K);
  return (1.0 + h) * std::exp(ctx.segment_sum({1.0 + h, 0.0}).real());
}

}  // namespace beurling
