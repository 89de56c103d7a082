#pragma once

// Analytic evaluators for the truncated zeta function.
//
// Points are given relative to an anchor height T (kept in high precision):
// s = sigma + i (T + u). All huge phases (T log A_k, T log B_k, T log C_k,
// T log x) are reduced mod 2pi once, so the double-precision evaluators only
// ever see the moderate offset u.

#include <optional>
#include <vector>

#include "beurling/construction.hpp"
#include "beurling/logcomplex.hpp"

namespace beurling {

// expm1 and expm1(z)/z for complex z, accurate near 0.
cplx cexpm1(cplx z);
cplx expm1_ratio(cplx z);

// int_{1/2}^1 e^{zu} u^{-m} du given e^z and e^{z/2} (which may carry reduced
// phases). Quadrature for |z| <= 80, asymptotic expansion beyond.
cplx tail_moment(int m, cplx z, cplx ez, cplx ez2, double tol = 1e-14);

struct SPoint {
  double sigma = 0.0;
  double u = 0.0;
};

struct EtaFamily {
  cplx eta, eta_tilde, xi;
};

struct FDerivs {
  // f is reduced: Im f is taken mod 2pi relative to the anchor.
  cplx f, f1, f2, f3;
};

struct TailRoutes {
  cplx route_a;
  cplx route_b;
  double route_c = 0.0;  // real leading form, reporting only
  double rel_diff = 0.0;
};

struct ResidueReport {
  double rho_K = 0.0;
  double log_rho_K = 0.0;
  // log rho_C lies in [log_rho_K - tail, log_rho_K + tail].
  double log_tail = 0.0;  // log of the tail half-width
  double tail = 0.0;
  // log of the bound 1/x_K for comparison.
  double log_inv_xK = 0.0;
};

class ZetaContext {
 public:
  // Anchor T, truncation K and probe log x (defaults to log x_K).
  ZetaContext(const SequenceTable& t, int K, const hpf& T, std::optional<hpf> logx = {});
  static ZetaContext at_tau(const SequenceTable& t, int K, std::optional<hpf> logx = {});
  static ZetaContext at_zero(const SequenceTable& t, int K, std::optional<hpf> logx = {});

  int K() const { return K_; }
  double logx() const { return logx_d_; }
  double logB() const { return rows_[K_].lB; }
  double tau_offset() const { return rows_[K_].dtau; }
  double anchor() const { return T_d_; }
  const SequenceTable& table() const { return *table_; }

  // s as a double complex number (loses the phase information of T).
  cplx s_value(const SPoint& p) const { return {p.sigma, T_d_ + p.u}; }

  EtaFamily eta_family(int k, const SPoint& p) const;
  // Sum over k <= K of the segment integrals int_s^{s+1}(eta + eta~ + xi).
  cplx segment_sum(const SPoint& p, double tol = 1e-13) const;
  cplx segment_integral(int k, const SPoint& p, double tol = 1e-13) const;
  // log zeta_{C,K}(s), principal branch of log(s/(s-1)).
  cplx log_zeta(const SPoint& p, double tol = 1e-13) const;

  // int_s^inf eta_K: route A (direct), route B (three integrations by parts).
  cplx int_eta_tail(const SPoint& p, double tol = 1e-14) const;
  cplx int_eta_tail_b(const SPoint& p, double tol = 1e-14) const;
  TailRoutes tail_routes(const SPoint& p) const;
  // (log x/log B)(1 + 1/((1-sigma)log B) + 2/((1-sigma)log B)^2).
  double tail_route_c(double sigma) const;

  FDerivs f_derivs(const SPoint& p) const;
  cplx f_prime(const SPoint& p) const;
  cplx f_second(const SPoint& p) const;
  cplx f_reduced(const SPoint& p) const;

  LogComplex g_eval(const SPoint& p) const;
  // |sum of segment integrals - int_s^inf eta_K|.
  double lemma_statistic(const SPoint& p) const;
  // x^s zeta(s)/s = e^{f} g, with reduced phase.
  LogComplex perron_integrand(const SPoint& p) const;
  // x^s zeta(s) directly from log zeta (for identity checks).
  LogComplex x_pow_zeta(const SPoint& p) const;

  // Row data exposed for bounds.
  struct Row {
    double lA, lB, lC, dC;
    double dtau;     // tau_k - T
    double sumtau;   // tau_k + T
    double phA, phB, phC;  // T log A_k, T log B_k, T log C_k mod 2pi
  };
  const Row& row(int k) const { return rows_[k]; }
  double phase_x() const { return phx_; }

 private:
  const SequenceTable* table_;
  int K_;
  double T_d_;
  double logx_d_;
  double phx_;  // T log x mod 2pi
  std::vector<Row> rows_;

  // k-th order derivative of phi(v) = (e^{v lB} - e^{v lA})/(4v) with
  // e^{v lB}, e^{v lA} given by the lattice-reduced powers.
  cplx phi_n(int k, int n, cplx v, cplx Bw, cplx Aw) const;
  void powers(int k, const SPoint& p, cplx& Aw, cplx& Bw) const;
};

ResidueReport residue_and_density(const SequenceTable& t, int K);

// (s - 1) zeta_{C,K}(s) at real s close to 1.
double residue_limit(const SequenceTable& t, int K, double s_minus_one);

}  // namespace beurling
