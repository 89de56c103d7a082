#pragma once

// The continuous example: sequences A_k < B_k < C_k < A_{k+1}, frequencies
// tau_k and probe points x_k, together with closed-form evaluators for
// psi_C, Pi_C, pi_C on the resulting system.

#include <string>
#include <vector>

#include "json.hpp"
#include "beurling/common.hpp"
#include "beurling/hp.hpp"
#include "beurling/measures.hpp"

namespace beurling {

enum class BuildMode { Strict, Toy };

std::string mode_name(BuildMode m);
BuildMode mode_from_name(const std::string& s);

// Growth floor for the next log B:
//   log F(B) = f_coef * (log B)^f_pow,   log G(k) = g_const + g_slope * k.
// Toy mode also requires log B_{k+1} >= 2 log x_k + x_margin so that x_k < A_{k+1}.
struct GrowthRule {
  double f_coef = 1.5;
  double f_pow = 1.0;
  double g_const = 0.0;
  double g_slope = 1.0;
  double x_margin = 1.0;
};

struct ParamSet {
  double alpha = 1.0;
  double c = 1.0;
  BuildMode mode = BuildMode::Toy;
  int K_max = 1;
  double seed_logB0 = 20.0;
  GrowthRule growth;
  unsigned precision = 50;

  void validate() const;
  nlohmann::json to_json() const;
  static ParamSet from_json(const nlohmann::json& j);
  static ParamSet toy(double seed_logB0 = 20.0, int K_max = 1);
};

struct SequenceRow {
  int k = 0;
  hpf logA, logB, logC, tau, eps, logx;
  double logA_d = 0, logB_d = 0, logC_d = 0, logtau_d = 0, eps_d = 0, logx_d = 0;
  // log C - log B; far below one ulp of log B at realistic scales.
  double dC = 0;
  // Relative distance of tau log A/(2pi), tau log B/(2pi) and
  // (tau log x - target)/(2pi) to the nearest integer.
  double lattice_A = 0, lattice_B = 0, phase_defect = 0;
  // eps * tau * (log B)^alpha / log log B.
  double eps_ratio = 0;
  // Residual of the C equation relative to B.
  double c_residual = 0;
  double floor_logB = 0;
};

// Row K_max + 1 is kept only to the extent needed downstream (A_{K+1} and
// tau_{K+1} as doubles).
struct GuardRow {
  double logB_d = 0, logA_d = 0, logtau_d = 0;
};

struct SequenceTable {
  ParamSet params;
  unsigned digits = 0;
  std::vector<SequenceRow> rows;
  GuardRow guard;

  const SequenceRow& row(int k) const;
  int K_max() const { return static_cast<int>(rows.size()) - 1; }
  // log A_{k}, including the guard row.
  double logA_next(int k) const;
  nlohmann::json to_json() const;
};

SequenceTable build_sequences(const ParamSet& p);

// Solves R(B) - (1/2)(B expm1(d) - d) = 0 for d = log C - log B.
hpf solve_Ck(const hpf& logB, const hpf& tau);

// Position inside the construction with its phase tau_k log u reduced mod 2pi.
enum class Zone { Main, R, S };

struct Point {
  double logu = 0;
  int k = -1;  // row whose [A_k, C_k] contains the point, or -1
  Zone zone = Zone::Main;
  double offA = 0;  // log u - log A_k (when k >= 0)
  double offB = 0;  // log u - log B_k
  double phase = 0;
};

enum class Anchor { A, B, C };

struct DeviationValues {
  double R, S, dR, dS;
};

struct PnTReport {
  double sup_Pi = 0;  // sup |Pi_C - Li| e^{c log^alpha x}/x
  double sup_psi = 0;
  double sup_abs_Pi = 0;
  std::vector<double> block_sup_Pi;  // per row block [A_k, A_{k+1})
  bool growth_flag = false;
};

class Construction {
 public:
  explicit Construction(SequenceTable table);

  const SequenceTable& table() const { return table_; }

  Point point(double logu) const;
  Point point_at(int k, Anchor anchor, double offset) const;

  DeviationValues deviation(int k, const Point& p) const;
  double R_at_B(int k) const;

  // Truncated at row K (K < 0 means all rows).
  double psi(const Point& p, int K = -1) const;
  double psi_prime(const Point& p, int K = -1) const;
  double Pi(const Point& p, int K = -1) const;
  // Pi_C - Li at p.
  double Pi_deviation(const Point& p, int K = -1) const;
  double pi(const Point& p, int K = -1) const;

  // int over [A_k, u] of R_k'(v)/log v dv and the S analogue on (B_k, u].
  double R_integral(int k, const Point& p) const;
  double S_integral(int k, const Point& p) const;
  double full_deviation(int k) const { return full_dev_[k]; }

  // Sup over log_grid plus phase-resolved points below each B_k inside the grid range.
  PnTReport pnt_defect(int K, const std::vector<double>& log_grid) const;

  // d psi_{C,K} and d Pi_{C,K} - d Li restricted to [1, e^log_xmax].
  HalfLineMeasure psi_measure(int K, double log_xmax) const;
  HalfLineMeasure deviation_measure(int K, double log_xmax) const;
  // N_{C,K}(x) from exp* of the deviation measure convolved with du; only
  // feasible when tau_0 is small.
  double N_oracle(int K, double logx, double tol = 1e-9) const;

 private:
  SequenceTable table_;
  std::vector<double> full_dev_;
  int last(int K) const;
};

// li(x) = sum (log x)^n / (n! n zeta(n+1)).
double li_log(double logx);

}  // namespace beurling
