#pragma once

// Random discretization of the continuous example: one prime per unit cell of
// pi_C, the hybrid measure used for the truncated zeta function, the phase
// bucket selection with an extra prime q, and the gap statistics between the
// discrete and continuous zeta functions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "beurling/construction.hpp"
#include "beurling/counting.hpp"

namespace beurling {

enum class SampleTarget { PiC, RiemannPiC };  // pi_C, or Pi_C directly
std::string target_name(SampleTarget t);
SampleTarget target_from_name(const std::string& s);

// Cubic Hermite table of F (pi_C or Pi_C) in l = log u, with exact derivatives
// dF/dl. Nodes include every nu log A_k, nu log B_k, nu log C_k, where F' jumps;
// one-sided derivatives are kept there.
class CountingTable {
 public:
  CountingTable(const Construction& c, double log_xmax, SampleTarget target = SampleTarget::PiC,
                double step = 1e-3);

  double value(double l) const;
  double deriv(double l) const;  // dF/dl
  // Smallest l with F(l) = y (F is strictly increasing past the first node).
  double invert(double y) const;
  double log_xmax() const { return nodes_.back(); }
  double total() const { return F_.back(); }
  SampleTarget target() const { return target_; }
  // int_0^{ly} e^{-i t l} F'(l) dl on the Hermite model.
  cplx exp_integral(double ly, double t) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  std::size_t cell(double l) const;
  SampleTarget target_;
  std::vector<double> nodes_, F_, dl_, dr_;  // dl_ right-sided (cell start), dr_ left-sided (cell end)
};

// Exact dF/dl from the closed forms.
double counting_deriv(const Construction& c, double l, SampleTarget target);

// Cell j (1-based) holds F^{-1}((j - 1, j]); its prime is F^{-1}(j - 1 + U_j) with
// U_j from counter_uniform(seed, 1, j).
DiscreteSystem sample_primes(const CountingTable& F, std::uint64_t seed);

// sup over the grid of |pi_D - F|, with pi_D just below and at each grid point.
double sup_counting_gap(const DiscreteSystem& ds, const CountingTable& F, const std::vector<double>& log_grid);

struct ExpSumSample {
  double y = 0.0, t = 0.0;
  double diff = 0.0;  // |sum_{p <= y} p^{-it} - int_1^y u^{-it} dF|
  double ratio = 0.0; // diff / (sqrt y + sqrt(y log(t + 1)/log(y + 1)))
};

// n samples with log y uniform on [1, log y_max] and log(1 + t) uniform on [0, log(1 + t_max)].
std::vector<ExpSumSample> exp_sum_statistic(const DiscreteSystem& ds, const CountingTable& F, int n,
                                            double t_max, std::uint64_t seed);
double quantile(std::vector<double> v, double q);

// Atoms p^nu < A_{K+1} with weight multiplicity/nu (l/nu for q) plus dLi on [A_{K+1}, inf).
HalfLineMeasure hybrid_measure(const DiscreteSystem& ds, const SequenceTable& t, int K);

// int_{A}^{inf} u^{-s} dLi(u) at real s > 1, closed form via E_1.
double li_tail_mellin_real(double logA, double s);
// int_1^{A} u^{-s} dLi(u) = int_0^{log A} e^{(1-s)l} (1 - e^{-l})/l dl.
cplx li_head_mellin(double logA, cplx s);

// Bucket of a phase: S_l = [l pi/80 - pi/160, l pi/80 + pi/160) + 2 pi Z.
int phase_bucket(double phase);

struct GapSample {
  int K = 0;
  double im_gap = 0.0;  // Im(log zeta_{D,K} - log zeta_{C,K})(1 + i tau_K)
};

struct QTrickResult {
  int l = 0, r = 0;
  bool relabeled = false;  // even/odd roles swapped so that l >= r
  bool needed = true;      // false when l = r = 0
  bool found = false;
  double q = 0.0;
  double margin_even = 0.0, margin_odd = 0.0;  // min of pi/40 - |lhs| over the history
  double tail = 0.0;                           // l |log(1 - q^{-s}) + sum_{q^nu < A} q^{-nu s}/nu|
  std::vector<int> even_counts, odd_counts;    // histograms over the 160 buckets
  std::string note;
  nlohmann::json to_json() const;
};

// tau_K for each sample is read from the table.
QTrickResult qtrick_select(const std::vector<GapSample>& history, const SequenceTable& t);

struct GapPoint {
  double sigma = 0.0, t = 0.0;
  cplx gap;
  double ratio = 0.0;  // |gap| / sqrt(log(|t| + 2))
};

struct LogZetaGap {
  std::vector<GapPoint> grid;
  double D_hat = 0.0;
  double im_gap_tau = 0.0;  // at 1 + i tau_K, reduced to (-pi, pi]
  int bucket = 0;
  nlohmann::json to_json() const;
};

// log zeta_K - log zeta_{C,K} on sigma in {3/4, 1, 5/4, 3/2} and a log grid of t up to t_max.
LogZetaGap logzeta_gap(const DiscreteSystem& ds, const SequenceTable& t, int K, double t_max = 1e3,
                       int t_points = 24);
// The gap at s = sigma + iT.
cplx logzeta_gap_at(const HalfLineMeasure& hybrid, const SequenceTable& t, int K, double sigma, const hpf& T);

struct XTilde {
  double x_tilde = 0.0;
  double clearance = 0.0;  // distance to the nearest generalized integer
  bool certified = false;  // clearance >= 1/x_tilde^2
  int in_window = 0;       // generalized integers in [x - 1, x]
  nlohmann::json to_json() const;
};

// Midpoint of the largest gap among the generalized integers in [x - 1, x].
XTilde probe_x_tilde(const IntegerStream& stream, double x);

struct DensityGap {
  double log_rho_K = 0.0;
  double rho_K = 0.0;
  double rho_K_limit = 0.0;  // (s - 1) zeta_K(s) at s = 1 + h
  double log_gap_bound = 0.0;  // bound on |log rho - log rho_K|
  double inv_xK = 0.0;
  nlohmann::json to_json() const;
};

// pnt_sup: sup |Pi_C - Li| on the grid (alpha = c = 1) or the normalized defect otherwise.
DensityGap density_gap(const HalfLineMeasure& hybrid, const SequenceTable& t, int K, double pnt_sup,
                       double log_p1, double h = 1e-6);

struct DiscretizeOptions {
  std::uint64_t seed = 1;
  int K = 0;
  SampleTarget target = SampleTarget::PiC;
  int exp_samples = 50;
  double exp_t_max = 1e6;
  double gap_t_max = 1e3;
  int probe_points = 2000;
};

struct DiscretizationReport {
  std::uint64_t seed = 0;
  int K = 0;
  std::size_t prime_count = 0;
  double log_xmax = 0.0;
  double sup_pi_gap = 0.0;
  double sup_Pi_gap_ratio = 0.0;  // sup |Pi - Pi_C| / log log x over the grid (x >= e^e)
  std::vector<ExpSumSample> exp_sums;
  double exp_ratio_p95 = 0.0;
  LogZetaGap gap;
  DensityGap density;
  nlohmann::json to_json() const;
};

DiscretizationReport discretize(const Construction& c, const CountingTable& F, const DiscretizeOptions& opt,
                                DiscreteSystem* out = nullptr);

}  // namespace beurling
