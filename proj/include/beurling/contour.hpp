#pragma once

// The shifted Perron contour: steepest paths, connectors and return segments
// in the upper half plane (the lower half follows by conjugation), bounds for
// every piece, and the vertical-line Perron integral it replaces.

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "beurling/saddle.hpp"

namespace beurling {

enum class Track { Continuous, Discrete };
std::string track_name(Track t);
Track track_from_name(const std::string& s);

// Point of the contour. u = t - tau_K is used near tau_K; log_t for far points.
struct Endpoint {
  double sigma = 0.0;
  double u = 0.0;
  double log_t = 0.0;
  bool far = false;
};

struct ContourSegment {
  std::string id;   // gamma_m, upsilon_m, join+, delta_1+, ...
  std::string kind;
  int m = 0;
  Endpoint a, b;
  bool exact = false;  // bound from exact node values of e^f g
  int nodes = 0;
  double length = 0.0;          // in the (sigma, t) plane; log_length for far pieces
  double log_length = 0.0;
  double log_bound = 0.0;       // log_abs_integral when exact, else (1/pi) sup|F| length over cells
  double log_abs_integral = -std::numeric_limits<double>::infinity();  // (1/pi) int |F| |ds| when exact
  bool cos_nonpositive = true;  // Upsilon only: cos((t - tau) log B) <= 0 at every node
  nlohmann::json to_json() const;
};

struct Contour {
  Track track = Track::Continuous;
  int K = 0;
  int M = 0;
  int case_id = 0;  // discrete track: 1 if sigma(2 tau) <= sigma'', else 2
  double sigma0 = 0.0, sigma_prime = 0.0, sigma_dd = 0.0, sigma_2tau = 0.0;
  double T1_plus = 0.0, T1_minus = 0.0;  // as offsets from tau
  double T2_offset = 0.0;                // exp((log B)^{alpha/2})
  double log_T = 0.0;                    // log of the final height
  double D_hat = 0.0;
  std::vector<ContourSegment> segments;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Upper-half contour. saddles/paths are indexed by m + M.
// T2_offset <= 0 selects exp((log B)^{alpha/2}).
Contour assemble(const ZetaContext& ctx, const std::vector<SaddlePoint>& saddles,
                 const std::vector<PathPolyline>& paths, Track track, double D_hat = 0.0,
                 double T2_offset = 0.0);

// Fills log_bound for every segment.
void connector_bounds(const ZetaContext& ctx, Contour& c);

// Upper bound for |sum_k int_s^{s+1} (eta_k + eta~_k + xi_k)| over s = sigma + i t with
// sigma >= sigma_lo and t in the given range. Phase-free, usable at any height.
double segment_sum_bound_far(const ZetaContext& ctx, double sigma_lo, double log_t_lo, double log_t_hi);
double segment_sum_bound_near(const ZetaContext& ctx, double sigma_lo, double u_lo, double u_hi);

using LogZetaFn = std::function<cplx(cplx)>;

struct PerronValue {
  double value = 0.0;        // (1/2 pi i) int_{kappa - iT}^{kappa + iT} x^s zeta(s) ds/s
  double quad_error = 0.0;
  double error_bound = 0.0;  // effective-Perron remainder
  int intervals = 0;
};

// Upper half only, folded by conjugation.
PerronValue perron_vertical(const LogZetaFn& log_zeta, double x, double kappa, double T, double tol = 1e-8);
// Both halves separately (for the fold check).
double perron_vertical_full(const LogZetaFn& log_zeta, double x, double kappa, double T, double tol = 1e-8);
// log of x^kappa int dN(u)/(u^kappa (1 + T |log(x/u)|)) with dN <= delta_1 + 2 du + log u du.
double perron_error_bound_log(double logx, double kappa, double logT);

struct ClosedLoopReport {
  double x = 0.0, kappa = 1.5, T = 0.0, sigma_left = 0.5;
  double vertical = 0.0;
  double residue = 0.0;      // rho_{C,K} x
  double left_line = 0.0;
  double horizontal = 0.0;
  double shifted = 0.0;
  double residual = 0.0;     // vertical - residue - shifted
  double relative_residual = 0.0;
  double quad_error = 0.0;
  double perron_error_bound = 0.0;
  double oracle_N = 0.0;     // N_{C,K}(x) = x below A_0
  int intervals = 0;
  nlohmann::json to_json() const;
};

// Cauchy check for x below A_{K+1}: vertical line at kappa vs residue plus the
// contour through sigma_left and the horizontal segments at height T.
ClosedLoopReport closed_loop(const SequenceTable& t, int K, double x, double kappa, double T,
                             double sigma_left = 0.5, double tol = 1e-9);

struct PerronReport {
  Track track = Track::Continuous;
  int K = 0;
  double log_residue_term = 0.0;  // log(rho_{C,K} x)
  S0Contribution s0;
  std::vector<SmBound> sm;
  double log_sm_total = 0.0;
  double log_connector_total = 0.0;
  double log_others_total = 0.0;  // all pieces except Gamma_0
  double margin = 0.0;            // s_0 lower bound minus log_others_total
  double margin_default_T2 = 0.0; // same with T2 = tau +- exp((log B)^{alpha/2})
  double log_perron_error = 0.0;
  double log_envelope = 0.0;      // explicit envelope with b
  double b = 0.0;
  Contour contour;
  nlohmann::json to_json() const;
};

struct ShiftedOptions {
  Track track = Track::Continuous;
  double D_hat = 0.0;
  double b = 0.0;  // defaults to alpha/(alpha+1) + 0.05
  double T2_offset = 0.0;  // see assemble; < 0 scans offsets below the default
};

// Full pipeline at row K: saddles, paths, contour, bounds.
PerronReport shifted_total(const SequenceTable& t, int K, const ShiftedOptions& opt = {});

// log x - (c(alpha+1))^{1/(alpha+1)} (log x log log x)^{alpha/(alpha+1)} (1 + b log3 x/log2 x)
double envelope_log(double logx, double alpha, double c, double b);

}  // namespace beurling
