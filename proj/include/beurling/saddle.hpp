#pragma once

// Saddle points of f near 1 + i tau_K, their certification and the steepest
// descent paths through them. All points are offsets from the anchor of the
// ZetaContext, which must be tau_K.

#include <string>
#include <vector>

#include "json.hpp"
#include "beurling/zeta.hpp"

namespace beurling {

// floor((log log B)^{3/4}).
int saddle_count(double logB);

struct SaddleBox {
  int m = 0;
  double sigma_lo = 0.5, sigma_hi = 1.0;
  double u_lo = 0.0, u_hi = 0.0;  // t - tau
};

SaddleBox saddle_box(const ZetaContext& ctx, int m);

struct SaddlePoint {
  int m = 0;
  double sigma = 0.0, u = 0.0;
  cplx f, f2;
  double E = 0.0;          // log |1/(1 + i tau - s_m)|
  double winding = 0.0;    // numerical value of the winding integral
  int winding_int = 0;
  double arg_count = 0.0;  // argument-principle cross-check
  double min_abs_f1 = 0.0; // smallest |f'| on the box boundary
  double residual = 0.0;   // |f'(s_m)|
  double residual_threshold = 0.0;
  int newton_iters = 0;
  bool used_fallback = false;
  SaddleBox box;

  SPoint point() const { return {sigma, u}; }
  nlohmann::json to_json() const;
};

// (1/2 pi i) closed integral of f''/f' around the box, trapezoid with `nodes` nodes.
double winding_number(const ZetaContext& ctx, const SaddleBox& box, int nodes, double* arg_count = nullptr,
                      double* min_abs = nullptr);

SaddlePoint find_saddle(const ZetaContext& ctx, int m, int winding_nodes = 800);

struct SaddleAsymptotics {
  int m = 0;
  double c_sigma = 0.0;      // (1 - sigma_m) log B - alpha log log B
  double res_sigma = 0.0;    // |c_sigma| / log B
  double res_logx = 0.0;     // |4 (1 + i tau - s) log x B^{s-1} - 1|
  double res_logx_threshold = 0.0;
  double res_t = 0.0;        // |(t_m - tau) log B - 2 pi m (1 + 1/(alpha log log B))|
  double E = 0.0;
  double E_offset = 0.0;     // E - (log log B - log log log x)
  double gap = 0.0;          // (sigma_0 - sigma_m) log B (log log B)^2
  nlohmann::json to_json() const;
};

SaddleAsymptotics saddle_asymptotics(const ZetaContext& ctx, const SaddlePoint& sp, const SaddlePoint& s0);

struct PathNode {
  double sigma = 0.0, u = 0.0;
  double tangent = 0.0;  // arg of the tangent in the (sigma, t) plane
};

struct PathPolyline {
  int m = 0;
  std::vector<PathNode> nodes;  // ordered by increasing t
  std::string start_tag, end_tag;
  double length = 0.0;
  double a_minus = 0.0, a_plus = 0.0;  // (sigma_m - sigma_endpoint) log B
  double max_wedge = 0.0;              // max |arg(gamma' e^{-i pi/2})|
  double a_law_residual = 0.0;         // Gamma_0 only: max |e^{a} sin(theta)/theta - 1|
  bool re_f_decreasing = true;
  double join_mismatch = 0.0;          // Gamma_m only, in units of 1/log B
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// theta log x / log B = (1/4) int_{1/2}^1 B^{(1-sigma)u} sin(theta u) du/u, solved for sigma.
double solve_gamma0_sigma(const ZetaContext& ctx, const SaddlePoint& s0, double theta);
PathPolyline trace_gamma0(const ZetaContext& ctx, const SaddlePoint& s0, double dtheta = 1e-2);
PathPolyline trace_gamma_m(const ZetaContext& ctx, const SaddlePoint& sm, double near_radius = 0.25);

struct TaylorControl {
  cplx lambda, lambda_tilde;
};
TaylorControl taylor_control(const ZetaContext& ctx, const SaddlePoint& sp, const SPoint& s);
// Largest radius (in units of 1/log B) on which max(|lambda|, |lambda~|) < eps.
double taylor_radius(const ZetaContext& ctx, const SaddlePoint& sp, double eps = 0.2);
// max |f'''| log log B / (log B)^{3 + alpha} over the disk of that radius.
double third_derivative_ratio(const ZetaContext& ctx, const SaddlePoint& sp, double radius);

struct WedgeResult {
  cplx value;
  double rho = 0.0, phi = 0.0;
  double abs_integral = 0.0;
  double lower_bound = 0.0;  // cos(omega) * int |F|
};

// Trapezoid rule on samples (u_j, F_j); throws if a sample leaves the wedge.
WedgeResult wedge_integral(const std::vector<double>& u, const std::vector<cplx>& F, double theta0, double omega);

struct S0Contribution {
  int sign = 0;
  double log_abs = 0.0;        // log |(1/pi) Im int_{Gamma_0} e^f g ds|
  double value_scaled = 0.0;   // signed value times e^{-log_scale}
  double log_scale = 0.0;
  double log_lower = 0.0;      // wedge lower bound cos^2(omega)/pi * int |F| |ds|
  double log_bound_saddle = 0.0;    // log x - log tau - (1 - sigma_0) log x + Re int eta - (1/2) log(log B log x)
  double log_gauss_lower = 0.0;
  double log_explicit = 0.0;   // explicit envelope at x_K
  double central_phase = 0.0;  // arg(e^{f(s_0)} g(s_0) (-1)^K)
  double max_lemma_stat = 0.0;
  double max_pole_phase = 0.0; // max |arg(i/(s - 1))| on Gamma_0
  double wedge_phi = 0.0;
  nlohmann::json to_json() const;
};

S0Contribution contribution_s0(const ZetaContext& ctx, const SaddlePoint& s0, const PathPolyline& g0,
                               double taylor_delta = 0.5);

struct SmBound {
  int m = 0;
  double log_bound = 0.0;       // log of (1/pi) int_{Gamma_m} |F| |ds|
  double log_paper_form = 0.0;  // log x - log tau - (1 - sigma_m) log x + Re int eta + log length
  double re_tail_m = 0.0, re_tail_0 = 0.0, slack = 0.0;
  nlohmann::json to_json() const;
};

SmBound contribution_sm_bound(const ZetaContext& ctx, const SaddlePoint& sm, const SaddlePoint& s0,
                              const PathPolyline& gm);

// (1/pi) int |F| |ds| and (1/pi) Im int F ds along a polyline, both relative to e^{log_scale}.
struct PathIntegral {
  cplx integral;     // int F ds, scaled
  double abs_integral = 0.0;
  double log_scale = 0.0;
};
PathIntegral integrate_polyline(const ZetaContext& ctx, const std::vector<SPoint>& pts, double log_scale);

}  // namespace beurling
