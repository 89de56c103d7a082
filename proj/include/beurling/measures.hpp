#pragma once

// Measures on [1, inf) stored in log-coordinates: weighted atoms plus density
// pieces on log-intervals. Densities are with respect to du, evaluated at
// u = exp(logu).

#include <functional>
#include <string>
#include <vector>

#include "beurling/common.hpp"
#include "json.hpp"

namespace beurling {

// Atoms closer than this in log-position are the same point.
inline constexpr double kLogCollisionTol = 1e-12;

enum class PieceTag { MainTerm, RDeviation, SDeviation, LiTail, Grid };

std::string tag_name(PieceTag t);
PieceTag tag_from_name(const std::string& s);

// Density piece on the log-interval [a, b) (b may be +inf).
//
// With v = u * exp(-shift) and l = log v, the density is
//   scale * exp(-shift) * base(v) / l^log_power
// where base depends on the tag:
//   MainTerm     1 - 1/v
//   LiTail       (1 - 1/v) / log v
//   RDeviation   (1 - 1/v)(m + (1/2) cos(tau (l - l_ref) + phase_ref)),
//                params {tau, phase_ref, l_ref[, m]}
//   SDeviation   (1 - 1/v)(m - 1/2), params {[m]}
// m is an optional main-term weight (default 0).
//   Grid         piecewise constant in v, params {l_0, C_0, l_1, C_1, ...} (cumulative
//                mass at each node, C_0 = 0)
struct DensityPiece {
  double a = 0.0;
  double b = 0.0;
  PieceTag tag = PieceTag::MainTerm;
  std::vector<double> params;
  double shift = 0.0;
  double scale = 1.0;
  int log_power = 0;

  double density(double logu) const;
  // Mass of the piece on [e^a, min(e^b, e^logx)].
  double mass(double logx, double tol = 1e-13) const;
  // int u^{-s} density du over the piece; throws on an infinite piece other
  // than an unshifted Li tail.
  cplx mellin(cplx s, double tol) const;
};

struct Atom {
  double logu;
  double w;
};

class HalfLineMeasure {
 public:
  std::vector<Atom> atoms;
  std::vector<DensityPiece> pieces;

  static HalfLineMeasure delta_one();
  static HalfLineMeasure from_atoms(std::vector<Atom> atoms);

  // Checks support, ordering and non-overlap; throws Error on violation.
  void validate() const;
  // Mass on [1, e^logx] (atoms included at the endpoint).
  double cumulative(double logx) const;
  double atom_cumulative(double logx) const;
  HalfLineMeasure restricted(double logx) const;
  HalfLineMeasure scaled(double w) const;
  bool has_infinite_piece() const;

  nlohmann::json to_json() const;
  static HalfLineMeasure from_json(const nlohmann::json& j);
};

struct ConvolveOptions {
  long node_budget = 400000;
  int max_grid_nodes = 4000;
};

// Sorts atoms and merges those within kLogCollisionTol of each other.
void merge_atoms(std::vector<Atom>& atoms);

// Merges overlapping pieces into Grid pieces so that pieces are disjoint.
void normalize(HalfLineMeasure& m, double tol, const ConvolveOptions& opt = {});

HalfLineMeasure add(const HalfLineMeasure& A, const HalfLineMeasure& B, double log_xmax,
                    double tol, const ConvolveOptions& opt = {});

HalfLineMeasure mellin_convolve(const HalfLineMeasure& A, const HalfLineMeasure& B,
                                double log_xmax, double tol, const ConvolveOptions& opt = {});

HalfLineMeasure exp_star(const HalfLineMeasure& P, double log_xmax, double tol,
                         const ConvolveOptions& opt = {});

HalfLineMeasure chebyshev_to_riemann(const HalfLineMeasure& psi);

enum class TailModel { None, LiTail };

cplx mellin_transform(const HalfLineMeasure& M, cplx s, TailModel tail, double tol = 1e-12);

// Counting functions are passed as functions of log x.
using LogCountingFn = std::function<double(double)>;

// pi(x) = sum_nu mu(nu)/nu Pi(x^{1/nu}), nu <= log x / log p_floor.
double riemann_to_prime(const LogCountingFn& Pi, double logx, double log_pfloor);
// Pi(x) = sum_nu pi(x^{1/nu})/nu.
double prime_to_riemann(const LogCountingFn& pi, double logx, double log_pfloor);

int mobius(int n);

// Li(x) = int_1^x (1 - 1/u)/log u du, as a function of log x (series).
double Li_log(double logx);
// Li(e^lb) - Li(e^la), accurate when the two points are close.
double Li_diff(double la, double lb);

}  // namespace beurling
