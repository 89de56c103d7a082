#pragma once

// Global adaptive Gauss-Kronrod (7/15) quadrature for real or complex
// integrands, plus an adaptive trapezoid rule with a Richardson error
// estimate used by the measure algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <type_traits>
#include <vector>

#include "beurling/common.hpp"

namespace beurling {

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }

template <class T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F, class T>
Segment<T> gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  T fc = f(c);
  T resk = fc * kWgk[7];
  T resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    T f1 = f(c - dx);
    T f2 = f(c + dx);
    resk += (f1 + f2) * kWgk[j];
    if (j % 2 == 1) resg += (f1 + f2) * kWg[j / 2];
  }
  Segment<T> s{a, b, resk * h, 0.0};
  s.error = magnitude(T((resk - resg) * h));
  return s;
}

}  // namespace detail

// Integrate f over [a, b]. Stops when the summed error estimate drops below
// max(abs_tol, rel_tol * |value|) or max_intervals is reached.
template <class F>
auto gauss_kronrod(F&& f, double a, double b, double abs_tol, double rel_tol,
                   int max_intervals = 2000, int initial_pieces = 1) {
  using T = std::decay_t<decltype(f(a))>;
  QuadResult<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double err = 0.0;
  const int n0 = std::max(1, initial_pieces);
  for (int i = 0; i < n0; ++i) {
    double lo = a + (b - a) * i / n0;
    double hi = (i + 1 == n0) ? b : a + (b - a) * (i + 1) / n0;
    auto s = detail::gk15<F, T>(f, lo, hi);
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  int count = n0;
  while (err > std::max(abs_tol, rel_tol * detail::magnitude(total)) && count < max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      heap.push(worst);
      break;
    }
    auto left = detail::gk15<F, T>(f, worst.a, mid);
    auto right = detail::gk15<F, T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Recompute the sums from the leaves to shed accumulated rounding.
  total = T{};
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = err;
  out.intervals = count;
  out.converged = err <= std::max(abs_tol, rel_tol * detail::magnitude(total));
  return out;
}

// Complex line integral of f along the straight segment z0 -> z1.
template <class F>
QuadResult<cplx> integrate_segment(F&& f, cplx z0, cplx z1, double abs_tol, double rel_tol,
                                   int max_intervals = 2000, int initial_pieces = 1) {
  const cplx dz = z1 - z0;
  auto g = [&](double u) -> cplx { return f(z0 + dz * u) * dz; };
  return gauss_kronrod(g, 0.0, 1.0, abs_tol, rel_tol, max_intervals, initial_pieces);
}

// Adaptive trapezoid on [a, b]: each panel is halved until the Richardson
// estimate |T(h/2) - T(h)|/3 falls below its share of tol. The node budget
// bounds the total number of function evaluations.
struct TrapezoidResult {
  double value = 0.0;
  double error = 0.0;
  long nodes = 0;
  bool converged = false;
};

template <class F>
TrapezoidResult adaptive_trapezoid(F&& f, double a, double b, double tol, long node_budget) {
  TrapezoidResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  struct Panel {
    double a, b, fa, fm, fb;
    int depth;
  };
  const double width = b - a;
  std::vector<Panel> stack;
  const int n0 = 8;
  std::vector<double> xs(n0 + 1), fs(n0 + 1);
  for (int i = 0; i <= n0; ++i) {
    xs[i] = a + width * i / n0;
    fs[i] = f(xs[i]);
  }
  out.nodes = n0 + 1;
  for (int i = n0 - 1; i >= 0; --i) {
    double m = 0.5 * (xs[i] + xs[i + 1]);
    stack.push_back({xs[i], xs[i + 1], fs[i], f(m), fs[i + 1], 0});
    ++out.nodes;
  }
  bool ok = true;
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    const double h = p.b - p.a;
    const double t1 = 0.5 * h * (p.fa + p.fb);
    const double t2 = 0.25 * h * (p.fa + 2.0 * p.fm + p.fb);
    const double est = std::abs(t2 - t1) / 3.0;
    const double share = tol * h / width;
    if (est <= share || p.depth > 50 || out.nodes >= node_budget) {
      if (est > share) ok = false;
      out.value += t2 + (t2 - t1) / 3.0;
      out.error += est;
      continue;
    }
    const double m = 0.5 * (p.a + p.b);
    const double q1 = f(0.5 * (p.a + m));
    const double q3 = f(0.5 * (m + p.b));
    out.nodes += 2;
    stack.push_back({m, p.b, p.fm, q3, p.fb, p.depth + 1});
    stack.push_back({p.a, m, p.fa, q1, p.fm, p.depth + 1});
  }
  out.converged = ok;
  return out;
}

}  // namespace beurling
