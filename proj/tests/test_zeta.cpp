#include "doctest.h"

#include <cmath>

#include "beurling/construction.hpp"
#include "beurling/measures.hpp"
#include "beurling/quadrature.hpp"
#include "beurling/zeta.hpp"

using namespace beurling;

namespace {

const Construction& small() {
  static const Construction c(build_sequences(ParamSet::toy(4.0, 1)));
  return c;
}

const SequenceTable& standard() {
  static const SequenceTable t = build_sequences(ParamSet::toy(20.0, 1));
  return t;
}

}  // namespace

TEST_CASE("complex expm1 helpers near zero and away from it") {
  for (cplx z : {cplx(1e-9, 2e-9), cplx(1e-3, -0.5), cplx(2.0, 3.0), cplx(-30.0, 100.0)}) {
    const cplx direct = std::exp(z) - 1.0;
    CHECK(std::abs(cexpm1(z) - direct) < 1e-15 * std::max(1.0, std::abs(std::exp(z))) + 1e-24);
  }
  CHECK(std::abs(cexpm1(cplx(1e-12, 1e-12)) - cplx(1e-12, 1e-12 + 1e-24)) < 1e-30);
  for (cplx z : {cplx(1e-7, 0.0), cplx(0.0, 3e-6), cplx(0.7, -0.2), cplx(5.0, 9.0)}) {
    const cplx series = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0;
    const cplx exact = std::abs(z) < 1e-3 ? series : (std::exp(z) - 1.0) / z;
    CHECK(std::abs(expm1_ratio(z) - exact) < 1e-13 * std::abs(exact));
  }
}

TEST_CASE("tail moments against quadrature in both branches") {
  for (int m : {1, 4}) {
    for (cplx z : {cplx(3.0, 20.0), cplx(-2.0, 70.0), cplx(5.0, 300.0), cplx(12.0, -2000.0)}) {
      auto f = [&](double u) -> cplx { return std::exp(z * u) / std::pow(u, m); };
      const int pieces = std::max(1, static_cast<int>(std::abs(z.imag())));
      const cplx exact = gauss_kronrod(f, 0.5, 1.0, 0.0, 1e-14, 20000, pieces).value;
      const cplx got = tail_moment(m, z, std::exp(z), std::exp(0.5 * z));
      CHECK(std::abs(got - exact) < 1e-11 * std::abs(exact));
    }
  }
}

TEST_CASE("log zeta equals log(s/(s-1)) plus the Mellin transform of the deviation measure") {
  // Only row 0 has a small enough tau_k for direct quadrature of its deviation piece.
  const Construction& c = small();
  for (int K : {0}) {
    const ZetaContext ctx = ZetaContext::at_zero(c.table(), K);
    const HalfLineMeasure dev = c.deviation_measure(K, c.table().row(K).logC_d + 1.0);
    for (SPoint p : {SPoint{2.0, 3.0}, SPoint{1.2, 40.0}, SPoint{0.8, 11.0}, SPoint{1.05, -7.0}}) {
      const cplx s = ctx.s_value(p);
      const cplx oracle = std::log(s / (s - 1.0)) + mellin_transform(dev, s, TailModel::None);
      CHECK(std::abs(ctx.log_zeta(p) - oracle) < 1e-9);
    }
  }
}

TEST_CASE("anchored evaluation agrees with the anchor at zero") {
  // Same point s, once with T = 0 and once relative to tau_0.
  const SequenceTable& t = small().table();
  const ZetaContext z0 = ZetaContext::at_zero(t, 0);
  const ZetaContext zt = ZetaContext::at_tau(t, 0);
  const double tau = zt.anchor();
  for (double u : {-3.0, 0.0, 0.4}) {
    const cplx a = z0.log_zeta({0.9, tau + u});
    const cplx b = zt.log_zeta({0.9, u});
    CHECK(std::abs(a - b) < 1e-9);
  }
}

TEST_CASE("residue: (s - 1) zeta(s) tends to rho_K") {
  const SequenceTable& t = small().table();
  for (int K : {0, 1}) {
    const ResidueReport r = residue_and_density(t, K);
    CHECK(r.rho_K > 0);
    const double h1 = residue_limit(t, K, 1e-4), h2 = residue_limit(t, K, 1e-6);
    CHECK(std::abs(h2 - r.rho_K) < 1e-4);
    CHECK(std::abs(h2 - r.rho_K) < std::abs(h1 - r.rho_K) + 1e-12);
    CHECK(r.tail > 0);
    CHECK(std::abs(std::log(r.rho_K)) < 1.0);
  }
}

TEST_CASE("the two tail routes agree near 1 + i tau") {
  const ZetaContext ctx = ZetaContext::at_tau(standard(), 0);
  const double lb = ctx.logB();
  for (SPoint p : {SPoint{1.0 - 3.0 / lb, 0.0}, SPoint{1.0 - 5.0 / lb, 2.0 / lb}, SPoint{0.8, -1.0},
                   SPoint{1.0 - 1.0 / lb, 40.0 / lb}}) {
    const TailRoutes r = ctx.tail_routes(p);
    CHECK(r.rel_diff < 1e-10);
    CHECK(r.route_c > 0);
  }
}

TEST_CASE("f', f'' and f''' are derivatives of f") {
  const ZetaContext ctx = ZetaContext::at_tau(standard(), 0);
  const double lb = ctx.logB();
  const double h = 1e-4 / lb;
  for (SPoint p : {SPoint{1.0 - 4.0 / lb, 0.0}, SPoint{1.0 - 2.0 / lb, 3.0 / lb}}) {
    const FDerivs d = ctx.f_derivs(p);
    // f is analytic: d/ds = d/dsigma. Phases of f are reduced, so unwrap the difference.
    auto fdiff = [&](double dh) {
      const cplx a = ctx.f_reduced({p.sigma + dh, p.u}), b = ctx.f_reduced({p.sigma - dh, p.u});
      return cplx((a - b).real(), wrap_phase((a - b).imag())) / (2 * dh);
    };
    CHECK(std::abs(fdiff(h) - d.f1) < 1e-6 * std::abs(d.f1));
    const cplx f2 = (ctx.f_prime({p.sigma + h, p.u}) - ctx.f_prime({p.sigma - h, p.u})) / (2 * h);
    CHECK(std::abs(f2 - d.f2) < 1e-6 * std::abs(d.f2));
    const cplx f3 = (ctx.f_second({p.sigma + h, p.u}) - ctx.f_second({p.sigma - h, p.u})) / (2 * h);
    CHECK(std::abs(f3 - d.f3) < 1e-6 * std::abs(d.f3));
    // Along t: d/dt = i d/ds.
    const cplx ft = (ctx.f_prime({p.sigma, p.u + h}) - ctx.f_prime({p.sigma, p.u - h})) / (2 * h);
    CHECK(std::abs(ft - cplx(0, 1) * d.f2) < 1e-6 * std::abs(d.f2));
  }
}

TEST_CASE("e^f g reproduces x^s zeta(s)/s") {
  const ZetaContext ctx = ZetaContext::at_tau(standard(), 0);
  const double lb = ctx.logB();
  for (SPoint p : {SPoint{1.0 - 4.0 / lb, 0.0}, SPoint{0.9, 1.0}}) {
    const LogComplex a = ctx.perron_integrand(p);
    const LogComplex b = ctx.x_pow_zeta(p) / LogComplex::from(ctx.s_value(p));
    CHECK(a.logmag == doctest::Approx(b.logmag).epsilon(1e-12));
    // T is ~e^20, so s as a double only carries ~1e-8 of relative phase.
    CHECK(std::abs(wrap_phase(a.phase - b.phase)) < 1e-6);
    CHECK(ctx.lemma_statistic(p) < 1.0);
  }
  CHECK_THROWS_AS(ZetaContext::at_zero(standard(), 0).g_eval({1.0, 0.0}), Error);
}
