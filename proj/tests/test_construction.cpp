#include "doctest.h"

#include <cmath>

#include "beurling/construction.hpp"
#include "beurling/pipeline.hpp"
#include "beurling/quadrature.hpp"

using namespace beurling;

namespace {

const Construction& small() {
  static const Construction c(build_sequences(ParamSet::toy(4.0, 1)));
  return c;
}

const Construction& standard() {
  static const Construction c(build_sequences(ParamSet::toy(20.0, 1)));
  return c;
}

}  // namespace

TEST_CASE("parameter validation") {
  ParamSet p;
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
  p = ParamSet{};
  p.c = 1.2;  // c <= 1 is required when alpha = 1
  CHECK_THROWS_AS(p.validate(), Error);
  p = ParamSet{};
  p.c = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = ParamSet{};
  p.K_max = -1;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK_THROWS_AS(mode_from_name("fast"), Error);
  const ParamSet q = ParamSet::from_json(ParamSet::toy(15.0, 2).to_json());
  CHECK(q.to_json() == ParamSet::toy(15.0, 2).to_json());
}

TEST_CASE("sequences are ordered and respect the growth floor") {
  const SequenceTable& t = standard().table();
  REQUIRE(t.rows.size() == 2);
  for (int k = 0; k <= t.K_max(); ++k) {
    const auto& r = t.row(k);
    CHECK(r.logA_d < r.logB_d);
    CHECK(r.logB_d <= r.logC_d);
    CHECK(r.dC > 0);
    CHECK(r.logC_d < t.logA_next(k));
    CHECK(r.logx_d < t.logA_next(k));
    CHECK(r.logB_d >= r.floor_logB);
    CHECK(r.logA_d == doctest::Approx(r.logB_d / 2));
    CHECK(r.eps_d >= 0);
  }
}

TEST_CASE("lattice and phase conditions recomputed at 50 digits from the decimal output") {
  const nlohmann::json j = standard().table().to_json();
  HpDigits scope(50);
  const hpf two_pi = 2 * hp_pi();
  auto rel = [&](const hpf& v) {
    const hpf q = v / two_pi;
    return to_d(abs(q - round(q)) / q);
  };
  int k = 0;
  for (const auto& r : j["rows"]) {
    const hpf lA(r["logA"].get<std::string>()), lB(r["logB"].get<std::string>()), lx(r["logx"].get<std::string>());
    const hpf tau = exp(lB);  // alpha = c = 1
    CHECK(rel(tau * lA) < 1e-40);
    CHECK(rel(tau * lB) < 1e-40);
    const hpf target = (k % 2 == 0) ? hp_pi() / 2 : 3 * hp_pi() / 2;
    CHECK(rel(tau * lx - target) < 1e-40);
    ++k;
  }
}

TEST_CASE("the C equation holds: R(B) = (1/2)(B expm1(d) - d)") {
  const SequenceTable& t = small().table();
  HpDigits scope(t.digits);
  for (const auto& r : t.rows) {
    const hpf B = exp(r.logB), A = exp(r.logA);
    const hpf R = (B - A) / (2 * (r.tau * r.tau + 1));
    const hpf d = r.logC - r.logB;
    CHECK(to_d(abs(R - (B * expm1(d) - d) / 2) / R) < 1e-30);
  }
}

TEST_CASE("psi' >= (1/2)(1 - 1/x), R + S continuity and S(C) = 0") {
  for (const Construction* c : {&small(), &standard()}) {
    const ConstructionChecks chk = check_construction(*c, 1000, 5);
    CHECK(chk.psi_points == 1000);
    CHECK(chk.psi_violations == 0);
    CHECK(chk.max_continuity < 1e-12);
    CHECK(chk.max_S_at_C < 1e-12);
  }
}

TEST_CASE("psi is the integral of psi' (quadrature oracle)") {
  const Construction& c = small();
  const auto& r = c.table().row(0);
  auto dpsi = [&](double l) { return c.psi_prime(c.point(l)) * std::exp(l); };
  // Breakpoints at A, B, C keep every quadrature panel on a smooth branch.
  const double pts[] = {0.5,      r.logA_d,           r.logA_d + 0.3,           r.logA_d + 1.7,
                        r.logB_d, r.logB_d + r.dC / 2, r.logC_d, r.logC_d + 0.5};
  for (int i = 0; i + 1 < 8; ++i) {
    const double a = pts[i], b = pts[i + 1];
    const int pieces = std::max(4, static_cast<int>(std::exp(r.logtau_d) * (b - a)));
    const double integral = gauss_kronrod(dpsi, a, b, 0.0, 1e-13, 20000, pieces).value;
    const double diff = c.psi(c.point(b)) - c.psi(c.point(a));
    CHECK(diff == doctest::Approx(integral).epsilon(1e-11).scale(1e-3));
  }
}

TEST_CASE("Pi_C - Li is the integral of (psi' - (1 - 1/u))/log u") {
  const Construction& c = small();
  const auto& r = c.table().row(0);
  auto dev = [&](double l) {
    const double base = -std::expm1(-l);
    return (c.psi_prime(c.point(l)) - base) * std::exp(l) / l;
  };
  for (double l : {r.logA_d + 0.9, r.logB_d - 1e-3, r.logB_d + r.dC * 0.5, r.logC_d + 1.0}) {
    double integral = 0.0;
    const double top = std::min(l, r.logB_d);
    const int pieces = static_cast<int>(std::exp(r.logtau_d) * (top - r.logA_d));
    integral += gauss_kronrod(dev, r.logA_d, top, 0.0, 1e-13, 20000, pieces).value;
    if (l > r.logB_d) integral += gauss_kronrod(dev, r.logB_d, std::min(l, r.logC_d), 0.0, 1e-13, 200).value;
    CHECK(c.Pi_deviation(c.point(l)) == doctest::Approx(integral).epsilon(1e-7).scale(1e-9));
  }
  // No deviation before A_0.
  CHECK(c.Pi_deviation(c.point(r.logA_d - 0.1)) == 0.0);
}

TEST_CASE("pi_C and Pi_C are Mobius pairs") {
  // The main parts are li and Li; the deviation parts vanish below A_0, so
  // sum_nu (pi_C - li)(x^{1/nu})/nu is finite and must give Pi_C - Li.
  const Construction& c = small();
  for (double l : {3.0, 6.0, 9.5, 12.0}) {
    double acc = 0.0;
    for (int nu = 1; nu <= 40; ++nu) acc += (c.pi(c.point(l / nu)) - li_log(l / nu)) / nu;
    CHECK(acc == doctest::Approx(c.Pi_deviation(c.point(l))).epsilon(1e-9).scale(1e-9));
  }
}

TEST_CASE("N_oracle equals x below A_0") {
  const Construction& c = small();
  const double l = 0.9 * c.table().row(0).logA_d;
  CHECK(c.N_oracle(0, l) == doctest::Approx(std::exp(l)).epsilon(1e-8));
}

TEST_CASE("PNT defect with alpha = c = 1 stays bounded") {
  const Construction& c = standard();
  std::vector<double> grid;
  for (int i = 1; i <= 300; ++i) grid.push_back(0.5 + 300.0 * i / 300.0);
  const PnTReport r = c.pnt_defect(-1, grid);
  CHECK(std::isfinite(r.sup_abs_Pi));
  CHECK(r.sup_abs_Pi < 10.0);
  CHECK(r.sup_Pi < 1.0);
}

TEST_CASE("sequence JSON keeps decimal strings at the working precision") {
  const nlohmann::json j = small().table().to_json();
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0]["logB"].get<std::string>().size() > 50);
  CHECK(j["params"]["mode"] == "toy");
}
