#include "beurling/pipeline.hpp"

#include <algorithm>
#include <boost/version.hpp>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <gmp.h>
#include <iomanip>
#include <mpfr.h>
#include <sstream>

#include "beurling/contour.hpp"
#include "beurling/discretize.hpp"
#include "beurling/rng.hpp"
#include "beurling/saddle.hpp"
#include "beurling/zeta.hpp"

namespace beurling {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kProgramVersion = "0.1.0";

// Substreams of the run seed.
constexpr std::uint64_t kStreamConstruction = 3;
constexpr std::uint64_t kStreamOracle = 4;
constexpr std::uint64_t kStreamWedge = 5;

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

CheckResult check(const std::string& suite, const std::string& name, bool pass, const std::string& detail) {
  return {suite, name, pass, detail};
}

}  // namespace

json ConstructionChecks::to_json() const {
  return {{"psi_points", psi_points},         {"psi_violations", psi_violations},
          {"psi_min_margin", psi_min_margin}, {"max_continuity", max_continuity},
          {"max_S_at_C", max_S_at_C},         {"max_lattice", max_lattice},
          {"max_phase", max_phase},           {"max_C_residual", max_C_residual}};
}

ConstructionChecks check_construction(const Construction& c, int points, std::uint64_t seed) {
  const SequenceTable& t = c.table();
  ConstructionChecks r;
  r.psi_min_margin = std::numeric_limits<double>::infinity();
  CounterRng g(seed, kStreamConstruction);
  const int kmax = t.K_max();
  const double l_top = std::min(690.0, t.logA_next(kmax));
  auto probe = [&](const Point& p) {
    const double margin = c.psi_prime(p) + 0.5 * std::expm1(-p.logu);
    r.psi_min_margin = std::min(r.psi_min_margin, margin);
    if (margin < -1e-13) ++r.psi_violations;
    ++r.psi_points;
  };
  // Half the points inside the deviation windows [A_k, B_k], the rest anywhere.
  for (int i = 0; i < points; ++i) {
    if (i % 2 == 0) {
      const int k = static_cast<int>(g.uniform() * (kmax + 1));
      const auto& row = t.row(k);
      probe(c.point_at(k, Anchor::A, g.uniform() * (row.logB_d - row.logA_d)));
    } else {
      probe(c.point(g.uniform() * l_top));
    }
  }
  for (int k = 0; k <= kmax; ++k) {
    const auto& row = t.row(k);
    const double RB = c.R_at_B(k);
    const auto atB = c.deviation(k, c.point_at(k, Anchor::B, 0.0));
    const auto atC = c.deviation(k, c.point_at(k, Anchor::C, 0.0));
    r.max_continuity = std::max(r.max_continuity, std::abs(atB.R - RB) / RB);
    r.max_S_at_C = std::max(r.max_S_at_C, std::abs(atC.S) / RB);
    r.max_lattice = std::max({r.max_lattice, row.lattice_A, row.lattice_B});
    r.max_phase = std::max(r.max_phase, row.phase_defect);
    r.max_C_residual = std::max(r.max_C_residual, row.c_residual);
  }
  return r;
}

DiscreteSystem random_small_system(std::uint64_t seed, std::uint64_t index, int max_primes) {
  CounterRng g(seed, (kStreamOracle << 32) + index);
  DiscreteSystem ds;
  ds.rng_seed = seed;
  const int n = 1 + static_cast<int>(g.uniform() * max_primes);
  for (int i = 0; i < n; ++i) {
    // Mix integers (many coincident products) with generic reals.
    const double v = g.uniform() < 0.5 ? 2.0 + std::floor(g.uniform() * 30.0) : 1.05 + 40.0 * g.uniform();
    ds.primes.push_back({v, 1 + static_cast<int>(g.uniform() * 2.0)});
  }
  std::sort(ds.primes.begin(), ds.primes.end(),
            [](const DiscretePrime& a, const DiscretePrime& b) { return a.value < b.value; });
  return ds;
}

ExpStarCheck check_exp_star(std::uint64_t seed, int systems, double x_max) {
  ExpStarCheck r;
  for (int s = 0; s < systems; ++s) {
    const DiscreteSystem ds = random_small_system(seed, s, 8);
    CounterRng g(seed, (kStreamOracle << 32) + 0x80000000ULL + s);
    const double lx = std::log(2.0 + (x_max - 2.0) * g.uniform());
    const IntegerStream st = enumerate_integers(ds, lx);
    const HalfLineMeasure E = exp_star(ds.riemann_measure(lx), lx, 1e-12);
    ++r.systems;
    for (std::size_t i = 0; i < st.entries.size(); ++i) {
      const double l = st.entries[i].logvalue;
      for (double probe : {l, l - 1e-9}) {
        if (probe < 0) continue;
        const long n = st.count(probe);
        const double e = E.cumulative(probe);
        const double d = std::abs(e - static_cast<double>(n));
        r.max_abs_diff = std::max(r.max_abs_diff, d);
        if (std::lround(e) != n || d > 1e-6) ++r.mismatches;
        ++r.probes;
      }
    }
  }
  return r;
}

WedgeFuzz fuzz_wedge(std::uint64_t seed, int trials) {
  WedgeFuzz r;
  r.min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    CounterRng g(seed, (kStreamWedge << 32) + i);
    const double theta0 = g.uniform(-kPi, kPi);
    const double omega = g.uniform(0.01, 0.5 * kPi - 0.01);
    const int n = 2 + static_cast<int>(g.uniform() * 200.0);
    std::vector<double> u(n);
    std::vector<cplx> F(n);
    double x = g.uniform(-5.0, 5.0);
    const double scale = std::exp(g.uniform(-20.0, 20.0));
    for (int j = 0; j < n; ++j) {
      u[j] = x;
      x += g.uniform(1e-4, 0.3);
      // Magnitudes from smooth to spiky; phases anywhere inside the closed wedge.
      const double mag = scale * (g.uniform() < 0.1 ? std::exp(g.uniform(-30.0, 5.0)) : g.uniform());
      const double ph = g.uniform() < 0.05 ? (g.uniform() < 0.5 ? -omega : omega) : g.uniform(-omega, omega);
      F[j] = std::polar(mag, theta0 + ph);
    }
    const WedgeResult w = wedge_integral(u, F, theta0, omega);
    ++r.trials;
    const double slack = (w.rho - w.lower_bound) / std::max(w.abs_integral, 1e-300);
    r.min_slack = std::min(r.min_slack, slack);
    if (w.rho < w.lower_bound * (1.0 - 1e-12)) ++r.violations;
  }
  return r;
}

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

json VerifyReport::to_json() const {
  json a = json::array();
  for (const auto& c : checks) a.push_back({{"suite", c.suite}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"ok", ok()}, {"checks", a}};
}

json version_info() {
  return {{"beurling_lab", kProgramVersion},
          {"boost", BOOST_LIB_VERSION},
          {"mpfr", mpfr_get_version()},
          {"gmp", gmp_version},
          {"compiler", __VERSION__},
          {"rng", kRngAlgorithm}};
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  fs::create_directories(cfg_.out_dir);
}

const Construction& Pipeline::construction() {
  if (!c_) c_ = std::make_unique<Construction>(build_sequences(cfg_.params));
  return *c_;
}

const Construction& Pipeline::discrete_construction() {
  if (!cd_) {
    ParamSet p = cfg_.params;
    p.seed_logB0 = cfg_.discretize.seed_logB0;
    p.K_max = std::max(cfg_.K, 1);
    cd_ = std::make_unique<Construction>(build_sequences(p));
  }
  return *cd_;
}

void Pipeline::emit(StageOutput& out, const std::string& name, const std::string& bytes) const {
  const fs::path p = fs::path(cfg_.out_dir) / name;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << bytes;
  out.files.push_back({name, fnv1a_hex(bytes)});
}

void Pipeline::emit_json(StageOutput& out, const std::string& name, const json& j) const {
  emit(out, name, j.dump(1) + "\n");
}

json Pipeline::read_json(const std::string& name) const {
  const fs::path p = fs::path(cfg_.out_dir) / name;
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  json j;
  in >> j;
  return j;
}

void Pipeline::require_artifact(const std::string& name, const std::string& stage) const {
  const fs::path p = fs::path(cfg_.out_dir) / name;
  if (!fs::exists(p)) throw Error("stage dependency missing: " + p.string() + " (run `" + stage + "` first)");
}

StageOutput Pipeline::construct() {
  StageOutput out{"construct", {}, {}};
  const Construction& c = construction();
  const SequenceTable& t = c.table();
  emit_json(out, "sequences.json", t.to_json());

  const ConstructionChecks chk = check_construction(c, 2000, cfg_.seed);
  std::vector<double> grid;
  const double top = std::min(690.0, t.logA_next(t.K_max()));
  for (int i = 1; i <= 400; ++i) grid.push_back(top * i / 400.0);
  const PnTReport pnt = c.pnt_defect(-1, grid);
  std::ostringstream csv;
  csv.precision(17);
  csv << "log_x,Pi_minus_Li,weighted\n";
  for (double l : grid) {
    const double d = c.Pi_deviation(c.point(l));
    csv << l << ',' << d << ',' << std::abs(d) * std::exp(t.params.c * std::pow(l, t.params.alpha) - l) << '\n';
  }
  emit(out, "pnt_defect.csv", csv.str());
  json j = {{"params_hash", fnv1a_hex(t.params.to_json().dump())},
            {"digits", t.digits},
            {"checks", chk.to_json()},
            {"pnt", {{"sup_weighted", pnt.sup_Pi}, {"sup_abs", pnt.sup_abs_Pi}, {"sup_psi_weighted", pnt.sup_psi},
                     {"block_sup", pnt.block_sup_Pi}, {"growth_flag", pnt.growth_flag}}}};
  emit_json(out, "construction.json", j);
  out.summary = {{"rows", t.rows.size()}, {"max_lattice", chk.max_lattice}, {"psi_violations", chk.psi_violations}};
  return out;
}

StageOutput Pipeline::zeta() {
  require_artifact("sequences.json", "construct");
  StageOutput out{"zeta", {}, {}};
  const SequenceTable& t = construction().table();
  const int K = cfg_.K;
  const ResidueReport res = residue_and_density(t, K);
  const ZetaContext ctx = ZetaContext::at_tau(t, K);
  const double lB = ctx.logB();
  std::ostringstream csv;
  csv.precision(17);
  csv << "sigma,t_minus_tau,re_log_zeta,im_log_zeta,lemma_statistic\n";
  for (double sigma : {0.9, 1.0, 1.1, 1.5})
    for (int j = -4; j <= 4; ++j) {
      const SPoint p{sigma, j * kPi / lB};
      const cplx lz = ctx.log_zeta(p);
      csv << sigma << ',' << p.u << ',' << lz.real() << ',' << wrap_phase(lz.imag()) << ','
          << ctx.lemma_statistic(p) << '\n';
    }
  emit(out, "zeta_grid.csv", csv.str());
  const TailRoutes tr = ctx.tail_routes({1.0, 0.0});
  json j = {{"K", K},
            {"residue", {{"rho_K", res.rho_K}, {"log_rho_K", res.log_rho_K}, {"log_tail", res.log_tail},
                         {"log_inv_xK", res.log_inv_xK}}},
            {"residue_limit_h1e-6", residue_limit(t, K, 1e-6)},
            {"tail_routes_at_1_plus_i_tau", {{"route_a", {tr.route_a.real(), tr.route_a.imag()}},
                                             {"route_b", {tr.route_b.real(), tr.route_b.imag()}},
                                             {"route_c", tr.route_c},
                                             {"rel_diff", tr.rel_diff}}}};
  emit_json(out, "zeta.json", j);
  out.summary = {{"rho_K", res.rho_K}, {"tail_rel_diff", tr.rel_diff}};
  return out;
}

StageOutput Pipeline::saddle() {
  require_artifact("sequences.json", "construct");
  StageOutput out{"saddle", {}, {}};
  const SequenceTable& t = construction().table();
  const ZetaContext ctx = ZetaContext::at_tau(t, cfg_.K);
  const int M = saddle_count(ctx.logB());
  const SaddlePoint s0 = find_saddle(ctx, 0);
  json arr = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "m,sigma,t_minus_tau,tangent_arg\n";
  for (int m = -M; m <= M; ++m) {
    const SaddlePoint sp = m == 0 ? s0 : find_saddle(ctx, m);
    const PathPolyline path = m == 0 ? trace_gamma0(ctx, sp) : trace_gamma_m(ctx, sp, taylor_radius(ctx, sp));
    for (const auto& n : path.nodes) csv << m << ',' << n.sigma << ',' << n.u << ',' << n.tangent << '\n';
    json pj = path.to_json();
    pj.erase("nodes");
    const TailRoutes tr = ctx.tail_routes(sp.point());
    arr.push_back({{"saddle", sp.to_json()},
                   {"asymptotics", saddle_asymptotics(ctx, sp, s0).to_json()},
                   {"tail_routes_rel_diff", tr.rel_diff},
                   {"path", pj}});
  }
  emit(out, "paths.csv", csv.str());
  emit_json(out, "saddles.json", {{"K", cfg_.K}, {"logB", ctx.logB()}, {"logx", ctx.logx()}, {"M", M}, {"saddles", arr}});
  out.summary = {{"M", M}, {"sigma0", s0.sigma}};
  return out;
}

StageOutput Pipeline::perron() {
  require_artifact("sequences.json", "construct");
  StageOutput out{"perron", {}, {}};
  const SequenceTable& t = construction().table();
  ShiftedOptions opt;
  opt.track = cfg_.track;
  opt.D_hat = cfg_.track == Track::Discrete ? cfg_.perron.D_hat : 0.0;
  opt.b = cfg_.perron.b;
  opt.T2_offset = cfg_.perron.scan_T2 ? -1.0 : 0.0;
  const PerronReport rep = shifted_total(t, cfg_.K, opt);
  json j = rep.to_json();
  j["logx"] = t.row(cfg_.K).logx_d;
  j["logB"] = t.row(cfg_.K).logB_d;
  const ClosedLoopReport loop =
      closed_loop(t, cfg_.K, cfg_.perron.loop_x, cfg_.perron.loop_kappa, cfg_.perron.loop_T, 0.5, cfg_.tol);
  j["closed_loop"] = loop.to_json();
  emit_json(out, "perron.json", j);
  emit(out, "contour.csv", rep.contour.to_csv());
  out.summary = {{"s0_sign", rep.s0.sign}, {"margin", rep.margin},
                 {"closed_loop_relative_residual", loop.relative_residual}};
  return out;
}

StageOutput Pipeline::discretize() {
  StageOutput out{"discretize", {}, {}};
  const Construction& c = discrete_construction();
  const SequenceTable& t = c.table();
  const int K = cfg_.K;
  const CountingTable F(c, t.logA_next(K), cfg_.discretize.target, cfg_.discretize.table_step);
  DiscretizeOptions opt;
  opt.seed = cfg_.seed;
  opt.K = K;
  opt.target = cfg_.discretize.target;
  opt.exp_samples = cfg_.discretize.exp_samples;
  opt.exp_t_max = cfg_.discretize.exp_t_max;
  opt.gap_t_max = cfg_.discretize.gap_t_max;
  DiscreteSystem ds;
  const DiscretizationReport rep = beurling::discretize(c, F, opt, &ds);
  emit_json(out, "primes.json", ds.to_json());
  json j = rep.to_json();
  j["sequences"] = {{"seed_logB0", t.params.seed_logB0},
                    {"logA_next", t.logA_next(K)},
                    {"logx_K", t.row(K).logx_d},
                    {"logtau_K", t.row(K).logtau_d}};
  std::ostringstream csv;
  csv.precision(17);
  csv << "y,t,diff,ratio\n";
  for (const auto& s : rep.exp_sums) csv << s.y << ',' << s.t << ',' << s.diff << ',' << s.ratio << '\n';
  j.erase("exp_sums");
  j.erase("exp_sum_columns");
  // The phase selection needs two even and two odd rows of history.
  try {
    j["qtrick"] = qtrick_select({{K, rep.gap.im_gap_tau}}, t).to_json();
  } catch (const Error& e) {
    j["qtrick"] = {{"available", false}, {"note", e.what()}};
  }
  emit_json(out, "discretize.json", j);
  emit(out, "exp_sums.csv", csv.str());
  out.summary = {{"primes", rep.prime_count}, {"sup_pi_gap", rep.sup_pi_gap}, {"exp_ratio_p95", rep.exp_ratio_p95},
                 {"D_hat", rep.gap.D_hat}};
  return out;
}

StageOutput Pipeline::count() {
  StageOutput out{"count", {}, {}};
  const std::string pf = cfg_.primes_file();
  if (!fs::exists(pf)) throw Error("stage dependency missing: " + pf + " (run `discretize` first)");
  json pj;
  {
    std::ifstream in(pf);
    in >> pj;
  }
  const DiscreteSystem ds = DiscreteSystem::from_json(pj);
  const SequenceTable& t = discrete_construction().table();
  const int K = cfg_.K;
  const double lx = t.row(K).logx_d;
  const double x = std::exp(lx);
  EnumerateOptions eo;
  eo.max_count = cfg_.count_budget;
  const IntegerStream st = enumerate_integers(ds, lx, eo);
  if (st.truncated) throw Error("count: enumeration hit the budget before x_K");
  const XTilde xt = probe_x_tilde(st, x);
  const CountingValues cv = counting_functions(ds, st, std::log(xt.x_tilde));
  const ResidueReport res = residue_and_density(t, K);
  json j = {{"K", K},
            {"log_x_K", lx},
            {"x_tilde", xt.to_json()},
            {"N", cv.N},
            {"psi", cv.psi},
            {"Pi", cv.Pi},
            {"rho_CK", res.rho_K},
            {"N_minus_rho_x", cv.N - res.rho_K * xt.x_tilde},
            {"integers", st.total},
            {"collisions", st.collisions}};
  if (fs::exists(fs::path(cfg_.out_dir) / "discretize.json")) {
    const json dj = read_json("discretize.json");
    if (dj.contains("density")) {
      const double rho_DK = dj["density"].value("rho_K", 0.0);
      j["rho_DK"] = rho_DK;
      j["N_minus_rho_DK_x"] = cv.N - rho_DK * xt.x_tilde;
    }
  }
  emit_json(out, "count.json", j);
  emit(out, "integers.csv", st.to_csv());
  out.summary = {{"N", cv.N}, {"x_tilde", xt.x_tilde}, {"certified", xt.certified}};
  return out;
}

StageOutput Pipeline::report() {
  StageOutput out{"report", {}, {}};
  const fs::path dir(cfg_.out_dir);
  auto have = [&](const char* n) { return fs::exists(dir / n); };
  if (!have("construction.json") && !have("saddles.json") && !have("perron.json") && !have("discretize.json"))
    throw Error("stage dependency missing: no stage artifacts in " + cfg_.out_dir);
  std::ostringstream md;
  md << "# Run summary\n\nconfig hash `" << cfg_.hash() << "`, K = " << cfg_.K << ", track "
     << track_name(cfg_.track) << "\n\n";
  if (have("construction.json")) {
    const json j = read_json("construction.json");
    const json& ch = j.at("checks");
    md << "## Construction\n\n| check | value |\n|---|---|\n"
       << "| psi' lower bound violations | " << ch.at("psi_violations").get<int>() << " / " << ch.at("psi_points").get<int>()
       << " |\n| R + S continuity at B | " << fmt(ch.at("max_continuity")) << " |\n| S(C) | " << fmt(ch.at("max_S_at_C"))
       << " |\n| lattice residual | " << fmt(ch.at("max_lattice")) << " |\n| phase residual | " << fmt(ch.at("max_phase"))
       << " |\n| sup weighted PNT defect | " << fmt(j.at("pnt").at("sup_weighted")) << " |\n\n";
  }
  if (have("saddles.json")) {
    const json j = read_json("saddles.json");
    md << "## Saddle residuals\n\nlog B = " << fmt(j.at("logB"), 10) << ", log x = " << fmt(j.at("logx"), 10) << ", M = "
       << j.at("M").get<int>() << "\n\n| m | sigma | t - tau | \\|f'\\| | threshold | winding | sigma law | logx law | t law | "
                                 "tail routes |\n|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& e : j.at("saddles")) {
      const json& s = e.at("saddle");
      const json& a = e.at("asymptotics");
      md << "| " << s.at("m").get<int>() << " | " << fmt(s.at("sigma"), 12) << " | " << fmt(s.at("t_minus_tau"), 8) << " | "
         << fmt(s.at("residual"), 3) << " | " << fmt(s.at("residual_threshold"), 3) << " | " << s.at("winding_int").get<int>()
         << " | " << fmt(a.at("res_sigma"), 3) << " | " << fmt(a.at("res_logx"), 3) << " | " << fmt(a.at("res_t"), 3) << " | "
         << fmt(e.at("tail_routes_rel_diff"), 3) << " |\n";
    }
    md << "\n";
  }
  if (have("perron.json")) {
    const json j = read_json("perron.json");
    const json& s0 = j.at("s0");
    md << "## Oscillation at the main saddle\n\n| quantity | value |\n|---|---|\n"
       << "| sign of the s_0 term | " << s0.at("sign").get<int>() << " |\n"
       << "| log \\|s_0 term\\| | " << fmt(s0.at("log_abs"), 8) << " |\n"
       << "| log lower bound (wedge) | " << fmt(s0.at("log_wedge_lower_bound"), 8) << " |\n"
       << "| log of the residue term | " << fmt(j.at("log_residue_term"), 8) << " |\n"
       << "| log of the other saddles | " << fmt(j.at("log_sm_total"), 8) << " |\n"
       << "| log of the connectors | " << fmt(j.at("log_connector_total"), 8) << " |\n"
       << "| margin (nats) | " << fmt(j.at("margin"), 6) << " |\n"
       << "| margin with the default T2 | " << fmt(j.at("margin_default_T2"), 6) << " |\n"
       << "| log effective-Perron error | " << fmt(j.at("log_perron_error"), 8) << " |\n\n";
    md << "## Envelope exponents\n\n| quantity | log value | exponent over log x |\n|---|---|---|\n";
    const double lx = j.at("logx");
    for (const char* k : {"log_residue_term", "log_envelope"})
      md << "| " << k << " | " << fmt(j.at(k), 8) << " | " << fmt(j.at(k).get<double>() / lx, 8) << " |\n";
    md << "| s_0 term | " << fmt(s0.at("log_abs"), 8) << " | " << fmt(s0.at("log_abs").get<double>() / lx, 8) << " |\n"
       << "| explicit envelope at x_K | " << fmt(s0.at("log_explicit_envelope"), 8) << " | "
       << fmt(s0.at("log_explicit_envelope").get<double>() / lx, 8) << " |\n\nb = " << fmt(j.at("b")) << "\n\n";
    md << "## Contour decomposition\n\n| segment | kind | log bound |\n|---|---|---|\n";
    for (const auto& s : j.at("contour").at("segments"))
      md << "| " << s.at("id").get<std::string>() << " | " << s.at("kind").get<std::string>() << " | "
         << fmt(s.at("log_bound"), 8) << " |\n";
    const json& cl = j.at("closed_loop");
    md << "\nClosed loop at x = " << fmt(cl.at("x")) << ", T = " << fmt(cl.at("T")) << ": relative residual "
       << fmt(cl.at("relative_residual"), 3) << "\n\n";
  }
  if (have("discretize.json")) {
    const json j = read_json("discretize.json");
    md << "## Discretization\n\n| quantity | value |\n|---|---|\n"
       << "| primes | " << j.at("prime_count").get<long>() << " |\n"
       << "| sup \\|pi_D - pi_C\\| | " << fmt(j.at("sup_pi_gap")) << " |\n"
       << "| exponential-sum ratio p95 | " << fmt(j.at("exp_ratio_p95")) << " |\n"
       << "| D_hat | " << fmt(j.at("log_zeta_gap").at("D_hat")) << " |\n"
       << "| rho_K | " << fmt(j.at("density").at("rho_K")) << " |\n\n";
  }
  if (have("count.json")) {
    const json j = read_json("count.json");
    md << "## Counting\n\nN(x~) = " << fmt(j.at("N"), 12) << " at x~ = " << fmt(j.at("x_tilde").at("x_tilde"), 12)
       << ", N - rho_C x~ = " << fmt(j.at("N_minus_rho_x"), 8) << "\n";
  }
  emit(out, "report.md", md.str());
  return out;
}

std::vector<StageOutput> Pipeline::run_enabled() {
  std::vector<StageOutput> v;
  const auto& s = cfg_.stages;
  if (s.construct) v.push_back(construct());
  if (s.zeta) v.push_back(zeta());
  if (s.saddle) v.push_back(saddle());
  if (s.perron) v.push_back(perron());
  if (s.discretize) v.push_back(discretize());
  if (s.count) v.push_back(count());
  if (s.report) v.push_back(report());
  return v;
}

VerifyReport Pipeline::verify() {
  VerifyReport rep;
  auto run = [&](const std::string& suite, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      rep.checks.push_back(check(suite, "no exception", false, e.what()));
    }
  };
  run("config", [&] {
    const RunConfig back = RunConfig::from_json(cfg_.to_json());
    rep.checks.push_back(check("config", "round trip", back.hash() == cfg_.hash(), cfg_.hash()));
  });
  run("measures", [&] {
    const ExpStarCheck e = check_exp_star(cfg_.seed, 20, 1e3);
    rep.checks.push_back(check("measures", "exp* equals enumeration", e.mismatches == 0,
                               std::to_string(e.mismatches) + " mismatches in " + std::to_string(e.probes)));
  });
  run("construction", [&] {
    const ConstructionChecks c = check_construction(construction(), 2000, cfg_.seed);
    rep.checks.push_back(check("construction", "psi' lower bound", c.psi_violations == 0,
                               "min margin " + fmt(c.psi_min_margin)));
    rep.checks.push_back(check("construction", "R + S continuity", c.max_continuity < 1e-12 && c.max_S_at_C < 1e-12,
                               fmt(c.max_continuity) + ", " + fmt(c.max_S_at_C)));
    const double lat_tol = std::pow(10.0, -static_cast<double>(cfg_.params.precision) + 10.0);
    rep.checks.push_back(check("construction", "lattice conditions",
                               c.max_lattice < lat_tol && c.max_phase < lat_tol,
                               fmt(c.max_lattice) + ", " + fmt(c.max_phase)));
  });
  const SequenceTable& t = construction().table();
  const int K = cfg_.K;
  run("saddle", [&] {
    const ZetaContext ctx = ZetaContext::at_tau(t, K);
    const int M = std::min(saddle_count(ctx.logB()), 5);
    const SaddlePoint s0 = find_saddle(ctx, 0);
    bool ok = true;
    double worst_tail = 0.0;
    for (int m = -M; m <= M; ++m) {
      const SaddlePoint sp = m == 0 ? s0 : find_saddle(ctx, m);
      ok = ok && sp.winding_int == 1 && sp.residual < sp.residual_threshold && (m == 0 || sp.sigma < s0.sigma);
      worst_tail = std::max(worst_tail, ctx.tail_routes(sp.point()).rel_diff);
    }
    const double t0_rel = std::abs(s0.u) * std::exp(-t.row(K).logtau_d);
    rep.checks.push_back(check("saddle", "certification", ok && t0_rel < 1e-12, "M = " + std::to_string(M)));
    rep.checks.push_back(check("zeta", "tail routes agree", worst_tail < 1e-10, fmt(worst_tail)));
  });
  if (cfg_.track == Track::Continuous) {
    run("contour", [&] {
      ShiftedOptions opt;
      opt.T2_offset = cfg_.perron.scan_T2 ? -1.0 : 0.0;
      const PerronReport pr = shifted_total(t, K, opt);
      const int want = K % 2 == 0 ? 1 : -1;
      rep.checks.push_back(check("contour", "s_0 sign", pr.s0.sign == want, std::to_string(pr.s0.sign)));
      rep.checks.push_back(check("contour", "positive margin", pr.margin > 0, fmt(pr.margin)));
      const ClosedLoopReport cl = closed_loop(t, K, 200.0, 1.5, 1e3);
      rep.checks.push_back(
          check("contour", "closed loop", std::abs(cl.relative_residual) < 1e-6, fmt(cl.relative_residual)));
    });
  }
  run("contour", [&] {
    const WedgeFuzz w = fuzz_wedge(cfg_.seed, 200);
    rep.checks.push_back(check("contour", "wedge lemma", w.violations == 0, "min slack " + fmt(w.min_slack)));
  });
  run("discretize", [&] {
    const Construction& c = discrete_construction();
    const CountingTable F(c, c.table().logA_next(K), cfg_.discretize.target, cfg_.discretize.table_step);
    DiscretizeOptions opt;
    opt.seed = cfg_.seed;
    opt.K = K;
    opt.target = cfg_.discretize.target;
    opt.exp_samples = 20;
    const DiscretizationReport r = beurling::discretize(c, F, opt);
    rep.checks.push_back(check("discretize", "sup |pi_D - F| <= 1", r.sup_pi_gap <= 1.0, fmt(r.sup_pi_gap)));
    rep.checks.push_back(
        check("discretize", "exponential sums finite", std::isfinite(r.exp_ratio_p95), fmt(r.exp_ratio_p95)));
  });
  return rep;
}

void Pipeline::write_manifest(const std::string& command, const std::vector<StageOutput>& outputs, int threads) const {
  const fs::path p = fs::path(cfg_.out_dir) / "manifest.json";
  json m;
  if (fs::exists(p)) {
    std::ifstream in(p);
    try {
      in >> m;
    } catch (const json::parse_error&) {
      m = json::object();
    }
  }
  json files = json::array();
  for (const auto& o : outputs)
    for (const auto& f : o.files) files.push_back({{"stage", o.stage}, {"file", f.name}, {"fnv1a", f.hash}});
  m["versions"] = version_info();
  json cj = cfg_.to_json();
  cj.erase("out_dir");
  m["commands"][command] = {{"config_hash", cfg_.hash()}, {"config", cj}, {"thread_cap", threads},
                            {"files", files}};
  std::ofstream os(p, std::ios::binary);
  os << m.dump(1) << "\n";
}

}  // namespace beurling
