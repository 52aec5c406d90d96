#include <chrono>
#include <cmath>
#include <iostream>
#include <numbers>

#include "dlab/error.hpp"
#include "dlab/fitting.hpp"
#include "dlab/mcsim.hpp"
#include "dlab/moments.hpp"
#include "dlab/quasimode.hpp"
#include "dlab/schrodinger.hpp"
#include "internal.hpp"

namespace dlab::cli {
namespace {

namespace fs = std::filesystem;

struct Ctx {
  const RunConfig& cfg;
  bool verbose;
  std::vector<TaskRecord>* tasks = nullptr;
  TaskRecord* task = nullptr;

  void begin(const std::string& name) {
    tasks->push_back({name, "ok", 0, "", {}});
    task = &tasks->back();
  }

  fs::path file(const std::string& name) const {
    task->artifacts.push_back(name);
    return cfg.out / name;
  }
  void log(const std::string& msg) const {
    if (verbose) std::cerr << "[" << cfg.kind << "] " << msg << "\n";
  }
};

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

MomentParams moment_params(const json& p) {
  return {p.at("nu").get<double>(), p.at("kappa").get<double>(), p.at("ell").get<int>()};
}

json run_profiles(Ctx& c) {
  const ProfileFamily fam = detail::family_from_json(c.cfg.params.at("family"), "params.family");
  const OverlapResult ov = overlap_order(fam);
  json profiles = json::array();
  for (std::size_t j = 0; j < fam.size(); ++j) {
    json cps = json::array();
    for (const auto& cp : fam.critical()[j])
      cps.push_back({{"y", cp.y}, {"order", cp.order}, {"leading_coeff", cp.leading_coeff}});
    profiles.push_back({{"degree", fam[j].degree()}, {"constant", fam[j].is_constant()}, {"critical_points", cps}});
  }
  json cand = json::array();
  for (const auto& p : ov.candidates) cand.push_back({{"y", p.y}, {"order", p.order}});
  json out = {{"n0", ov.n0},
              {"maximizers", ov.maximizers},
              {"candidates", cand},
              {"degenerate", ov.degenerate},
              {"profiles", profiles}};
  detail::write_json(c.file("profiles.json"), out);
  return {{"n0", ov.n0}, {"maximizers", ov.maximizers}};
}

json run_scaling(Ctx& c) {
  const json& p = c.cfg.params;
  const ProfileFamily fam = detail::family_from_json(p.at("family"), "params.family");
  ScalingOptions so;
  so.richardson = p.at("richardson").get<bool>();
  so.richardson_tol = p.at("richardson_tol").get<double>();
  if (p.contains("grid")) so.grid_override = p.at("grid").get<int>();
  if (p.contains("tol_eig")) so.tol_eig = p.at("tol_eig").get<double>();
  so.threads = c.cfg.threads;
  const auto lambdas = p.at("lambdas").get<std::vector<double>>();
  c.log("scaling sweep over " + std::to_string(lambdas.size()) + " couplings");
  const ScalingFit fit = scaling_study(fam, lambdas, so);
  std::vector<std::vector<double>> rows;
  for (const auto& pt : fit.points)
    rows.push_back({pt.lambda, pt.mu, double(pt.n), pt.residual, pt.mu_refined, pt.richardson_change,
                    pt.converged ? 1.0 : 0.0, double(pt.matvecs)});
  detail::write_csv(c.file("scaling.csv"), {"lambda", "mu", "n", "residual", "mu_refined", "richardson_change",
                                            "converged", "matvecs"},
                    rows);
  json out = {{"slope", fit.slope},   {"intercept", fit.intercept}, {"r2", fit.r2},
              {"n0", fit.n0},         {"target", fit.target},       {"gap", std::abs(fit.slope - fit.target)},
              {"excluded", fit.excluded}};
  detail::write_json(c.file("scaling.json"), out);
  return out;
}

json run_model(Ctx& c) {
  const json& p = c.cfg.params;
  const auto lambdas = p.at("lambdas").get<std::vector<double>>();
  const int sign = p.at("sign").get<int>();
  const double half = p.at("half_width").get<double>();
  const int points = p.at("points").get<int>();
  std::vector<std::vector<double>> rows;
  json fits = json::array();
  for (const auto& cs : p.at("cases")) {
    const int m = cs[0].get<int>(), n = cs[1].get<int>();
    std::vector<double> mus;
    for (double lam : lambdas) {
      c.log("model problem (" + std::to_string(m) + "," + std::to_string(n) + ") lambda " + std::to_string(lam));
      const auto r = model_problem_eig(m, n, sign, lam, half, points);
      if (!r.converged)
        throw ConvergenceError("schrodinger", "model_problem_eig", "Lanczos did not converge at lambda " + std::to_string(lam));
      mus.push_back(r.mu);
      rows.push_back({double(m), double(n), lam, r.mu, r.residual, r.boundary_mass});
    }
    const LinearFit f = loglog_fit(lambdas, mus);
    const double target = model_problem_exponent(m, n);
    fits.push_back({{"m", m}, {"n", n}, {"slope", f.slope}, {"r2", f.r2}, {"target", target},
                    {"gap", std::abs(f.slope - target)}});
  }
  detail::write_csv(c.file("model_problem.csv"), {"m", "n", "lambda", "mu", "residual", "boundary_mass"}, rows);
  json out = {{"sign", sign}, {"half_width", half}, {"points", points}, {"fits", fits}};
  detail::write_json(c.file("model_problem.json"), out);
  return out;
}

json run_kernel(Ctx& c) {
  const json& p = c.cfg.params;
  const std::string gen = p.at("generator");
  KernelOptions ko;
  ko.tol_null = p.at("tol_null").get<double>();
  ko.min_gap = p.at("min_gap").get<double>();
  ko.seed ^= c.cfg.seed;
  json out;
  if (gen == "matrices") {
    std::vector<Eigen::MatrixXcd> l;
    for (std::size_t i = 0; i < p.at("hermitian").size(); ++i)
      l.push_back(detail::hermitian_from_json(p.at("hermitian")[i], "params.hermitian"));
    const GeneratorFamily fam = GeneratorFamily::from_hermitian(l);
    const KernelBasis kb = kernel_basis(fam, ko);
    InvariantOptions io;
    io.seed ^= c.cfg.seed;
    const InvariantDecomposition dec = invariant_subspaces(kb, fam, io);
    const auto full = has_invariant_measure(fam, Eigen::MatrixXcd::Identity(fam.dim(), fam.dim()),
                                            MeasureSector::trace_free, ko.tol_null);
    json subs = json::array();
    for (const auto& b : dec.bases) subs.push_back({{"dim", b.cols()}, {"h1_max", nullptr}});
    out = {{"dim", fam.dim()},
           {"kernel_dim", kb.rank()},
           {"route", kb.route()},
           {"commutant_check_max", kb.commutator_residual},
           {"oracle_dim", kb.oracle_dim ? json(*kb.oracle_dim) : json(nullptr)},
           {"oracle_max_sine", optional_number(kb.oracle_max_sine)},
           {"gap_ratio", finite_or_null(kb.gap_ratio)},
           {"subspaces", subs},
           {"degenerate", dec.degenerate},
           {"invariance_defect", dec.invariance_defect},
           {"trace_free_invariant_measure", full.exists},
           {"verdict", kb.rank() <= 1 ? "enhancing" : "invariant_subspace_found"}};
  } else {
    FamilyBuilder builder;
    if (gen == "galerkin_2d") {
      std::vector<TrigField2D> fields;
      for (const auto& f : p.at("fields")) fields.push_back(detail::field_from_json(f, "params.fields"));
      const bool mean_free = p.at("mean_free").get<bool>();
      builder = [fields, mean_free](int k) { return galerkin_2d(fields, k, mean_free); };
    } else {
      const ProfileFamily fam = detail::family_from_json(p.at("family"), "params.family");
      const int ell = p.at("ell").get<int>();
      builder = [fam, ell](int k) { return galerkin_shear(fam, ell, k); };
    }
    const auto cutoffs = p.at("cutoffs").get<std::vector<int>>();
    c.log("kernel diagnostic over " + std::to_string(cutoffs.size()) + " cutoffs");
    const EnhancementReport rep = enhancement_diagnostic(builder, cutoffs, ko);
    json per = json::array();
    for (const auto& cd : rep.cutoffs) {
      json subs = json::array();
      for (const auto& s : cd.subspaces) subs.push_back({{"dim", s.dim}, {"h1_max", s.h1_max}});
      per.push_back({{"cutoff", cd.cutoff},
                     {"dim", cd.dim},
                     {"kernel_dim", cd.kernel_dim},
                     {"resolved_dim", cd.resolved_dim},
                     {"commutant_check_max", cd.commutant_check_max},
                     {"h1_min", finite_or_null(cd.h1_min)},
                     {"subspaces", subs}});
    }
    const json& last = per.back();
    out = {{"dim", last.at("dim")},
           {"commutant_check_max", last.at("commutant_check_max")},
           {"subspaces", last.at("subspaces")},
           {"verdict", rep.verdict},
           {"detail", rep.detail},
           {"cutoffs", per}};
  }
  detail::write_json(c.file("kernel.json"), out);
  return {{"verdict", out.at("verdict")}, {"dim", out.at("dim")}};
}

// Eigenvalue of the two-point operator, used for the step size and as the
// reference decay rate.
double two_point_mu(const ProfileFamily& fam, const MomentParams& mp, int n, const Ctx& c) {
  const PotentialGrid v = assemble_potential_2d(fam, TorusGrid(n, 2));
  c.log("reference eigenvalue on N = " + std::to_string(n));
  const EigenResult er = smallest_eigenvalue(v, effective_lambda(mp));
  if (!er.converged) throw ConvergenceError("schrodinger", "smallest_eigenvalue", "reference eigenvalue did not converge");
  return er.mu;
}

struct TimeGrid {
  double dt = 0.0;
  long steps = 0;
};

TimeGrid time_grid(const json& p, const MomentParams& mp, double mu) {
  TimeGrid tg;
  tg.dt = p.contains("dt") ? p.at("dt").get<double>() : recommended_dt(mp, mu, p.at("dt_factor").get<double>());
  const double t_final = p.contains("t_final") ? p.at("t_final").get<double>()
                                               : p.at("efolds").get<double>() / (mp.nu * mu);
  tg.steps = std::max(1L, std::lround(t_final / tg.dt));
  return tg;
}

json run_moments(Ctx& c) {
  const json& p = c.cfg.params;
  const ProfileFamily fam = detail::family_from_json(p.at("family"), "params.family");
  const MomentParams mp = moment_params(p);
  const double lam = effective_lambda(mp);
  const int n = p.contains("n") ? p.at("n").get<int>() : grid_rule(lam);
  const double mu = two_point_mu(fam, mp, n, c);
  const TimeGrid tg = time_grid(p, mp, mu);
  const TorusGrid g2(n, 2), g1(n, 1);
  const PotentialGrid v = assemble_potential_2d(fam, g2);
  EvolveOptions eo;
  eo.record_every = p.at("record_every").get<int>();
  eo.mu_estimate = mu;
  c.log("evolving " + std::to_string(tg.steps) + " steps");
  const EvolveResult r = evolve(init_rank_one(default_initial_phi(g1), mp), v, tg.dt, tg.steps, eo);
  std::vector<std::vector<double>> rows;
  for (const auto& tp : r.series) rows.push_back({tp.t, tp.trace});
  detail::write_csv(c.file("trace.csv"), {"t", "trace"}, rows);
  json out = {{"family", p.at("family")}, {"nu", mp.nu},      {"kappa", mp.kappa},
              {"ell", mp.ell},            {"n", n},            {"dt", tg.dt},
              {"steps", tg.steps},        {"lambda_eff", lam}, {"mu", mu},
              {"nu_mu", mp.nu * mu},      {"rate", nullptr},   {"rel_gap", nullptr},
              {"hermitian_defect", r.hermitian_defect}, {"warnings", r.warnings}};
  // The trace stays usable when the fit fails.
  detail::write_json(c.file("decay.json"), out);
  c.begin("fit_decay");
  const DecayFit fit = fit_decay(r.series, {}, mp.nu * mu);
  out["rate"] = fit.rate;
  out["rel_gap"] = optional_number(fit.rel_gap);
  out["t_a"] = fit.t_a;
  out["t_b"] = fit.t_b;
  out["r2"] = fit.r2;
  // Same comparison with the coupling 2 kappa ell^2, i.e. lambda * sqrt(2).
  const EigenResult alt = smallest_eigenvalue(v, std::sqrt(2.0) * lam);
  out["nu_mu_doubled_coupling"] = mp.nu * alt.mu;
  out["rel_gap_doubled_coupling"] = std::abs(fit.rate - mp.nu * alt.mu) / (mp.nu * alt.mu);
  detail::write_json(c.cfg.out / "decay.json", out);
  return {{"rate", fit.rate}, {"nu_mu", mp.nu * mu}, {"rel_gap", optional_number(fit.rel_gap)}};
}

json run_mc(Ctx& c) {
  const json& p = c.cfg.params;
  SimConfig sc;
  sc.family = detail::family_from_json(p.at("family"), "params.family");
  const MomentParams mp = moment_params(p);
  sc.nu = mp.nu;
  sc.kappa = mp.kappa;
  sc.ell = mp.ell;
  sc.n = p.at("n").get<int>();
  sc.n_paths = p.at("n_paths").get<int>();
  sc.antithetic = p.at("antithetic").get<bool>();
  sc.seed = c.cfg.seed;
  sc.threads = c.cfg.threads;
  const double mu = two_point_mu(sc.family, mp, sc.n, c);
  const TimeGrid tg = time_grid(p, mp, mu);
  sc.dt = tg.dt;
  sc.t_final = tg.dt * tg.steps;
  const long ncp = p.at("checkpoints").get<long>();
  for (long i = 1; i <= ncp; ++i) sc.checkpoints.push_back(tg.steps * i / ncp);

  if (p.contains("lower_bound")) {
    const double y0 = p.at("lower_bound").at("y0").get<double>();
    sc.checkpoints.clear();
    c.log("lower-bound experiment at y0 = " + std::to_string(y0));
    const LowerBoundReport lb = lower_bound_experiment(sc.family, y0, sc);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < lb.t.size(); ++i)
      rows.push_back({lb.t[i], lb.mc_norm[i], lb.mc_stderr[i], lb.det_norm[i]});
    detail::write_csv(c.file("lower_bound.csv"), {"t", "mc_norm", "stderr", "det_norm"}, rows);
    json out = {{"y0", lb.y0},         {"n0", lb.n0},           {"lambda", lb.lambda},
                {"beta", lb.beta},     {"max_z", lb.max_z},     {"nu_rayleigh", lb.nu_rayleigh},
                {"det_rate", lb.det_rate}, {"bound_holds", lb.bound_holds}, {"dt", sc.dt},
                {"steps", tg.steps}};
    detail::write_json(c.file("lower_bound.json"), out);
    return out;
  }

  c.log("ensemble of " + std::to_string(sc.n_paths) + " paths, " + std::to_string(tg.steps) + " steps");
  const EnsembleStats st = run_ensemble(sc);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < st.t.size(); ++i) rows.push_back({st.t[i], st.mean_norm2[i], st.stderr_norm2[i]});
  detail::write_csv(c.file("ensemble.csv"), {"t", "mean_norm2", "stderr"}, rows);
  json cps = json::array();
  for (const auto& cp : st.checkpoints) {
    char name[64];
    std::snprintf(name, sizeof name, "correlation_%06ld.bin", cp.step);
    write_field_binary(cp.mean, c.file(name).string());
    cps.push_back({{"step", cp.step}, {"t", cp.t}, {"file", name}, {"se_aggregate", cp.se_aggregate}});
  }
  json out = {{"family", p.at("family")}, {"nu", mp.nu},         {"kappa", mp.kappa},
              {"ell", mp.ell},            {"n", sc.n},           {"dt", sc.dt},
              {"steps", tg.steps},        {"n_paths", sc.n_paths}, {"antithetic", sc.antithetic},
              {"effective_samples", st.effective_samples}, {"mu", mu}, {"checkpoints", cps}};
  json summary = {{"final_mean_norm2", st.mean_norm2.back()}, {"final_stderr", st.stderr_norm2.back()}};

  if (p.at("compare_moments").get<bool>()) {
    const PotentialGrid v = assemble_potential_2d(sc.family, TorusGrid(sc.n, 2));
    const EvolveResult ev = evolve(init_rank_one(default_initial_phi(TorusGrid(sc.n, 1)), mp), v, sc.dt, tg.steps);
    double max_z = 0;
    std::vector<std::vector<double>> cmp;
    for (std::size_t i = 0; i < st.t.size(); ++i) {
      const double det = ev.series[i].trace;
      // Roundoff floor for the exactly known initial value.
      const double se = std::max(st.stderr_norm2[i], 1e-12 * std::abs(det));
      const double z = std::abs(st.mean_norm2[i] - det) / se;
      max_z = std::max(max_z, z);
      cmp.push_back({st.t[i], st.mean_norm2[i], det, st.stderr_norm2[i], z});
    }
    detail::write_csv(c.file("mc_vs_moments.csv"), {"t", "mc", "deterministic", "stderr", "z"}, cmp);
    out["max_z"] = max_z;
    summary["max_z"] = max_z;
  }
  detail::write_json(c.file("mc.json"), out);
  return summary;
}

json run_quasimode(Ctx& c) {
  const json& p = c.cfg.params;
  const ProfileFamily fam = detail::family_from_json(p.at("family"), "params.family");
  QuasimodeStudyOptions qo;
  if (p.contains("beta")) qo.beta = p.at("beta").get<double>();
  qo.grid_points = p.at("grid_points").get<int>();
  qo.with_eigenvalue = p.at("with_eigenvalue").get<bool>();
  std::optional<double> y0;
  if (p.contains("y0")) y0 = p.at("y0").get<double>();
  const QuasimodeReport rep = quasimode_study(fam, y0, p.at("lambdas").get<std::vector<double>>(), qo);
  std::vector<std::vector<double>> rows;
  bool sandwich = true;
  for (const auto& pt : rep.points) {
    rows.push_back({pt.lambda, pt.rayleigh, pt.ratio, pt.mu_min, pt.y0});
    if (qo.with_eigenvalue && pt.mu_min > pt.rayleigh * (1 + 1e-9)) sandwich = false;
  }
  detail::write_csv(c.file("quasimode.csv"), {"lambda", "rayleigh", "ratio", "mu_min", "y0"}, rows);
  json out = {{"n0", rep.n0},
              {"beta", rep.beta},
              {"beta_interval", {rep.interval.first, rep.interval.second}},
              {"c", rep.c},
              {"mu0", rep.mu0},
              {"top_decade_variation", rep.top_decade_variation},
              {"rayleigh_above_mu_min", qo.with_eigenvalue ? json(sandwich) : json(nullptr)}};
  detail::write_json(c.file("quasimode.json"), out);
  return out;
}

json run_report(Ctx& c) {
  c.task->artifacts = {"summary.json", "plot_loglog_mu.csv", "plot_log_trace.csv"};
  return report(c.cfg.params.at("dir").get<std::string>(), c.cfg.out);
}

}  // namespace

std::string toolkit_version() { return DLAB_VERSION; }

RunResult run(const RunConfig& cfg, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  Ctx ctx{cfg, verbose};
  fs::create_directories(cfg.out);
  res.tasks.reserve(4);
  ctx.tasks = &res.tasks;
  ctx.begin(cfg.kind);
  try {
    if (cfg.kind == "profiles") res.summary = run_profiles(ctx);
    else if (cfg.kind == "eig-scaling") res.summary = run_scaling(ctx);
    else if (cfg.kind == "model-problem") res.summary = run_model(ctx);
    else if (cfg.kind == "kernel") res.summary = run_kernel(ctx);
    else if (cfg.kind == "moments") res.summary = run_moments(ctx);
    else if (cfg.kind == "mc") res.summary = run_mc(ctx);
    else if (cfg.kind == "quasimode") res.summary = run_quasimode(ctx);
    else if (cfg.kind == "report") res.summary = run_report(ctx);
  } catch (const Error& e) {
    ctx.task->status = "failed";
    ctx.task->exit_code = e.exit_code();
    ctx.task->error = e.what();
    res.exit_code = e.exit_code();
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json tasks = json::array();
  for (const auto& t : res.tasks) {
    json tj = {{"name", t.name}, {"status", t.status}, {"artifacts", t.artifacts}};
    if (!t.error.empty()) tj["error"] = t.error;
    tasks.push_back(tj);
  }
  json manifest = {{"toolkit", "dissipation-lab"},
                   {"version", toolkit_version()},
                   {"config_hash", config_hash(cfg)},
                   {"config", to_json(cfg)},
                   {"wall_time_s", wall},
                   {"exit_code", res.exit_code},
                   {"tasks", tasks},
                   {"summary", res.summary.is_null() ? json::object() : res.summary}};
  detail::write_json(cfg.out / "manifest.json", manifest);
  return res;
}

}  // namespace dlab::cli
