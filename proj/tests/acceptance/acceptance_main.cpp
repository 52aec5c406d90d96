// One PASS/FAIL line per acceptance criterion. Exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../support/random_family.hpp"
#include "dlab/fitting.hpp"
#include "dlab/linalg.hpp"
#include "dlab/mcsim.hpp"
#include "dlab/moments.hpp"
#include "dlab/profiles.hpp"
#include "dlab/quasimode.hpp"
#include "dlab/schrodinger.hpp"
#include "dlab/twopoint.hpp"

using namespace dlab;

namespace {

constexpr double kPi = 3.141592653589793;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------- 1

Eigen::MatrixXd kernel_coordinates(const KernelBasis& kb) {
  const int d = kb.dim();
  Eigen::MatrixXd c(static_cast<Eigen::Index>(d) * d, kb.rank());
  for (long i = 0; i < kb.rank(); ++i) c.col(i) = hermitian_coordinates(kb.matrix(i));
  return c;
}

Outcome kernel_oracle() {
  std::mt19937_64 rng(20240601);
  int agree = 0, degenerate = 0;
  double worst = 0;
  std::string first_bad;
  for (int t = 0; t < 50; ++t) {
    const GeneratorFamily fam = GeneratorFamily::from_hermitian(testing::random_family(t, rng));
    KernelOptions o;
    o.verify = false;
    const KernelBasis kb = kernel_basis(fam, o);
    const Eigen::MatrixXd oracle = commutant_oracle(fam, std::sqrt(o.tol_null));
    double s = 0;
    bool same = oracle.cols() == kb.rank();
    if (same && kb.rank() > 0) s = linalg::principal_angle_sines(kernel_coordinates(kb), oracle).maxCoeff();
    worst = std::max(worst, s);
    if (same && s < 1e-6) ++agree;
    else if (first_bad.empty())
      first_bad = fmt(" first mismatch: family %d (d=%d, kernel %ld, oracle %ld)", t, fam.dim(), kb.rank(), long(oracle.cols()));
    if (kb.rank() > 1) ++degenerate;
  }
  return {agree == 50, fmt("%d/50 families agree, %d with kernel dim > 1, max angle sine %.1e", agree, degenerate, worst) +
                           first_bad};
}

// ---------------------------------------------------------------- 2, 3

Outcome scaling(const ProfileFamily& fam, double lo, double hi) {
  const ScalingFit f = scaling_study(fam, {25, 50, 100, 200, 400});
  bool certified = f.excluded.empty();
  double worst = 0;
  for (const auto& p : f.points) {
    worst = std::max(worst, p.richardson_change);
    certified = certified && p.converged && p.richardson_change <= 0.01;
  }
  const bool pass = certified && f.slope >= lo && f.slope <= hi;
  return {pass, fmt("n0=%d slope %.4f (target %.4f, window [%.2f, %.2f]), worst Richardson change %.1e", f.n0, f.slope,
                    f.target, lo, hi, worst)};
}

// ---------------------------------------------------------------- 4

Outcome model_problem() {
  const int cases[3][2] = {{1, 1}, {1, 2}, {2, 1}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    std::vector<double> ls, mus;
    for (double lam = 16; lam <= 512; lam *= 2) {
      const ModelProblemResult r = model_problem_eig(c[0], c[1], -1, lam, 2.0, 255);
      ls.push_back(lam);
      mus.push_back(r.mu);
    }
    const LinearFit f = loglog_fit(ls, mus);
    const double target = model_problem_exponent(c[0], c[1]);
    const bool ok = std::abs(f.slope - target) <= 0.06;
    pass = pass && ok;
    detail += fmt("%s(%d,%d) slope %.4f vs %.4f %s", detail.empty() ? "" : "; ", c[0], c[1], f.slope, target,
                  ok ? "ok" : "outside +-0.06");
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 5

Outcome mc_vs_moments() {
  SimConfig c;
  c.nu = 1e-3;
  c.kappa = 1.0;
  c.ell = 8;
  c.family = ProfileFamily({ShearProfile::sine()});
  c.n = 128;
  c.n_paths = 2000;
  c.seed = 5;
  const MomentParams mp{c.nu, c.kappa, c.ell};
  const TorusGrid g1(c.n, 1), g2(c.n, 2);
  const PotentialGrid v = assemble_potential_2d(c.family, g2);
  const double mu = smallest_eigenvalue(v, effective_lambda(mp)).mu;
  c.dt = recommended_dt(mp, mu);
  // Run until the deterministic trace has dropped by a factor of 10.
  long steps = 0;
  {
    MomentState s = init_rank_one(default_initial_phi(g1), mp);
    const long chunk = 10;
    while (true) {
      const EvolveResult r = evolve(s, v, c.dt, chunk);
      steps += chunk;
      s = r.state;
      if (r.series.back().trace <= 0.1) break;
    }
  }
  c.t_final = steps * c.dt;
  const EnsembleStats st = run_ensemble(c);
  const EvolveResult det = evolve(init_rank_one(default_initial_phi(g1), mp), v, c.dt, steps);
  // Checkpoints: 24 evenly spaced steps including the last.
  const int m = 24;
  double max_z = 0;
  int ok = 0;
  for (int i = 1; i <= m; ++i) {
    const long k = steps * i / m;
    // The Strang step of the ensemble has exactly the moment step as its
    // mean, so the splitting bias is zero.
    const double bias = 0.0;
    const double diff = std::abs(st.mean_norm2[k] - det.series[k].trace);
    const double se = std::max(st.stderr_norm2[k], 1e-12 * det.series[k].trace);
    max_z = std::max(max_z, diff / se);
    if (diff <= 3 * se + bias) ++ok;
  }
  return {ok == m, fmt("%d/%d checkpoints within 3 SE, max |z| %.2f, T=%.4g (%ld steps), final trace %.4f, %d paths",
                       ok, m, max_z, c.t_final, steps, det.series.back().trace, c.n_paths)};
}

// ---------------------------------------------------------------- 6, 7

struct RateRun {
  double rate = 0.0, nu_mu = 0.0, rel_gap = 0.0, lambda = 0.0;
  int n = 0;
};

RateRun decay_rate(const MomentParams& p, double efolds = 8.0) {
  const ProfileFamily fam({ShearProfile::sine()});
  RateRun out;
  out.lambda = effective_lambda(p);
  out.n = grid_rule(out.lambda);
  const TorusGrid g1(out.n, 1), g2(out.n, 2);
  const PotentialGrid v = assemble_potential_2d(fam, g2);
  const double mu = smallest_eigenvalue(v, out.lambda).mu;
  out.nu_mu = p.nu * mu;
  const double dt = recommended_dt(p, mu);
  const long steps = std::lround(efolds / (out.nu_mu * dt));
  const EvolveResult r = evolve(init_rank_one(default_initial_phi(g1), p), v, dt, steps,
                                {.record_every = int(std::max(1L, steps / 400)), .mu_estimate = mu});
  const DecayFit f = fit_decay(r.series, {}, out.nu_mu);
  out.rate = f.rate;
  out.rel_gap = *f.rel_gap;
  return out;
}

Outcome rate_eigenvalue_link() {
  const MomentParams triples[3] = {{1e-2, 1.0, 1}, {1e-3, 1.0, 4}, {2e-3, 0.5, 8}};
  bool pass = true;
  std::string detail;
  for (const auto& p : triples) {
    const RateRun r = decay_rate(p);
    pass = pass && r.rel_gap <= 0.05;
    detail += fmt("%s(nu=%g,kappa=%g,ell=%d) rate %.5g vs nu*mu %.5g gap %.2f%%", detail.empty() ? "" : "; ", p.nu, p.kappa,
                  p.ell, r.rate, r.nu_mu, 100 * r.rel_gap);
  }
  return {pass, detail};
}

Outcome ell_scaling() {
  std::vector<double> ells, rates;
  std::string detail;
  for (int ell : {4, 8, 16, 32}) {
    const RateRun r = decay_rate({1e-3, 1.0, ell});
    ells.push_back(ell);
    rates.push_back(r.rate);
    detail += fmt("%sell=%d rate %.4g", detail.empty() ? "" : ", ", ell, r.rate);
  }
  const LinearFit f = loglog_fit(ells, rates);
  return {f.slope >= 0.58 && f.slope <= 0.75, fmt("slope %.4f (window [0.58, 0.75]); ", f.slope) + detail};
}

// ---------------------------------------------------------------- 8

Outcome quasimode_sandwich() {
  std::vector<double> lambdas;
  for (int k = 4; k <= 9; ++k) lambdas.push_back(std::ldexp(1.0, k));
  const QuasimodeReport r = quasimode_study(ProfileFamily({ShearProfile::sine()}), kPi / 2, lambdas);
  bool below = true;
  for (const auto& p : r.points) below = below && p.mu_min <= p.rayleigh;
  return {below && r.top_decade_variation < 0.2,
          fmt("mu_min <= R(q) at %s lambdas, top-decade variation of R/lambda^(2/3) %.2f%% (n0=%d, beta=%.3f)",
              below ? "all" : "NOT all", 100 * r.top_decade_variation, r.n0, r.beta)};
}

// ---------------------------------------------------------------- 9

Outcome hypoelliptic() {
  FamilyBuilder sinsin = [](int k) {
    return galerkin_2d({TrigField2D::shear_x(ShearProfile::sine()), TrigField2D::shear_y(ShearProfile::sine())}, k);
  };
  const EnhancementReport a = enhancement_diagnostic(sinsin, {8, 16, 32});
  bool zero = true;
  std::string dims;
  for (const auto& c : a.cutoffs) {
    zero = zero && c.resolved_dim == 0;
    dims += fmt("%sK=%d: %ld (raw %ld)", dims.empty() ? "" : ", ", c.cutoff, c.resolved_dim, c.kernel_dim);
  }
  FamilyBuilder flat = [](int k) { return galerkin_2d({TrigField2D::shear_x(ShearProfile::constant(1.0))}, k); };
  const EnhancementReport b = enhancement_diagnostic(flat, {2, 3, 4});
  double h1 = 0;
  for (const auto& c : b.cutoffs) h1 = std::max(h1, c.h1_min);
  const bool counter = b.verdict == "invariant_subspace_found" && h1 < 2.0;
  return {zero && counter && a.verdict == "enhancing",
          "sin/sin kernel dims " + dims + ", verdict " + a.verdict + "; constant shear verdict " + b.verdict +
              fmt(", max H1 diagnostic %.3f", h1)};
}

// ---------------------------------------------------------------- 10

Outcome conservation() {
  // Path norms without diffusion.
  SimConfig c;
  c.nu = 0.0;
  c.kappa = 1.0;
  c.ell = 8;
  c.family = ProfileFamily({ShearProfile::sine(), ShearProfile::cosine()});
  c.n = 128;
  c.dt = 0.01;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, std::sqrt(c.dt));
  double norm_err = 0;
  for (int path = 0; path < 20; ++path) {
    Field phi = default_initial_phi(TorusGrid(c.n, 1));
    for (int k = 0; k < 200; ++k) {
      const double inc[2] = {nd(rng), nd(rng)};
      phi = step_path(phi, inc, c);
      norm_err = std::max(norm_err, std::abs(l2_norm(phi) * l2_norm(phi) - 1.0));
    }
  }
  // Heat semigroup e^{s A} e^{t A} = e^{(s+t) A}.
  const TorusGrid g(64, 2);
  const Field f = sample(g, [](double y, double x) {
    return cplx(std::sin(3 * y) * std::cos(2 * x) + 0.3 * std::cos(7 * x), std::sin(y + 5 * x));
  });
  const Field a = heat_step(heat_step(f, 0.3, 0.7), 0.3, 1.1), b = heat_step(f, 0.3, 1.8);
  double semi = 0;
  for (std::size_t i = 0; i < f.size(); ++i) semi = std::max(semi, std::abs(a[i] - b[i]));
  // Hermitian symmetry of g and Strang order.
  const ProfileFamily fam({ShearProfile::sine()});
  const MomentParams p{0.05, 0.2, 1};
  const TorusGrid g1(32, 1), g2(32, 2);
  const PotentialGrid v = assemble_potential_2d(fam, g2);
  const Field phi = sample(g1, [](double y) { return (std::exp(cplx(0, y)) + 0.5 * std::exp(cplx(0, -2 * y))) / std::sqrt(2.5 * 2 * kPi); });
  const EvolveResult h = evolve(init_rank_one(phi, p), v, 0.05, 200, {.record_every = 1});
  const double herm_final = hermitian_defect(h.state.g);
  auto trace_at = [&](double dt) { return evolve(init_rank_one(phi, p), v, dt, std::lround(2.0 / dt)).series.back().trace; };
  const double ref = trace_at(0.0025);
  const double e1 = std::abs(trace_at(0.2) - ref), e2 = std::abs(trace_at(0.1) - ref), e3 = std::abs(trace_at(0.05) - ref);
  const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
  const bool pass = norm_err <= 1e-12 && semi <= 1e-12 && herm_final == 0.0 && h.hermitian_defect <= 1e-12 && order >= 1.8;
  return {pass, fmt("norm drift %.1e, semigroup defect %.1e, Hermitian defect %.1e during / %.1e final, observed Strang "
                    "order %.3f",
                    norm_err, semi, h.hermitian_defect, herm_final, order)};
}

// ---------------------------------------------------------------- 11

// Independent oracle: derivatives from the coefficient table directly,
// critical points as zeros of sum_j u_j'^2 on a fine grid.
struct Trig {
  std::map<int, std::pair<double, double>> c;  // k -> (cos, sin)
  Trig diff() const {
    Trig d;
    for (const auto& [k, ab] : c)
      if (k > 0) d.c[k] = {k * ab.second, -k * ab.first};
    return d;
  }
  double operator()(double y) const {
    double s = 0;
    for (const auto& [k, ab] : c) s += ab.first * std::cos(k * y) + ab.second * std::sin(k * y);
    return s;
  }
};

int oracle_n0(const std::vector<Trig>& us) {
  const int m = 1 << 14;
  auto energy = [&](double y) {
    double s = 0;
    for (const auto& u : us) s += std::pow(u.diff()(y), 2);
    return s;
  };
  int best = 0;
  for (int i = 0; i < m; ++i) {
    const double y = 2 * kPi * i / m, h = 2 * kPi / m;
    const double e = energy(y);
    if (!(e <= energy(y - h) && e <= energy(y + h))) continue;
    double lo = y - h, hi = y + h;
    for (int it = 0; it < 100; ++it) {
      const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
      (energy(a) < energy(b) ? hi : lo) = (energy(a) < energy(b) ? b : a);
    }
    const double yc = 0.5 * (lo + hi);
    if (energy(yc) > 1e-14) continue;
    int order = 1000;
    for (const auto& u : us) {
      int o = 0;
      Trig d = u.diff();
      while (o < 20 && std::abs(d(yc)) < 1e-6) {
        ++o;
        d = d.diff();
      }
      order = std::min(order, o);
    }
    best = std::max(best, order);
  }
  return best;
}

Outcome n0_detection() {
  const Trig s{{{1, {0.0, 1.0}}}}, c{{{1, {1.0, 0.0}}}}, s3{{{1, {0.0, 0.75}}, {3, {0.0, -0.25}}}};
  struct Case {
    const char* name;
    ProfileFamily fam;
    std::vector<Trig> oracle;
    int expected;
  };
  const std::vector<Case> cases = {{"sin", ProfileFamily({ShearProfile::sine()}), {s}, 1},
                                   {"sin,cos", ProfileFamily({ShearProfile::sine(), ShearProfile::cosine()}), {s, c}, 0},
                                   {"sin^3", ProfileFamily({sin_cubed()}), {s3}, 2}};
  bool pass = true;
  std::string detail;
  for (const auto& k : cases) {
    const int got = overlap_order(k.fam).n0, ref = oracle_n0(k.oracle);
    pass = pass && got == k.expected && ref == k.expected;
    detail += fmt("%s{%s} -> %d (oracle %d)", detail.empty() ? "" : ", ", k.name, got, ref);
  }
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all = {
      {1, "kernel/commutant oracle equivalence", 60, kernel_oracle},
      {2, "scaling n0=0 {sin, cos}", 600,
       [] { return scaling(ProfileFamily({ShearProfile::sine(), ShearProfile::cosine()}), 0.93, 1.05); }},
      {3, "scaling n0=1 {sin}", 600, [] { return scaling(ProfileFamily({ShearProfile::sine()}), 0.61, 0.72); }},
      {4, "model problem exponents", 600, model_problem},
      {5, "MC vs deterministic moments", 900, mc_vs_moments},
      {6, "decay rate vs eigenvalue", 600, rate_eigenvalue_link},
      {7, "ell-scaling of the rate", 600, ell_scaling},
      {8, "quasimode sandwich", 300, quasimode_sandwich},
      {9, "hypoelliptic example", 300, hypoelliptic},
      {10, "conservation and exactness", 120, conservation},
      {11, "n0 detection", 1, n0_detection},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d %s: %s [%.1fs%s] %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                in_time ? "" : fmt(", over the %.0fs budget", c.budget_s).c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", int(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
