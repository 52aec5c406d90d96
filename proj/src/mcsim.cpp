#include "dlab/mcsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"
#include "dlab/parallel.hpp"
#include "dlab/quasimode.hpp"
#include "dlab/schrodinger.hpp"
#include "dlab/simd.hpp"

namespace dlab {
namespace {

class PathStepper {
 public:
  explicit PathStepper(const SimConfig& c)
      : grid_(c.n, 1), amplitude_(std::sqrt(2.0 * c.kappa) * c.ell), phase_(c.n) {
    const std::vector<double> k2 = laplacian_symbol(grid_);
    half_.resize(c.n);
    for (int i = 0; i < c.n; ++i) half_[i] = std::exp(-0.5 * c.nu * k2[i] * c.dt) / c.n;
    u_.assign(c.family.size(), std::vector<double>(c.n));
    for (std::size_t j = 0; j < c.family.size(); ++j)
      for (int i = 0; i < c.n; ++i) u_[j][i] = c.family[j](grid_.coordinate(i));
  }

  const TorusGrid& grid() const { return grid_; }

  void heat_half(Field& phi) const {
    fft::forward(grid_, phi.values());
    simd::active().scale_real(phi.values().data(), half_.data(), half_.size());
    fft::backward(grid_, phi.values());
  }

  void step(Field& phi, std::span<const double> dw, double sign = 1.0) {
    heat_half(phi);
    const int n = grid_.n();
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < u_.size(); ++j) s += u_[j][i] * dw[j];
      phase_[i] = std::polar(1.0, -sign * amplitude_ * s);
    }
    simd::active().mul_complex(phi.values().data(), phase_.data(), n);
    heat_half(phi);
  }

 private:
  TorusGrid grid_;
  double amplitude_;
  std::vector<double> half_;
  std::vector<std::vector<double>> u_;
  std::vector<cplx> phase_;
};

void validate(const SimConfig& c) {
  if (c.family.size() == 0) throw ConfigError("mcsim", "run_ensemble", "profile family is empty");
  if (!(c.dt > 0)) throw ConfigError("mcsim", "run_ensemble", "dt must be positive");
  if (!(c.nu >= 0) || !(c.kappa >= 0)) throw ConfigError("mcsim", "run_ensemble", "nu and kappa must be >= 0");
  if (c.n_paths < 2) throw ConfigError("mcsim", "run_ensemble", "n_paths must be at least 2");
  if (c.antithetic && c.n_paths % 2 != 0)
    throw ConfigError("mcsim", "run_ensemble", "antithetic pairing needs an even n_paths");
  TorusGrid(c.n, 1);
  c.steps();
  if (c.initial && !(c.initial->grid() == TorusGrid(c.n, 1)))
    throw ConfigError("mcsim", "run_ensemble", "initial field grid differs from N");
}

// Deterministic stream for one sample (a path, or an antithetic pair).
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Field initial_field(const SimConfig& c) {
  return c.initial ? *c.initial : default_initial_phi(TorusGrid(c.n, 1));
}

// Samples are split into at most kBlocks contiguous blocks that depend only
// on the sample count; each block runs on one thread in sample order, so
// per-block sums do not depend on the thread count.
constexpr int kBlocks = 16;

int block_count(int samples) { return std::min(kBlocks, samples); }

// Runs every sample; `observe(block, sample, step, members)` sees the one or
// two path states of a sample after each step (step 0 is the initial state).
template <class Observe>
void drive(const SimConfig& c, Observe&& observe) {
  const long steps = c.steps();
  const int per_sample = c.antithetic ? 2 : 1;
  const int samples = c.n_paths / per_sample;
  const int blocks = block_count(samples);
  const std::size_t nprof = c.family.size();
  const Field phi0 = initial_field(c);
  parallel_for(blocks, c.threads, [&](std::size_t b) {
    PathStepper stepper(c);
    const std::size_t lo = samples * b / blocks, hi = samples * (b + 1) / blocks;
    for (std::size_t s = lo; s < hi; ++s) {
      auto eng = substream(c.seed, s);
      std::normal_distribution<double> normal(0.0, std::sqrt(c.dt));
      std::vector<Field> members(per_sample, phi0);
      std::vector<double> dw(nprof);
      observe(b, s, 0L, members);
      for (long k = 1; k <= steps; ++k) {
        for (auto& x : dw) x = normal(eng);
        for (int m = 0; m < per_sample; ++m) {
          stepper.step(members[m], dw, m == 0 ? 1.0 : -1.0);
          if (!members[m].all_finite()) {
            std::ostringstream os;
            os << "non-finite field on path " << s * per_sample + m << " at step " << k;
            throw InvariantError("mcsim", "run_ensemble", os.str());
          }
        }
        observe(b, s, k, members);
      }
    }
  });
}

}  // namespace

long SimConfig::steps() const {
  const double r = t_final / dt;
  const long k = std::lround(r);
  if (!(t_final >= 0) || std::abs(r - k) > 1e-9 * std::max(1.0, r))
    throw ConfigError("mcsim", "SimConfig", "T / dt must be an integer");
  return k;
}

Field step_path(const Field& phi, std::span<const double> increments, const SimConfig& config) {
  if (increments.size() != config.family.size())
    throw ConfigError("mcsim", "step_path", "need one increment per profile");
  if (!(phi.grid() == TorusGrid(config.n, 1))) throw ConfigError("mcsim", "step_path", "field grid differs from N");
  PathStepper stepper(config);
  Field out = phi;
  stepper.step(out, increments);
  return out;
}

EnsembleStats run_ensemble(const SimConfig& c) {
  validate(c);
  const long steps = c.steps();
  const int per_sample = c.antithetic ? 2 : 1;
  const int samples = c.n_paths / per_sample;
  const int n = c.n;
  const double h = 2.0 * 3.141592653589793 / n;

  std::vector<long> cps = c.checkpoints;
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  for (long k : cps)
    if (k < 0 || k > steps) throw ConfigError("mcsim", "run_ensemble", "checkpoint step out of range");

  // Per-sample norm series; correlation sums per sample block.
  std::vector<double> norms(static_cast<std::size_t>(samples) * (steps + 1));
  const int blocks = block_count(samples);
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  struct Acc {
    std::vector<std::vector<cplx>> sum;
    std::vector<std::vector<double>> sumsq;
  };
  std::vector<Acc> acc(blocks);
  for (auto& a : acc) {
    a.sum.assign(cps.size(), std::vector<cplx>(nn));
    a.sumsq.assign(cps.size(), std::vector<double>(nn));
  }

  std::vector<std::vector<cplx>> outer_per_block(cps.empty() ? 0 : blocks, std::vector<cplx>(nn));
  drive(c, [&](std::size_t b, std::size_t s, long k, const std::vector<Field>& members) {
    double v = 0;
    for (const auto& m : members) v += simd::active().sum_abs2(m.values().data(), n) * h;
    norms[s * (steps + 1) + k] = v / members.size();
    const auto it = std::lower_bound(cps.begin(), cps.end(), k);
    if (it == cps.end() || *it != k) return;
    const std::size_t ci = it - cps.begin();
    Acc& a = acc[b];
    auto& x = outer_per_block[b];
    std::fill(x.begin(), x.end(), cplx(0));
    for (const auto& m : members)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x[static_cast<std::size_t>(i) * n + j] += m[i] * std::conj(m[j]);
    const double w = 1.0 / members.size();
    for (std::size_t e = 0; e < nn; ++e) {
      const cplx xe = x[e] * w;
      a.sum[ci][e] += xe;
      a.sumsq[ci][e] += std::norm(xe);
    }
  });

  EnsembleStats st;
  st.effective_samples = samples;
  st.t.resize(steps + 1);
  st.mean_norm2.resize(steps + 1);
  st.stderr_norm2.resize(steps + 1);
  for (long k = 0; k <= steps; ++k) {
    double mean = 0;
    for (int s = 0; s < samples; ++s) mean += norms[static_cast<std::size_t>(s) * (steps + 1) + k];
    mean /= samples;
    double var = 0;
    for (int s = 0; s < samples; ++s) {
      const double d = norms[static_cast<std::size_t>(s) * (steps + 1) + k] - mean;
      var += d * d;
    }
    var /= (samples - 1);
    st.t[k] = k * c.dt;
    st.mean_norm2[k] = mean;
    st.stderr_norm2[k] = std::sqrt(var / samples);
  }
  const TorusGrid g2(n, 2);
  for (std::size_t ci = 0; ci < cps.size(); ++ci) {
    CorrelationCheckpoint cp;
    cp.step = cps[ci];
    cp.t = cps[ci] * c.dt;
    cp.mean = Field(g2);
    std::vector<double> sq(nn, 0.0);
    for (const auto& a : acc) {
      for (std::size_t e = 0; e < nn; ++e) {
        cp.mean[e] += a.sum[ci][e];
        sq[e] += a.sumsq[ci][e];
      }
    }
    double agg = 0;
    for (std::size_t e = 0; e < nn; ++e) {
      cp.mean[e] /= samples;
      const double var = std::max(0.0, (sq[e] - samples * std::norm(cp.mean[e])) / (samples - 1));
      agg += var / samples;
    }
    cp.se_aggregate = std::sqrt(agg);
    st.checkpoints.push_back(std::move(cp));
  }
  return st;
}

LowerBoundReport lower_bound_experiment(const ProfileFamily& family, double y0, const SimConfig& config) {
  for (const auto& u : family.profiles()) {
    if (!u.is_constant() && local_order(u, y0) == 0)
      throw ConfigError("mcsim", "lower_bound_experiment",
                        "y0 = " + std::to_string(y0) + " is not a critical point of every profile");
  }
  if (!(config.nu > 0)) throw ConfigError("mcsim", "lower_bound_experiment", "nu must be positive");
  LowerBoundReport rep;
  rep.y0 = y0;
  rep.n0 = kInfiniteOrder;
  for (const auto& u : family.profiles())
    if (!u.is_constant()) rep.n0 = std::min(rep.n0, local_order(u, y0));
  rep.lambda = std::abs(config.ell) * std::sqrt(config.kappa / config.nu);
  rep.beta = default_beta(rep.n0);
  const double c = pinned_coefficient(family, y0, rep.n0);
  const AnharmonicGroundState gs = anharmonic_ground(rep.n0, c);
  const TorusGrid grid(config.n, 1);
  const Field q = build_quasimode(gs, std::max(rep.lambda, 1.0), rep.beta, y0, grid);
  rep.nu_rayleigh = config.nu * rayleigh(q, family, y0, rep.lambda);

  SimConfig cfg = config;
  cfg.family = family.recentered(y0);
  cfg.initial = q;
  cfg.checkpoints.clear();
  validate(cfg);
  const long steps = cfg.steps();
  const int per_sample = cfg.antithetic ? 2 : 1;
  const int samples = cfg.n_paths / per_sample;
  const int n = cfg.n;
  const int blocks = block_count(samples);

  // Path sums of phi per step, per sample block.
  struct Acc {
    std::vector<cplx> sum;
    std::vector<double> sumsq;
  };
  std::vector<Acc> acc(blocks, Acc{std::vector<cplx>(static_cast<std::size_t>(steps + 1) * n),
                                    std::vector<double>(static_cast<std::size_t>(steps + 1) * n)});
  drive(cfg, [&](std::size_t b, std::size_t, long k, const std::vector<Field>& members) {
    Acc& a = acc[b];
    const std::size_t base = static_cast<std::size_t>(k) * n;
    for (int i = 0; i < n; ++i) {
      cplx x = 0;
      for (const auto& m : members) x += m[i];
      x /= static_cast<double>(members.size());
      a.sum[base + i] += x;
      a.sumsq[base + i] += std::norm(x);
    }
  });

  // Deterministic pinned equation with the same splitting.
  const PotentialGrid v0 = assemble_potential_1d(family, grid, y0);
  const MomentParams mp{cfg.nu, cfg.kappa, cfg.ell};
  const double coupling = two_point_coupling(mp);
  std::vector<double> damp(n);
  for (int i = 0; i < n; ++i) damp[i] = std::exp(-coupling * v0.values[i] * cfg.dt);
  PathStepper heat(cfg);
  Field det = q;
  const double h = grid.spacing();
  for (long k = 0; k <= steps; ++k) {
    if (k > 0) {
      heat.heat_half(det);
      for (int i = 0; i < n; ++i) det[i] *= damp[i];
      heat.heat_half(det);
    }
    double s2 = 0, var = 0;
    for (int i = 0; i < n; ++i) {
      cplx m = 0;
      double sq = 0;
      for (const auto& a : acc) {
        m += a.sum[static_cast<std::size_t>(k) * n + i];
        sq += a.sumsq[static_cast<std::size_t>(k) * n + i];
      }
      m /= samples;
      s2 += std::norm(m);
      var += std::max(0.0, (sq - samples * std::norm(m)) / (samples - 1)) / samples;
    }
    rep.t.push_back(k * cfg.dt);
    rep.mc_norm.push_back(std::sqrt(s2 * h));
    rep.mc_stderr.push_back(std::sqrt(var * h));
    rep.det_norm.push_back(l2_norm(det));
  }
  rep.bound_holds = true;
  for (std::size_t k = 0; k < rep.t.size(); ++k) {
    if (rep.mc_stderr[k] > 0)
      rep.max_z = std::max(rep.max_z, std::abs(rep.mc_norm[k] - rep.det_norm[k]) / rep.mc_stderr[k]);
    if (rep.det_norm[k] < std::exp(-rep.nu_rayleigh * rep.t[k]) * (1.0 - 1e-12)) rep.bound_holds = false;
  }
  std::vector<TracePoint> series;
  for (std::size_t k = 0; k < rep.t.size(); ++k) series.push_back({rep.t[k], rep.det_norm[k]});
  WindowPolicy relaxed;
  relaxed.min_efolds = 0.0;
  relaxed.min_r2 = 0.0;
  rep.det_rate = fit_decay(series, relaxed).rate;
  return rep;
}

}  // namespace dlab
