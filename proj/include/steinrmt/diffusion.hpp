#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "steinrmt/ensembles.hpp"
#include "steinrmt/parallel.hpp"
#include "steinrmt/rng.hpp"

namespace steinrmt {

struct CdbmParams {
  double beta = 2.0;
  double dt = 1e-4;
  double T = 0.1;
  int max_halvings = 40;
  double collision_guard = 1e-8;
};

struct CdbmStepResult {
  SpectrumSample state;
  double dt_used = 0.0;
  int halvings = 0;
};

// Drift (β/2) Σ_{k≠j} cot((θ_j − θ_k)/2) of each particle.
std::vector<double> cdbm_drift(const SpectrumSample& x, double beta);

/// One Euler–Maruyama step of circular Dyson Brownian motion
///   θ_j ← θ_j + √(2 dt) ξ_j + dt·(β/2) Σ_{k≠j} cot((θ_j − θ_k)/2).
/// A proposal that changes the cyclic order or brings two particles within
/// collision_guard is discarded and retried with dt halved and fresh noise.
/// Throws StepFailure after max_halvings halvings.
CdbmStepResult cdbm_step(const SpectrumSample& x, const CdbmParams& params, Rng& rng);

// Integrates to time params.T; the last step is shortened to land on T.
SpectrumSample cdbm_run(const SpectrumSample& x0, const CdbmParams& params, Rng& rng);

// Geodesic random-walk step for Brownian motion with generator Δ on the
// sphere of radius |x|: tangent Gaussian with covariance 2·dt·I, exponential
// map, then renormalisation.
SpherePoint sphere_bm_step(const SpherePoint& x, double dt, Rng& rng);

// `steps` equal geodesic steps covering time t.
SpherePoint sphere_bm_run(const SpherePoint& x, double t, std::size_t steps, Rng& rng);

struct PairSample {
  double w0 = 0.0;
  double wt = 0.0;
  double t = 0.0;
};

/// Exchangeable-pair experiment: a stationary source, a reversible diffusion
/// run for time t from the source draw, and a real statistic.
template <class Config>
struct PairExperiment {
  std::function<Config(Rng&)> source;
  std::function<Config(const Config&, double, Rng&)> diffuse;
  std::function<double(const Config&)> statistic;
};

/// Pairs for several t with common random numbers: replicate i draws X from
/// stream (seed, 2i) and, for every t, restarts the diffusion from stream
/// (seed, 2i+1). Feature functions are evaluated at X once per replicate.
struct PairTable {
  std::vector<double> t_grid;
  std::vector<double> w0;                       // [replicate]
  std::vector<std::vector<double>> wt;          // [t index][replicate]
  std::vector<std::vector<double>> features;    // [feature][replicate]

  [[nodiscard]] std::size_t replicates() const { return w0.size(); }
  [[nodiscard]] std::vector<PairSample> pairs_at(std::size_t t_index) const;
  [[nodiscard]] std::map<double, std::vector<PairSample>> by_t() const;

  // Rebuilds a table from per-t pair lists that share replicate order.
  static PairTable from_pairs(const std::map<double, std::vector<PairSample>>& pairs_by_t);
};

template <class Config>
PairTable perturb_pair_table(const PairExperiment<Config>& experiment, const std::vector<double>& t_grid,
                             std::size_t reps, std::uint64_t seed, unsigned threads,
                             const std::vector<std::function<double(const Config&)>>& features = {}) {
  PairTable table;
  table.t_grid = t_grid;
  table.w0.assign(reps, 0.0);
  table.wt.assign(t_grid.size(), std::vector<double>(reps, 0.0));
  table.features.assign(features.size(), std::vector<double>(reps, 0.0));
  parallel_for(reps, threads, [&](std::size_t i) {
    Rng source_rng(seed, 2 * static_cast<std::uint64_t>(i));
    const Config x = experiment.source(source_rng);
    table.w0[i] = experiment.statistic(x);
    for (std::size_t f = 0; f < features.size(); ++f) table.features[f][i] = features[f](x);
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      Rng noise(seed, 2 * static_cast<std::uint64_t>(i) + 1);
      const Config xt = experiment.diffuse(x, t_grid[ti], noise);
      table.wt[ti][i] = experiment.statistic(xt);
    }
  });
  return table;
}

// As above with the starting points given; replicate i starts at sources[i]
// and uses noise stream (seed, 2i+1).
template <class Config>
PairTable perturb_pair_table(const std::vector<Config>& sources, const PairExperiment<Config>& experiment,
                             const std::vector<double>& t_grid, std::uint64_t seed, unsigned threads,
                             const std::vector<std::function<double(const Config&)>>& features = {}) {
  const std::size_t reps = sources.size();
  PairTable table;
  table.t_grid = t_grid;
  table.w0.assign(reps, 0.0);
  table.wt.assign(t_grid.size(), std::vector<double>(reps, 0.0));
  table.features.assign(features.size(), std::vector<double>(reps, 0.0));
  parallel_for(reps, threads, [&](std::size_t i) {
    const Config& x = sources[i];
    table.w0[i] = experiment.statistic(x);
    for (std::size_t f = 0; f < features.size(); ++f) table.features[f][i] = features[f](x);
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
      Rng noise(seed, 2 * static_cast<std::uint64_t>(i) + 1);
      table.wt[ti][i] = experiment.statistic(experiment.diffuse(x, t_grid[ti], noise));
    }
  });
  return table;
}

// `reps` independent pairs (W(X), W(X_t)).
template <class Config>
std::vector<PairSample> perturb_pair(const PairExperiment<Config>& experiment, double t, std::size_t reps,
                                     std::uint64_t seed, unsigned threads) {
  return perturb_pair_table(experiment, {t}, reps, seed, threads).pairs_at(0);
}

}  // namespace steinrmt
