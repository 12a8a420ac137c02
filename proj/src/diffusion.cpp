#include "steinrmt/diffusion.hpp"

#include <cmath>
#include <string>

#include "steinrmt/errors.hpp"

namespace steinrmt {

std::vector<double> cdbm_drift(const SpectrumSample& x, double beta) {
  const std::size_t n = x.n();
  std::vector<double> drift(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const double c = 1.0 / std::tan(0.5 * (x.angles[j] - x.angles[k]));
      drift[j] += c;
      drift[k] -= c;
    }
  }
  for (double& d : drift) d *= 0.5 * beta;
  return drift;
}

namespace {

void validate_params(const CdbmParams& p) {
  if (!(p.beta > 0.0)) throw InvalidArgument("cdbm: beta must be positive");
  if (!(p.dt > 0.0)) throw InvalidArgument("cdbm: dt must be positive");
  if (p.max_halvings < 0) throw InvalidArgument("cdbm: max_halvings must be non-negative");
  if (!(p.collision_guard > 0.0)) throw InvalidArgument("cdbm: collision_guard must be positive");
}

// Proposed lifted angles keep the cyclic order with every gap ≥ guard.
bool order_preserved(const std::vector<double>& lifted, double guard) {
  const std::size_t n = lifted.size();
  if (n < 2) return true;
  for (std::size_t j = 1; j < n; ++j)
    if (!(lifted[j] - lifted[j - 1] >= guard)) return false;
  return lifted[0] + kTwoPi - lifted[n - 1] >= guard;
}

}  // namespace

CdbmStepResult cdbm_step(const SpectrumSample& x, const CdbmParams& params, Rng& rng) {
  validate_params(params);
  const std::size_t n = x.n();
  if (n == 0) throw InvalidArgument("cdbm_step: empty configuration");
  if (n > 1 && !(x.min_gap() > 0.0)) throw InvalidArgument("cdbm_step: configuration has colliding angles");

  const std::vector<double> drift = cdbm_drift(x, params.beta);
  std::vector<double> lifted(n);
  double dt = params.dt;
  for (int halvings = 0; halvings <= params.max_halvings; ++halvings, dt *= 0.5) {
    const double noise_scale = std::sqrt(2.0 * dt);
    for (std::size_t j = 0; j < n; ++j) lifted[j] = x.angles[j] + noise_scale * rng.normal() + dt * drift[j];
    if (order_preserved(lifted, params.collision_guard)) {
      return CdbmStepResult{make_spectrum(lifted, x.beta), dt, halvings};
    }
  }
  throw StepFailure("cdbm_step: no admissible step after " + std::to_string(params.max_halvings) +
                    " halvings (min gap " + std::to_string(x.min_gap()) + ")");
}

SpectrumSample cdbm_run(const SpectrumSample& x0, const CdbmParams& params, Rng& rng) {
  validate_params(params);
  if (!(params.T > 0.0)) throw InvalidArgument("cdbm_run: T must be positive");
  SpectrumSample x = x0;
  double elapsed = 0.0;
  CdbmParams step = params;
  while (params.T - elapsed > 1e-14 * params.T) {
    step.dt = std::min(params.dt, params.T - elapsed);
    CdbmStepResult r = cdbm_step(x, step, rng);
    x = std::move(r.state);
    elapsed += r.dt_used;
  }
  return x;
}

SpherePoint sphere_bm_step(const SpherePoint& x, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("sphere_bm_step: dt must be positive");
  const std::size_t n = x.n();
  const double radius = x.norm();
  if (n < 2 || !(radius > 0.0)) throw InvalidArgument("sphere_bm_step: degenerate sphere point");

  const double scale = std::sqrt(2.0 * dt);
  std::vector<double> zeta(n);
  double radial = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zeta[i] = scale * rng.normal();
    radial += zeta[i] * x.coords[i];
  }
  radial /= radius * radius;
  double len_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    zeta[i] -= radial * x.coords[i];
    len_sq += zeta[i] * zeta[i];
  }
  const double len = std::sqrt(len_sq);
  SpherePoint out{x.coords, x.radius};
  if (len == 0.0) return out;

  const double angle = len / radius;
  const double c = std::cos(angle);
  const double s = radius * std::sin(angle) / len;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.coords[i] = c * x.coords[i] + s * zeta[i];
    norm_sq += out.coords[i] * out.coords[i];
  }
  const double target = x.radius > 0.0 ? x.radius : radius;
  const double fix = target / std::sqrt(norm_sq);
  for (double& v : out.coords) v *= fix;
  out.radius = target;
  return out;
}

SpherePoint sphere_bm_run(const SpherePoint& x, double t, std::size_t steps, Rng& rng) {
  if (steps == 0) throw InvalidArgument("sphere_bm_run: steps must be positive");
  if (!(t > 0.0)) throw InvalidArgument("sphere_bm_run: t must be positive");
  const double dt = t / static_cast<double>(steps);
  SpherePoint cur = x;
  for (std::size_t s = 0; s < steps; ++s) cur = sphere_bm_step(cur, dt, rng);
  return cur;
}

std::vector<PairSample> PairTable::pairs_at(std::size_t t_index) const {
  std::vector<PairSample> out(w0.size());
  for (std::size_t i = 0; i < w0.size(); ++i) out[i] = PairSample{w0[i], wt[t_index][i], t_grid[t_index]};
  return out;
}

std::map<double, std::vector<PairSample>> PairTable::by_t() const {
  std::map<double, std::vector<PairSample>> out;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) out[t_grid[ti]] = pairs_at(ti);
  return out;
}

PairTable PairTable::from_pairs(const std::map<double, std::vector<PairSample>>& pairs_by_t) {
  PairTable table;
  if (pairs_by_t.empty()) return table;
  const std::size_t reps = pairs_by_t.begin()->second.size();
  table.w0.resize(reps);
  for (std::size_t i = 0; i < reps; ++i) table.w0[i] = pairs_by_t.begin()->second[i].w0;
  // Largest t first, matching the usual factor-2 ladder ordering.
  for (auto it = pairs_by_t.rbegin(); it != pairs_by_t.rend(); ++it) {
    if (it->second.size() != reps) throw InvalidArgument("PairTable: pair lists differ in length");
    std::vector<double> column(reps);
    for (std::size_t i = 0; i < reps; ++i) {
      if (it->second[i].w0 != table.w0[i])
        throw InvalidArgument("PairTable: pair lists do not share replicates");
      column[i] = it->second[i].wt;
    }
    table.t_grid.push_back(it->first);
    table.wt.push_back(std::move(column));
  }
  return table;
}

}  // namespace steinrmt
