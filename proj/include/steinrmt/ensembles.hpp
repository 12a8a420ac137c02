#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "steinrmt/rng.hpp"

namespace steinrmt {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Eigenangle configuration: sorted ascending, each in [0, 2π).
/// `beta` records the generating ensemble (0 when unspecified).
struct SpectrumSample {
  std::vector<double> angles;
  double beta = 0.0;

  [[nodiscard]] std::size_t n() const { return angles.size(); }
  // Smallest cyclic gap, including the wrap-around gap θ_1 + 2π − θ_n.
  [[nodiscard]] double min_gap() const;
  // Sorted, inside [0, 2π), strictly increasing.
  [[nodiscard]] bool is_valid() const;
};

// Wraps every angle into [0, 2π) and sorts.
SpectrumSample make_spectrum(std::vector<double> angles, double beta = 0.0);

// Evenly spaced angles 2πj/n + offset, j = 0..n−1.
SpectrumSample equispaced_spectrum(std::size_t n, double offset = 0.0, double beta = 0.0);

/// Point on the sphere of radius `radius` in R^n.
struct SpherePoint {
  std::vector<double> coords;
  double radius = 0.0;

  [[nodiscard]] std::size_t n() const { return coords.size(); }
  [[nodiscard]] double norm() const;
};

struct EnsembleConfig {
  std::size_t n = 1;
  double beta = 2.0;
  std::uint64_t seed = 0;
  // Counts are single-coordinate Metropolis updates (one sweep = n updates).
  std::size_t mcmc_burn_in = 0;
  std::size_t mcmc_thin = 1;
  double mcmc_step = kTwoPi;

  // burn-in 10·n², thinning n, proposal step 2π/n.
  static EnsembleConfig with_defaults(std::size_t n, double beta, std::uint64_t seed = 0);
};

// Haar-distributed n×n unitary: QR of a complex Gaussian matrix with the
// columns rephased by the signs of R's diagonal.
Eigen::MatrixXcd sample_haar_unitary(std::size_t n, Rng& rng);

// Sorted eigenangles of a Haar unitary.
SpectrumSample sample_cue(std::size_t n, Rng& rng);

// Tr(U^j) for j = 1..max_power of one Haar unitary, computed from matrix powers
// without an eigendecomposition. Consumes the stream exactly like sample_cue,
// so for a given stream the result equals the power sums of sample_cue's
// spectrum up to rounding.
std::vector<std::complex<double>> sample_cue_traces(std::size_t n, int max_power, Rng& rng);

/// Metropolis–Hastings chain targeting the circular β-ensemble
///   ∝ ∏_{k<j} |e^{iθ_k} − e^{iθ_j}|^β
/// on the ordered simplex. A move proposes θ_j + step·ξ and is rejected
/// outright if it leaves the open arc between θ_j's neighbours, so the cyclic
/// order never changes.
class CircularBetaChain {
 public:
  // Starts from an equispaced configuration with a uniform random rotation and
  // runs cfg.mcmc_burn_in updates.
  CircularBetaChain(const EnsembleConfig& cfg, Rng& rng);

  // Advances cfg.mcmc_thin updates and returns the current state.
  SpectrumSample next();
  [[nodiscard]] SpectrumSample current() const;
  void advance(std::size_t updates);

  [[nodiscard]] double acceptance_rate() const;
  [[nodiscard]] std::size_t updates() const { return proposed_; }

 private:
  void update(std::size_t j);

  EnsembleConfig cfg_;
  Rng* rng_;
  // Lifted angles: θ_0 < θ_1 < … < θ_{n−1} < θ_0 + 2π, not wrapped.
  std::vector<double> theta_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  std::size_t cursor_ = 0;
  std::size_t proposed_ = 0;
  std::size_t accepted_ = 0;
};

// One draw from the circular β-ensemble: a fresh chain after burn-in.
// n = 1 returns a uniform angle directly.
SpectrumSample sample_circular_beta(const EnsembleConfig& cfg, Rng& rng);

// `count` draws from `chains` independent chains, chain c on stream
// (cfg.seed, c). Each chain burns in, then emits a draw every cfg.mcmc_thin
// updates; draw i comes from chain i / ⌈count/chains⌉, so the result does not
// depend on `threads`.
std::vector<SpectrumSample> sample_circular_beta_chains(const EnsembleConfig& cfg, std::size_t count,
                                                        std::size_t chains, unsigned threads);

// Uniform point on the sphere of radius √n in R^n.
SpherePoint sample_sphere(std::size_t n, Rng& rng);

}  // namespace steinrmt
