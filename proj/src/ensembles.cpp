#include "steinrmt/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "steinrmt/errors.hpp"
#include "steinrmt/parallel.hpp"

namespace steinrmt {

namespace {

double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;
  return a;
}

void require_positive_n(std::size_t n, const char* what) {
  if (n == 0) throw InvalidArgument(std::string(what) + ": n must be at least 1");
}

}  // namespace

double SpectrumSample::min_gap() const {
  if (angles.size() < 2) return kTwoPi;
  double gap = angles.front() + kTwoPi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::min(gap, angles[i] - angles[i - 1]);
  return gap;
}

bool SpectrumSample::is_valid() const {
  for (std::size_t i = 0; i < angles.size(); ++i) {
    if (!(angles[i] >= 0.0 && angles[i] < kTwoPi)) return false;
    if (i > 0 && !(angles[i] > angles[i - 1])) return false;
  }
  return true;
}

SpectrumSample make_spectrum(std::vector<double> angles, double beta) {
  for (double& a : angles) a = wrap_angle(a);
  std::sort(angles.begin(), angles.end());
  return SpectrumSample{std::move(angles), beta};
}

SpectrumSample equispaced_spectrum(std::size_t n, double offset, double beta) {
  std::vector<double> angles(n);
  for (std::size_t j = 0; j < n; ++j) angles[j] = offset + kTwoPi * static_cast<double>(j) / static_cast<double>(n);
  return make_spectrum(std::move(angles), beta);
}

double SpherePoint::norm() const {
  double s = 0.0;
  for (double c : coords) s += c * c;
  return std::sqrt(s);
}

EnsembleConfig EnsembleConfig::with_defaults(std::size_t n, double beta, std::uint64_t seed) {
  EnsembleConfig cfg;
  cfg.n = n;
  cfg.beta = beta;
  cfg.seed = seed;
  cfg.mcmc_burn_in = 10 * n * n;
  cfg.mcmc_thin = std::max<std::size_t>(1, n);
  cfg.mcmc_step = kTwoPi / static_cast<double>(std::max<std::size_t>(1, n));
  return cfg;
}

Eigen::MatrixXcd sample_haar_unitary(std::size_t n, Rng& rng) {
  require_positive_n(n, "sample_haar_unitary");
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXcd z(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) z(i, j) = rng.complex_normal();

  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const std::complex<double> d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

SpectrumSample sample_cue(std::size_t n, Rng& rng) {
  require_positive_n(n, "sample_cue");
  const Eigen::MatrixXcd u = sample_haar_unitary(n, rng);
  std::vector<double> angles(n);
  if (n == 1) {
    angles[0] = std::arg(u(0, 0));
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(u, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericError("sample_cue: eigenvalue iteration did not converge");
    const auto& ev = solver.eigenvalues();
    for (std::size_t j = 0; j < n; ++j) angles[j] = std::arg(ev(static_cast<Eigen::Index>(j)));
  }
  return make_spectrum(std::move(angles), 2.0);
}

std::vector<std::complex<double>> sample_cue_traces(std::size_t n, int max_power, Rng& rng) {
  require_positive_n(n, "sample_cue_traces");
  if (max_power < 1) throw InvalidArgument("sample_cue_traces: max_power must be at least 1");
  const Eigen::MatrixXcd u = sample_haar_unitary(n, rng);
  std::vector<std::complex<double>> traces(static_cast<std::size_t>(max_power));
  traces[0] = u.trace();
  if (max_power == 1) return traces;
  Eigen::MatrixXcd power = u;
  for (int j = 2; j <= max_power; ++j) {
    if (j == max_power) {
      // Only the diagonal of the last product is needed.
      traces[static_cast<std::size_t>(j - 1)] = power.cwiseProduct(u.transpose()).sum();
      break;
    }
    power = power * u;
    traces[static_cast<std::size_t>(j - 1)] = power.trace();
  }
  return traces;
}

CircularBetaChain::CircularBetaChain(const EnsembleConfig& cfg, Rng& rng) : cfg_(cfg), rng_(&rng) {
  require_positive_n(cfg.n, "CircularBetaChain");
  if (!(cfg.beta > 0.0)) throw InvalidArgument("CircularBetaChain: beta must be positive");
  if (!(cfg.mcmc_step > 0.0)) throw InvalidArgument("CircularBetaChain: proposal step must be positive");
  if (cfg.mcmc_thin == 0) throw InvalidArgument("CircularBetaChain: thinning must be positive");

  const double offset = kTwoPi * rng_->uniform();
  const std::size_t n = cfg.n;
  theta_.resize(n);
  cos_.resize(n);
  sin_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    theta_[j] = offset + kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    cos_[j] = std::cos(theta_[j]);
    sin_[j] = std::sin(theta_[j]);
  }
  advance(cfg.mcmc_burn_in);
}

void CircularBetaChain::update(std::size_t j) {
  const std::size_t n = theta_.size();
  ++proposed_;
  const double lo = (j == 0) ? theta_[n - 1] - kTwoPi : theta_[j - 1];
  const double hi = (j + 1 == n) ? theta_[0] + kTwoPi : theta_[j + 1];
  const double proposal = theta_[j] + cfg_.mcmc_step * rng_->normal();
  // The uniform is drawn even for out-of-arc proposals so every update
  // consumes the same number of variates.
  const double log_u = std::log(rng_->uniform_open());
  if (!(proposal > lo && proposal < hi)) return;

  const double c = std::cos(proposal);
  const double s = std::sin(proposal);
  // log density ratio = (β/2) Σ_k log(|z' − z_k|² / |z − z_k|²), with
  // |z − z_k|² = 2(1 − cos(θ − θ_k)). Ratios are multiplied in blocks and
  // logged once per block.
  double log_ratio = 0.0;
  double block = 1.0;
  int in_block = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == j) continue;
    const double num = 1.0 - (c * cos_[k] + s * sin_[k]);
    const double den = 1.0 - (cos_[j] * cos_[k] + sin_[j] * sin_[k]);
    block *= num / den;
    if (++in_block == 16) {
      log_ratio += std::log(block);
      block = 1.0;
      in_block = 0;
    }
  }
  log_ratio += std::log(block);
  log_ratio *= 0.5 * cfg_.beta;

  if (log_u < log_ratio) {
    theta_[j] = proposal;
    cos_[j] = c;
    sin_[j] = s;
    ++accepted_;
  }
}

void CircularBetaChain::advance(std::size_t updates) {
  const std::size_t n = theta_.size();
  for (std::size_t u = 0; u < updates; ++u) {
    update(cursor_);
    cursor_ = (cursor_ + 1) % n;
    if (cursor_ == 0 && (theta_[0] > 2.0 * kTwoPi || theta_[0] < -kTwoPi)) {
      const double shift = kTwoPi * std::floor(theta_[0] / kTwoPi);
      for (double& t : theta_) t -= shift;
    }
  }
}

SpectrumSample CircularBetaChain::current() const { return make_spectrum(theta_, cfg_.beta); }

SpectrumSample CircularBetaChain::next() {
  advance(cfg_.mcmc_thin);
  return current();
}

double CircularBetaChain::acceptance_rate() const {
  return proposed_ == 0 ? 0.0 : static_cast<double>(accepted_) / static_cast<double>(proposed_);
}

SpectrumSample sample_circular_beta(const EnsembleConfig& cfg, Rng& rng) {
  require_positive_n(cfg.n, "sample_circular_beta");
  if (!(cfg.beta > 0.0)) throw InvalidArgument("sample_circular_beta: beta must be positive");
  if (cfg.n == 1) return make_spectrum({kTwoPi * rng.uniform()}, cfg.beta);
  CircularBetaChain chain(cfg, rng);
  return chain.current();
}

std::vector<SpectrumSample> sample_circular_beta_chains(const EnsembleConfig& cfg, std::size_t count,
                                                        std::size_t chains, unsigned threads) {
  if (chains == 0) throw InvalidArgument("sample_circular_beta_chains: need at least one chain");
  std::vector<SpectrumSample> out(count);
  if (count == 0) return out;
  chains = std::min(chains, count);
  const std::size_t per_chain = (count + chains - 1) / chains;
  parallel_for(chains, threads, [&](std::size_t c) {
    const std::size_t begin = c * per_chain;
    const std::size_t end = std::min(count, begin + per_chain);
    if (begin >= end) return;
    Rng rng(cfg.seed, c);
    if (cfg.n == 1) {
      for (std::size_t i = begin; i < end; ++i) out[i] = sample_circular_beta(cfg, rng);
      return;
    }
    CircularBetaChain chain(cfg, rng);
    for (std::size_t i = begin; i < end; ++i) out[i] = chain.next();
  });
  return out;
}

SpherePoint sample_sphere(std::size_t n, Rng& rng) {
  if (n < 2) throw InvalidArgument("sample_sphere: n must be at least 2");
  SpherePoint p;
  p.radius = std::sqrt(static_cast<double>(n));
  p.coords.resize(n);
  double norm_sq = 0.0;
  while (norm_sq == 0.0) {
    norm_sq = 0.0;
    for (double& c : p.coords) {
      c = rng.normal();
      norm_sq += c * c;
    }
  }
  const double scale = p.radius / std::sqrt(norm_sq);
  for (double& c : p.coords) c *= scale;
  return p;
}

}  // namespace steinrmt
