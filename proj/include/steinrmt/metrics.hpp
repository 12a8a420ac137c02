#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace steinrmt {

enum class DistanceKind { kolmogorov_exp, tv_exact, ks_two_sample, wasserstein_normal };

std::string to_string(DistanceKind kind);

/// A distance with the sample count it came from and a confidence half-width.
struct DistanceEstimate {
  double value = 0.0;
  std::size_t n_samples = 0;
  double margin = 0.0;
  double confidence = 0.0;
  DistanceKind kind = DistanceKind::kolmogorov_exp;
};

// Dvoretzky–Kiefer–Wolfowitz half-width √(ln(2/(1−confidence)) / (2N)).
double dkw_margin(std::size_t n_samples, double confidence);

// sup_s |F_N(s) − (1 − e^{−s})| with the DKW margin at `confidence`.
DistanceEstimate kolmogorov_to_exp(std::vector<double> samples, double confidence = 0.99);

// Density of X_1 for X uniform on the sphere of radius √n in R^n:
// c_n (1 − w²/n)^{(n−3)/2} on |w| < √n, c_n = Γ(n/2) / (√(nπ) Γ((n−1)/2)).
double sphere_marginal_density(long n, double w);

// Total variation distance between that marginal and N(0, 1), by quadrature.
// Before returning, checks ∫f = 1 and ∫w⁴f = 3n/(n+2) to 1e−8 and throws
// NumericError otherwise. n ≥ 4.
double sphere_marginal_tv(long n);

struct KsTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Kolmogorov limiting survival function Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
double kolmogorov_survival(double lambda);

// Classical two-sample test with the asymptotic p-value
// Q((√m + 0.12 + 0.11/√m)·D), m = n_a n_b/(n_a + n_b).
KsTest two_sample_ks(std::vector<double> a, std::vector<double> b);

// One-sample test against a continuous CDF, same asymptotic p-value with m = N.
KsTest one_sample_ks(std::vector<double> samples, const std::function<double(double)>& cdf);

// Quantile-coupling W_1 estimate: mean_i |x_(i) − Φ^{−1}((i − ½)/N)|.
DistanceEstimate wasserstein_to_normal(std::vector<double> samples);

}  // namespace steinrmt
