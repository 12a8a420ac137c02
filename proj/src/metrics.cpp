#include "steinrmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "steinrmt/errors.hpp"

namespace steinrmt {

namespace {

constexpr double kSelfCheckTol = 1e-8;
constexpr double kQuadTol = 1e-10;

double ks_p_value(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
}

double log_sphere_density(long n, double w) {
  const double nd = static_cast<double>(n);
  const double log_c = std::lgamma(nd / 2.0) - std::lgamma((nd - 1.0) / 2.0) - 0.5 * std::log(nd * std::numbers::pi);
  return log_c + 0.5 * (nd - 3.0) * std::log1p(-w * w / nd);
}

double log_normal_density(double w) { return -0.5 * w * w - 0.5 * std::log(2.0 * std::numbers::pi); }

double normal_density(double w) { return std::exp(log_normal_density(w)); }

// ∫_a^b g with the requested absolute accuracy or NumericError.
template <class F>
double integrate(F g, double a, double b, const char* what) {
  if (b <= a) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 20, 1e-13, &err);
  if (!(err <= kQuadTol) || !std::isfinite(value))
    throw NumericError(std::string(what) + ": quadrature error estimate " + std::to_string(err));
  return value;
}

}  // namespace

std::string to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::kolmogorov_exp: return "kolmogorov_exp";
    case DistanceKind::tv_exact: return "tv_exact";
    case DistanceKind::ks_two_sample: return "ks_two_sample";
    case DistanceKind::wasserstein_normal: return "wasserstein_normal";
  }
  return "unknown";
}

double dkw_margin(std::size_t n_samples, double confidence) {
  if (n_samples == 0) throw InvalidArgument("dkw_margin: no samples");
  if (!(confidence > 0.0 && confidence < 1.0)) throw InvalidArgument("dkw_margin: confidence must be in (0, 1)");
  return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * static_cast<double>(n_samples)));
}

DistanceEstimate kolmogorov_to_exp(std::vector<double> samples, double confidence) {
  if (samples.empty()) throw InvalidArgument("kolmogorov_to_exp: no samples");
  for (double s : samples)
    if (!(s >= 0.0)) throw InvalidArgument("kolmogorov_to_exp: samples must be non-negative");
  std::sort(samples.begin(), samples.end());
  const double N = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = -std::expm1(-samples[i]);
    d = std::max({d, std::abs(static_cast<double>(i + 1) / N - F), std::abs(static_cast<double>(i) / N - F)});
  }
  DistanceEstimate out;
  out.value = std::min(d, 1.0);
  out.n_samples = samples.size();
  out.confidence = confidence;
  out.margin = dkw_margin(samples.size(), confidence);
  out.kind = DistanceKind::kolmogorov_exp;
  return out;
}

double sphere_marginal_density(long n, double w) {
  if (n < 2) throw InvalidArgument("sphere_marginal_density: n must be at least 2");
  const double r = std::sqrt(static_cast<double>(n));
  if (std::abs(w) >= r) return 0.0;
  return std::exp(log_sphere_density(n, w));
}

double sphere_marginal_tv(long n) {
  if (n < 4) throw InvalidArgument("sphere_marginal_tv: n must be at least 4");
  const double nd = static_cast<double>(n);
  const double r = std::sqrt(nd);
  auto f = [n](double w) { return sphere_marginal_density(n, w); };

  // The density vanishes like (√n − w)^{(n−3)/2} at the edge; tanh-sinh
  // handles that endpoint behaviour.
  boost::math::quadrature::tanh_sinh<double> ts;
  double err = 0.0;
  const double mass = 2.0 * ts.integrate(f, 0.0, r, 1e-14, &err);
  const double fourth = 2.0 * ts.integrate([&](double w) { return w * w * w * w * f(w); }, 0.0, r, 1e-14, &err);
  if (!(std::abs(mass - 1.0) <= kSelfCheckTol))
    throw NumericError("sphere_marginal_tv: density integrates to " + std::to_string(mass));
  if (!(std::abs(fourth - 3.0 * nd / (nd + 2.0)) <= kSelfCheckTol))
    throw NumericError("sphere_marginal_tv: fourth moment " + std::to_string(fourth));

  // Sign changes of log f − log φ on [0, √n).
  auto gap = [n](double w) { return log_sphere_density(n, w) - log_normal_density(w); };
  std::vector<double> cuts{0.0};
  const int scan = 4000;
  double prev_w = 0.0;
  double prev_g = gap(0.0);
  for (int i = 1; i < scan; ++i) {
    const double w = r * static_cast<double>(i) / scan;
    const double g = gap(w);
    if ((prev_g < 0.0) != (g < 0.0)) {
      boost::uintmax_t iters = 200;
      auto tol = boost::math::tools::eps_tolerance<double>(52);
      auto [lo, hi] = boost::math::tools::toms748_solve(gap, prev_w, w, prev_g, g, tol, iters);
      cuts.push_back(0.5 * (lo + hi));
    }
    prev_w = w;
    prev_g = g;
  }
  cuts.push_back(r);

  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    double piece = 0.0;
    if (i + 2 == cuts.size()) {
      piece = ts.integrate([&](double w) { return f(w) - normal_density(w); }, a, b, 1e-14, &err);
    } else {
      piece = integrate([&](double w) { return f(w) - normal_density(w); }, a, b, "sphere_marginal_tv");
    }
    tv += std::abs(piece);
  }
  boost::math::normal_distribution<double> z;
  tv += boost::math::cdf(boost::math::complement(z, r));
  return tv;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // 1 − Q(λ) = √(2π)/λ Σ_{k≥1} e^{−(2k−1)²π²/(8λ²)}
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    const double y8 = std::pow(y, 8.0);
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * y * (1.0 + y8 * (1.0 + y8 * y8 * (1.0 + y8 * y8 * y8)));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  const double x = std::exp(-2.0 * lambda * lambda);
  // 2(x − x⁴ + x⁹ − x¹⁶)
  const double q = 2.0 * x * (1.0 - std::pow(x, 3.0) * (1.0 - std::pow(x, 5.0) * (1.0 - std::pow(x, 7.0))));
  return std::clamp(q, 0.0, 1.0);
}

KsTest two_sample_ks(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("two_sample_ks: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsTest out;
  out.statistic = d;
  out.p_value = ks_p_value(d, na * nb / (na + nb));
  return out;
}

KsTest one_sample_ks(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("one_sample_ks: empty sample");
  std::sort(samples.begin(), samples.end());
  const double N = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / N - F, F - static_cast<double>(i) / N});
  }
  KsTest out;
  out.statistic = d;
  out.p_value = ks_p_value(d, N);
  return out;
}

DistanceEstimate wasserstein_to_normal(std::vector<double> samples) {
  if (samples.empty()) throw InvalidArgument("wasserstein_to_normal: no samples");
  std::sort(samples.begin(), samples.end());
  boost::math::normal_distribution<double> z;
  const double N = static_cast<double>(samples.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double q = boost::math::quantile(z, (static_cast<double>(i) + 0.5) / N);
    sum += std::abs(samples[i] - q);
  }
  DistanceEstimate out;
  out.value = sum / N;
  out.n_samples = samples.size();
  out.kind = DistanceKind::wasserstein_normal;
  return out;
}

}  // namespace steinrmt
