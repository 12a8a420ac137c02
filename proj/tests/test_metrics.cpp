#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "steinrmt/bounds.hpp"
#include "steinrmt/errors.hpp"
#include "steinrmt/metrics.hpp"
#include "steinrmt/rng.hpp"

using namespace steinrmt;

namespace {

double exp_draw(Rng& r) { return -std::log(r.uniform_open()); }

double phi(double w) { return std::exp(-0.5 * w * w) / std::sqrt(2.0 * M_PI); }

// TV between the sphere marginal and N(0,1) from CDFs: X_1²/n ~ Beta(1/2, (n−1)/2),
// so P(0 ≤ X_1 ≤ c) = I_{c²/n}(1/2, (n−1)/2)/2. On each region between
// crossings of the densities the difference of masses has one sign.
double tv_oracle(long n) {
  const double nd = static_cast<double>(n);
  const double root = std::sqrt(nd);
  auto diff = [&](double w) { return sphere_marginal_density(n, w) - phi(w); };
  auto F = [&](double c) { return 0.5 * boost::math::ibeta(0.5, (nd - 1.0) / 2.0, std::min(1.0, c * c / nd)); };
  boost::math::normal N;
  auto G = [&](double c) { return boost::math::cdf(N, c) - 0.5; };
  std::vector<double> cuts = {0.0};
  const int M = 20000;
  for (int i = 0; i < M; ++i) {
    double a = root * i / M, b = root * (i + 1) / M;
    if (i + 1 == M) b = std::nextafter(root, 0.0);
    if ((diff(a) > 0) != (diff(b) > 0)) {
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        ((diff(a) > 0) == (diff(m) > 0) ? a : b) = m;
      }
      cuts.push_back(0.5 * (a + b));
    }
  }
  cuts.push_back(root);
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    tv += std::abs((F(cuts[i + 1]) - F(cuts[i])) - (G(cuts[i + 1]) - G(cuts[i])));
  // Both halves, the normal mass beyond √n, then half the L¹ norm.
  return (2.0 * tv + 2.0 * (0.5 - G(root))) / 2.0;
}

}  // namespace

TEST_CASE("DKW margin") {
  REQUIRE(dkw_margin(1000, 0.99) == Catch::Approx(std::sqrt(std::log(200.0) / 2000.0)));
  REQUIRE_THROWS_AS(dkw_margin(0, 0.99), InvalidArgument);
}

TEST_CASE("Kolmogorov distance to Exp(1)") {
  const std::size_t N = 1000;
  std::vector<double> q(N);
  for (std::size_t i = 0; i < N; ++i) q[i] = -std::log(1.0 - (i + 0.5) / N);
  const auto d = kolmogorov_to_exp(q, 0.99);
  REQUIRE(d.value == Catch::Approx(0.0005).epsilon(1e-9));
  REQUIRE(d.n_samples == N);
  REQUIRE(d.margin == Catch::Approx(dkw_margin(N, 0.99)));
  REQUIRE(d.kind == DistanceKind::kolmogorov_exp);
  REQUIRE(kolmogorov_to_exp(std::vector<double>(50, 0.0)).value == 1.0);
  REQUIRE_THROWS_AS(kolmogorov_to_exp({}), InvalidArgument);
  REQUIRE_THROWS_AS(kolmogorov_to_exp({1.0, -0.5}), InvalidArgument);
}

TEST_CASE("Kolmogorov distance is in [0,1] and permutation invariant") {
  Rng r(6);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(200);
    for (auto& v : x) v = 3.0 * exp_draw(r) * r.uniform();
    const double a = kolmogorov_to_exp(x).value;
    std::reverse(x.begin(), x.end());
    std::swap(x[3], x[150]);
    REQUIRE(kolmogorov_to_exp(x).value == a);
    REQUIRE(a >= 0.0);
    REQUIRE(a <= 1.0);
  }
}

TEST_CASE("DKW band covers iid Exp(1) samples") {
  // Exceedance probability is at most 1%; 400 repetitions allow 10 misses (3σ).
  int misses = 0;
  for (int rep = 0; rep < 400; ++rep) {
    Rng r(1000, rep);
    std::vector<double> x(5000);
    for (auto& v : x) v = exp_draw(r);
    const auto d = kolmogorov_to_exp(x);
    if (d.value > d.margin) ++misses;
  }
  REQUIRE(misses <= 10);
}

TEST_CASE("Kolmogorov survival function") {
  REQUIRE(kolmogorov_survival(0.0) == 1.0);
  REQUIRE(kolmogorov_survival(1.0) == Catch::Approx(0.26999967167735456).epsilon(1e-12));
  REQUIRE(kolmogorov_survival(1.36) == Catch::Approx(0.0494).epsilon(1e-2));
  REQUIRE(kolmogorov_survival(0.5) == Catch::Approx(0.9639452436648751).epsilon(1e-12));
  // Both series branches agree near the switch.
  for (double l = 1.1; l < 1.3; l += 0.01) {
    double s = 0.0;
    for (int k = 1; k < 100; ++k) s += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * l * l);
    REQUIRE(kolmogorov_survival(l) == Catch::Approx(s).epsilon(1e-13));
  }
}

TEST_CASE("two-sample KS") {
  std::vector<double> a = {0.1, 0.5, 0.9, 1.4};
  const auto same = two_sample_ks(a, a);
  REQUIRE(same.statistic == 0.0);
  REQUIRE(same.p_value == 1.0);
  REQUIRE(two_sample_ks({1.0, 2.0}, {3.0, 4.0}).statistic == 1.0);
  REQUIRE(two_sample_ks({1.0, 1.0, 2.0}, {1.0, 2.0, 2.0}).statistic == Catch::Approx(1.0 / 3.0));
  REQUIRE_THROWS_AS(two_sample_ks({}, a), InvalidArgument);

  Rng r(8);
  std::vector<double> x(10000), y(10000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = exp_draw(r);
    y[i] = x[i] + 1.0;
  }
  REQUIRE(two_sample_ks(x, y).p_value < 1e-6);
}

TEST_CASE("two-sample KS null calibration") {
  int rejections = 0;
  for (int rep = 0; rep < 500; ++rep) {
    Rng r(3000, rep);
    std::vector<double> x(2000), y(2000);
    for (auto& v : x) v = exp_draw(r);
    for (auto& v : y) v = exp_draw(r);
    if (two_sample_ks(x, y).p_value <= 0.01) ++rejections;
  }
  REQUIRE(rejections <= 10);
}

TEST_CASE("one-sample KS") {
  Rng r(2);
  std::vector<double> u(20000);
  for (auto& v : u) v = r.uniform();
  REQUIRE(one_sample_ks(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 0.01);
  REQUIRE(one_sample_ks(u, [](double x) { return std::clamp(x * x, 0.0, 1.0); }).p_value < 1e-6);
}

TEST_CASE("sphere marginal density") {
  // n = 3: uniform on [−√3, √3].
  REQUIRE(sphere_marginal_density(3, 0.4) == Catch::Approx(1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-14));
  REQUIRE(sphere_marginal_density(10, 4.0) == 0.0);
  const double c = std::tgamma(5.0) / (std::sqrt(10.0 * M_PI) * std::tgamma(4.5));
  REQUIRE(sphere_marginal_density(10, 1.0) == Catch::Approx(c * std::pow(0.9, 3.5)).epsilon(1e-14));
}

TEST_CASE("sphere marginal TV against a CDF oracle") {
  for (long n : {4L, 5L, 10L, 37L, 100L, 200L}) {
    const double tv = sphere_marginal_tv(n);
    REQUIRE(std::abs(tv - tv_oracle(n)) <= 1e-9);
  }
  REQUIRE(sphere_marginal_tv(10) == Catch::Approx(0.039698).epsilon(1e-4));
  REQUIRE_THROWS_AS(sphere_marginal_tv(3), InvalidArgument);
}

TEST_CASE("sphere marginal TV is below the bound and decreasing") {
  double prev = 1.0;
  for (long n = 4; n <= 200; ++n) {
    const double tv = sphere_marginal_tv(n);
    REQUIRE(tv <= bound_sphere(n));
    REQUIRE(tv < prev);
    prev = tv;
  }
}

TEST_CASE("Wasserstein distance to N(0,1)") {
  boost::math::normal N;
  const std::size_t M = 100000;
  std::vector<double> q(M);
  for (std::size_t i = 0; i < M; ++i) q[i] = boost::math::quantile(N, (i + 0.5) / M);
  REQUIRE(wasserstein_to_normal(q).value == 0.0);

  Rng r(19);
  std::vector<double> z(M), shifted(M), neg(M);
  for (std::size_t i = 0; i < M; ++i) {
    z[i] = r.normal();
    shifted[i] = z[i] + 0.3;
    neg[i] = -z[i];
  }
  const auto d = wasserstein_to_normal(shifted);
  REQUIRE(std::abs(d.value - 0.3) <= 1e-2);
  REQUIRE(d.kind == DistanceKind::wasserstein_normal);
  REQUIRE(std::abs(wasserstein_to_normal(z).value - wasserstein_to_normal(neg).value) <= 1e-3);
}

TEST_CASE("distance kind names") {
  REQUIRE(to_string(DistanceKind::kolmogorov_exp) == "kolmogorov_exp");
  REQUIRE(to_string(DistanceKind::tv_exact) == "tv_exact");
  REQUIRE(to_string(DistanceKind::ks_two_sample) == "ks_two_sample");
  REQUIRE(to_string(DistanceKind::wasserstein_normal) == "wasserstein_normal");
}
