#include <catch_amalgamated.hpp>

#include <cmath>

#include "steinrmt/ensembles.hpp"
#include "steinrmt/errors.hpp"
#include "steinrmt/powersums.hpp"
#include "support.hpp"

using namespace steinrmt;
using testsupport::mean_of;
using testsupport::within_se;
using cd = std::complex<double>;

namespace {

SpectrumSample random_config(std::size_t n, Rng& r, double min_gap = 1e-3) {
  while (true) {
    std::vector<double> a(n);
    for (auto& v : a) v = kTwoPi * r.uniform();
    auto x = make_spectrum(a);
    if (n == 1 || x.min_gap() >= min_gap) return x;
  }
}

// Σ_a e^{ijθ_a}, written out here rather than taken from the library.
cd p_direct(const SpectrumSample& x, int j) {
  cd s = 0.0;
  for (double a : x.angles) s += std::polar(1.0, j * a);
  return s;
}

// E[∏ p_j^{a_j} conj(p_j)^{b_j}] for Haar U when n is large: δ_ab ∏ j^{a_j} a_j!.
double haar_moment_oracle(const std::vector<unsigned>& a) {
  double v = 1.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (unsigned m = 1; m <= a[j]; ++m) v *= static_cast<double>(m);
    v *= std::pow(static_cast<double>(j + 1), a[j]);
  }
  return v;
}

}  // namespace

TEST_CASE("power sums of equispaced angles vanish") {
  for (std::size_t n : {3u, 7u, 16u}) {
    const auto x = equispaced_spectrum(n, 0.3);
    for (int k = 1; k < static_cast<int>(n); ++k) {
      REQUIRE(std::abs(power_sum(x, k)) <= 1e-12 * n);
      REQUIRE(std::abs(power_sum(x, -k)) <= 1e-12 * n);
    }
    REQUIRE(std::abs(power_sum(x, static_cast<int>(n)) - cd(n * std::cos(n * 0.3), n * std::sin(n * 0.3))) < 1e-11);
  }
}

TEST_CASE("p_0 and conjugation are exact") {
  Rng r(4);
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = random_config(9, r);
    REQUIRE(power_sum(x, 0) == cd(9.0, 0.0));
    for (int k = 1; k <= 6; ++k) {
      REQUIRE(power_sum(x, -k) == std::conj(power_sum(x, k)));
      REQUIRE(std::abs(power_sum(x, k)) <= 9.0 + 1e-12);
      REQUIRE(std::abs(power_sum(x, k) - p_direct(x, k)) < 1e-12);
    }
    const PowerSumTable t(x, 6);
    for (int k = -6; k <= 6; ++k) REQUIRE(std::abs(t(k) - power_sum(x, k)) < 1e-12);
  }
}

TEST_CASE("table from precomputed positive sums") {
  Rng r(8);
  const auto x = random_config(5, r);
  std::vector<cd> pos;
  for (int k = 1; k <= 4; ++k) pos.push_back(power_sum(x, k));
  const auto t = PowerSumTable::from_positive(5, pos);
  REQUIRE(t(0) == cd(5.0, 0.0));
  REQUIRE(t(-3) == std::conj(pos[2]));
  REQUIRE(t.max_index() == 4);
}

TEST_CASE("W statistic") {
  Rng r(2);
  const auto x = random_config(6, r);
  for (int k = 1; k <= 3; ++k) {
    REQUIRE(w_statistic(x, k, 2.0) == Catch::Approx(std::norm(p_direct(x, k)) / k).epsilon(1e-14));
    REQUIRE(w_statistic(x, k, 1.0) == Catch::Approx(std::norm(p_direct(x, k)) / (2.0 * k)).epsilon(1e-14));
  }
  REQUIRE(std::abs(w_statistic(equispaced_spectrum(6), 2, 2.0)) < 1e-24 * 36 + 1e-20);
  REQUIRE(w_statistic(make_spectrum({1.3}), 1, 2.0) == Catch::Approx(1.0));
}

TEST_CASE("Haar joint moments") {
  REQUIRE(haar_joint_moment({{1}, {1}}, 2) == 1);
  REQUIRE(haar_joint_moment({{0, 1}, {0, 1}}, 4) == 2);
  REQUIRE(haar_joint_moment({{1, 0}, {0, 1}}, 4) == 0);
  REQUIRE(haar_joint_moment({{2}, {2}}, 4) == 2);
  REQUIRE(haar_joint_moment({{1, 2, 1}, {1, 2, 1}}, 8) == 1 * 2 * 2 * 2 * 3);
  // 64! at degree 64 stays exact.
  BigInt f = 1;
  for (int i = 2; i <= 64; ++i) f *= i;
  REQUIRE(haar_joint_moment({{64}, {64}}, 128) == f);
  REQUIRE_THROWS_AS(haar_joint_moment({{2}, {2}}, 3), OutOfRegime);
  PartitionExponents e{{1, 2}, {0, 1}};
  REQUIRE(e.total_degree() == 1 + 4 + 2);
  REQUIRE(e.total_count() == 4);
}

TEST_CASE("Haar joint moments against Monte Carlo") {
  const std::size_t N = 40000;
  const std::vector<PartitionExponents> cases = {{{1}, {1}}, {{2}, {2}}, {{0, 1}, {0, 1}}, {{1, 1}, {1, 1}},
                                                 {{2}, {0, 1}}, {{1}, {0}}};
  std::vector<std::vector<double>> re(cases.size(), std::vector<double>(N)), im = re;
  for (std::size_t i = 0; i < N; ++i) {
    Rng r(55, i);
    const auto p = PowerSumTable::from_positive(10, sample_cue_traces(10, 2, r));
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const cd z = partition_monomial(p, cases[c]);
      re[c][i] = z.real();
      im[c][i] = z.imag();
    }
  }
  for (std::size_t c = 0; c < cases.size(); ++c) {
    const double exact = haar_joint_moment(cases[c], 10).convert_to<double>();
    REQUIRE(within_se(mean_of(re[c]), exact, 4.0));
    REQUIRE(within_se(mean_of(im[c]), 0.0, 4.0));
  }
}

TEST_CASE("Dyson operator: direct against formula") {
  Rng r(10);
  for (double beta : {1.0, 2.0, 4.0}) {
    for (int rep = 0; rep < 200; ++rep) {
      const auto x = random_config(10, r);
      const PowerSumTable t(x, 5);
      for (int j = 1; j <= 5; ++j) {
        const cd d = dyson_apply_direct(x, j, beta);
        const cd f = dyson_apply_formula(x, j, beta);
        REQUIRE(std::abs(d - f) <= 1e-9 * (1.0 + 100.0 * j * j * beta));
        REQUIRE(std::abs(dyson_apply_formula(t, j, beta) - f) < 1e-12 * (1.0 + std::abs(f)));
      }
    }
  }
}

TEST_CASE("Dyson operator special cases") {
  const auto one = make_spectrum({0.7});
  for (int j = 1; j <= 4; ++j)
    REQUIRE(std::abs(dyson_apply_direct(one, j, 3.0) + double(j * j) * std::polar(1.0, j * 0.7)) < 1e-14);
  Rng r(3);
  const auto x = random_config(8, r);
  // β = 2: D p_1 = −n p_1 and D p_j = −nj p_j − j Σ p_l p_{j−l}.
  REQUIRE(std::abs(dyson_apply_formula(x, 1, 2.0) + 8.0 * p_direct(x, 1)) < 1e-12);
  for (int j = 2; j <= 4; ++j) {
    cd s = 0.0;
    for (int l = 1; l < j; ++l) s += p_direct(x, l) * p_direct(x, j - l);
    const cd want = -8.0 * j * p_direct(x, j) - double(j) * s;
    REQUIRE(std::abs(dyson_apply_formula(x, j, 2.0) - want) < 1e-11);
  }
  REQUIRE(std::abs(dyson_apply_formula(x, 1, 1.5) - (0.75 - 8.0 * 0.75 - 1.0) * p_direct(x, 1)) < 1e-12);
  REQUIRE_THROWS_AS(dyson_apply_direct(make_spectrum({1.0, 1.0 + 1e-12}), 1, 2.0), SingularConfiguration);
}

TEST_CASE("D|p_j|^2 formula against the product rule") {
  // D(p p̄) = p̄ D p + p conj(D p) + 2 Σ_a ∂_a p_j ∂_a p_{−j}, with the last sum j² n.
  Rng r(12);
  for (double beta : {1.0, 2.0, 4.0}) {
    for (int rep = 0; rep < 200; ++rep) {
      const auto x = random_config(10, r);
      for (int j = 1; j <= 5; ++j) {
        const cd p = p_direct(x, j);
        const cd dp = dyson_apply_direct(x, j, beta);
        const double oracle = 2.0 * (std::conj(p) * dp).real() + 2.0 * j * j * 10.0;
        const cd f = dyson_apply_w_formula(x, j, beta);
        const double scale = 1.0 + 100.0 * j * j * beta * 10.0;
        REQUIRE(std::abs(f.real() - oracle) <= 1e-9 * scale);
        REQUIRE(std::abs(f.imag()) <= 1e-10 * 100.0 * j * j * scale);
      }
    }
  }
}

TEST_CASE("D|p_j|^2 at beta=2 reduces to the unitary-group form") {
  Rng r(13);
  const auto x = random_config(9, r);
  for (int j = 1; j <= 4; ++j) {
    const cd p = p_direct(x, j);
    cd s = 0.0;
    for (int l = 1; l < j; ++l) s += p_direct(x, l) * p_direct(x, j - l);
    const double want = 2.0 * j * j * 9.0 - 2.0 * 9.0 * j * std::norm(p) - 2.0 * j * (s * std::conj(p)).real();
    REQUIRE(std::abs(dyson_apply_w_formula(x, j, 2.0) - cd(want, 0.0)) < 1e-10);
  }
}

TEST_CASE("gradient pairing") {
  Rng r(14);
  const auto x = random_config(11, r);
  for (int k = 1; k <= 5; ++k) {
    REQUIRE(std::abs(grad_pairing(x, k, k) + double(k * k) * p_direct(x, 2 * k)) <= 1e-12 * 11 * k * k);
    REQUIRE(std::abs(grad_pairing(x, k, -k) - cd(k * k * 11.0, 0.0)) <= 1e-12 * 11 * k * k);
    REQUIRE(std::abs(grad_pairing(x, k, 0)) == 0.0);
    // Σ_a (ik e^{ikθ})(il e^{ilθ}) from the definition.
    for (int l = -3; l <= 3; ++l) {
      cd s = 0.0;
      for (double a : x.angles) s += cd(0, k) * std::polar(1.0, k * a) * cd(0, l) * std::polar(1.0, l * a);
      REQUIRE(std::abs(grad_pairing(x, k, l) - s) < 1e-11);
    }
  }
}

TEST_CASE("residuals") {
  Rng r(15);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = random_config(10, r);
    REQUIRE(residual_E(x, 1, 2.0) == 0.0);
    const cd p1 = p_direct(x, 1), p2 = p_direct(x, 2), p4 = p_direct(x, 4);
    REQUIRE(residual_E(x, 2, 2.0) == Catch::Approx(-2.0 * (p1 * p1 * std::conj(p2)).real()).margin(1e-11));
    REQUIRE(residual_Eprime(x, 1, 2.0) ==
            Catch::Approx((-2.0 * p2 * std::conj(p1) * std::conj(p1) - 2.0 * std::conj(p2) * p1 * p1).real())
                .margin(1e-11));
    REQUIRE(residual_Eprime(x, 2, 2.0) ==
            Catch::Approx((-4.0 * p4 * std::conj(p2) * std::conj(p2)).real()).margin(1e-10));
    // β = 1, k = 1: −(1/2)|p_1|².
    REQUIRE(residual_E(x, 1, 1.0) == Catch::Approx(-0.5 * std::norm(p1)).margin(1e-12));
    const PowerSumTable t(x, 6);
    REQUIRE(residual_E(t, 3, 4.0) == Catch::Approx(residual_E(x, 3, 4.0)).margin(1e-10));
  }
  const auto e = equispaced_spectrum(9, 0.2);
  for (int k = 1; k <= 4; ++k) REQUIRE(std::abs(residual_Eprime(e, k, 2.0)) < 1e-10);
}

TEST_CASE("printed residual moment values") {
  REQUIRE(moment_E_sq(1) == Rational(0));
  REQUIRE(moment_E_sq(2) == Rational(2));
  REQUIRE(moment_E_sq(3) == Rational(4));
  REQUIRE(moment_E_sq(4) == Rational(2 * 64 + 3 * 16 - 8, 12));
  REQUIRE(moment_Eprime_sq(1) == 32);
  REQUIRE(moment_Eprime_sq(2) == 256);
  REQUIRE(moment_Eprime_sq(3) == 864);
}

TEST_CASE("residual moments at beta=2 against a Haar expansion") {
  // E = −2 Re(S p̄_k), S = Σ_{l<k} p_l p_{k−l}, and E' = −4 Re(p_{2k} p̄_k²).
  // For Z with E Z² = 0, E[(Re Z)²] = E|Z|²/2; E|Z|² follows from the moment rule.
  // k = 2: E|p_1² p̄_2|² = 2!·2 = 4, so E[E²] = 8. k = 3: S = 2 p_1 p_2,
  // E|p_1 p_2 p̄_3|² = 1·2·3 = 6, so E[E²] = 48. E[E'²] = 8·2k·(k²·2) = 32k³.
  const std::vector<std::pair<int, double>> e_sq = {{1, 0.0}, {2, 8.0}, {3, 48.0}};
  for (auto [k, want_e] : e_sq) {
    const std::size_t n = 8 * static_cast<std::size_t>(k);
    const std::size_t N = 40000;
    std::vector<double> e2(N), ep2(N);
    for (std::size_t i = 0; i < N; ++i) {
      Rng r(600 + k, i);
      const auto p = PowerSumTable::from_positive(n, sample_cue_traces(n, 2 * k, r));
      e2[i] = std::pow(residual_E(p, k, 2.0), 2);
      ep2[i] = std::pow(residual_Eprime(p, k, 2.0), 2);
    }
    if (k == 1) {
      REQUIRE(mean_of(e2).mean == 0.0);
    } else {
      REQUIRE(within_se(mean_of(e2), want_e, 3.0));
    }
    REQUIRE(within_se(mean_of(ep2), 32.0 * k * k * k, 3.0));
  }
}
