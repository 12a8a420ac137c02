#include "steinrmt/powersums.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "steinrmt/errors.hpp"

namespace steinrmt {

namespace {

constexpr double kCollisionThreshold = 1e-10;

void require_positive_index(int k, const char* what) {
  if (k < 1) throw InvalidArgument(std::string(what) + ": index must be at least 1");
}

double checked_real(std::complex<double> z, double tolerance, const char* what) {
  if (std::abs(z.imag()) > tolerance)
    throw NumericError(std::string(what) + ": imaginary part " + std::to_string(z.imag()) +
                       " exceeds tolerance " + std::to_string(tolerance));
  return z.real();
}

}  // namespace

std::complex<double> power_sum(const SpectrumSample& x, int k) {
  if (k == 0) return {static_cast<double>(x.n()), 0.0};
  if (k < 0) return std::conj(power_sum(x, -k));
  double re = 0.0;
  double im = 0.0;
  for (double theta : x.angles) {
    const double phase = static_cast<double>(k) * theta;
    re += std::cos(phase);
    im += std::sin(phase);
  }
  return {re, im};
}

PowerSumTable::PowerSumTable(const SpectrumSample& x, int max_index)
    : n_(x.n()), max_index_(max_index), positive_(static_cast<std::size_t>(std::max(0, max_index))) {
  for (int m = 1; m <= max_index; ++m) positive_[static_cast<std::size_t>(m - 1)] = power_sum(x, m);
}

PowerSumTable PowerSumTable::from_positive(std::size_t n, const std::vector<std::complex<double>>& positive) {
  PowerSumTable t;
  t.n_ = n;
  t.max_index_ = static_cast<int>(positive.size());
  t.positive_ = positive;
  return t;
}

std::complex<double> PowerSumTable::operator()(int m) const {
  if (m == 0) return {static_cast<double>(n_), 0.0};
  const int a = std::abs(m);
  if (a > max_index_) throw InvalidArgument("PowerSumTable: index " + std::to_string(m) + " outside table");
  const auto v = positive_[static_cast<std::size_t>(a - 1)];
  return m > 0 ? v : std::conj(v);
}

double w_statistic(const PowerSumTable& p, int k, double beta) {
  require_positive_index(k, "w_statistic");
  if (!(beta > 0.0)) throw InvalidArgument("w_statistic: beta must be positive");
  return beta / (2.0 * k) * std::norm(p(k));
}

double w_statistic(const SpectrumSample& x, int k, double beta) {
  require_positive_index(k, "w_statistic");
  if (!(beta > 0.0)) throw InvalidArgument("w_statistic: beta must be positive");
  return beta / (2.0 * k) * std::norm(power_sum(x, k));
}

unsigned PartitionExponents::total_degree() const {
  unsigned d = 0;
  for (std::size_t j = 0; j < a.size(); ++j) d += static_cast<unsigned>(j + 1) * a[j];
  for (std::size_t j = 0; j < b.size(); ++j) d += static_cast<unsigned>(j + 1) * b[j];
  return d;
}

unsigned PartitionExponents::total_count() const {
  unsigned c = 0;
  for (unsigned v : a) c += v;
  for (unsigned v : b) c += v;
  return c;
}

BigInt haar_joint_moment(const PartitionExponents& p, std::size_t n) {
  if (n < 1) throw InvalidArgument("haar_joint_moment: n must be at least 1");
  if (n < p.total_count())
    throw OutOfRegime("haar_joint_moment: requires n >= sum(a_i + b_i) = " + std::to_string(p.total_count()));

  const std::size_t len = std::max(p.a.size(), p.b.size());
  for (std::size_t j = 0; j < len; ++j) {
    const unsigned aj = j < p.a.size() ? p.a[j] : 0u;
    const unsigned bj = j < p.b.size() ? p.b[j] : 0u;
    if (aj != bj) return BigInt(0);
  }
  BigInt value = 1;
  for (std::size_t j = 0; j < p.a.size(); ++j) {
    const unsigned part = static_cast<unsigned>(j + 1);
    for (unsigned m = 1; m <= p.a[j]; ++m) value *= BigInt(part) * m;
  }
  return value;
}

std::complex<double> partition_monomial(const PowerSumTable& p, const PartitionExponents& e) {
  std::complex<double> value{1.0, 0.0};
  for (std::size_t j = 0; j < e.a.size(); ++j)
    for (unsigned m = 0; m < e.a[j]; ++m) value *= p(static_cast<int>(j + 1));
  for (std::size_t j = 0; j < e.b.size(); ++j)
    for (unsigned m = 0; m < e.b[j]; ++m) value *= p(-static_cast<int>(j + 1));
  return value;
}

std::complex<double> dyson_apply_direct(const SpectrumSample& x, int j, double beta) {
  require_positive_index(j, "dyson_apply_direct");
  const std::size_t n = x.n();
  if (n > 1 && x.min_gap() < kCollisionThreshold)
    throw SingularConfiguration("dyson_apply_direct: angles collide within 1e-10");

  const double jd = static_cast<double>(j);
  const std::complex<double> ij{0.0, jd};
  std::complex<double> laplacian{0.0, 0.0};
  std::complex<double> drift{0.0, 0.0};
  for (std::size_t a = 0; a < n; ++a) {
    const std::complex<double> e = std::polar(1.0, jd * x.angles[a]);
    laplacian += -jd * jd * e;
    double cot_sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      cot_sum += 1.0 / std::tan(0.5 * (x.angles[a] - x.angles[b]));
    }
    drift += cot_sum * ij * e;
  }
  return laplacian + 0.5 * beta * drift;
}

std::complex<double> dyson_apply_formula(const PowerSumTable& p, int j, double beta) {
  require_positive_index(j, "dyson_apply_formula");
  const double jd = j;
  const double n = static_cast<double>(p.n());
  std::complex<double> conv{0.0, 0.0};
  for (int l = 1; l <= j - 1; ++l) conv += p(l) * p(j - l);
  return -0.5 * jd * beta * conv + (0.5 * jd * jd * beta - 0.5 * n * jd * beta - jd * jd) * p(j);
}

std::complex<double> dyson_apply_formula(const SpectrumSample& x, int j, double beta) {
  return dyson_apply_formula(PowerSumTable(x, std::max(j, 1)), j, beta);
}

std::complex<double> dyson_apply_w_formula(const PowerSumTable& p, int j, double beta) {
  require_positive_index(j, "dyson_apply_w_formula");
  const double jd = j;
  const double n = static_cast<double>(p.n());
  const std::complex<double> pj = p(j);
  const double mod_sq = std::norm(pj);
  std::complex<double> conj_conv{0.0, 0.0};
  std::complex<double> conv{0.0, 0.0};
  for (int l = 1; l <= j - 1; ++l) {
    conj_conv += p(-l) * p(l - j);
    conv += p(l) * p(j - l);
  }
  return -n * beta * jd * mod_sq - (2.0 - beta) * jd * jd * mod_sq + 2.0 * jd * jd * n -
         0.5 * beta * jd * conj_conv * pj - 0.5 * beta * jd * conv * std::conj(pj);
}

std::complex<double> dyson_apply_w_formula(const SpectrumSample& x, int j, double beta) {
  return dyson_apply_w_formula(PowerSumTable(x, std::max(j, 1)), j, beta);
}

std::complex<double> grad_pairing(const SpectrumSample& x, int k, int l) {
  // Σ_a (i k e^{ikθ_a})(i l e^{ilθ_a})
  const double kd = k;
  const double ld = l;
  return -kd * ld * power_sum(x, k + l);
}

double residual_E(const PowerSumTable& p, int k, double beta) {
  require_positive_index(k, "residual_E");
  const std::complex<double> pk = p(k);
  std::complex<double> conv{0.0, 0.0};
  std::complex<double> conj_conv{0.0, 0.0};
  for (int l = 1; l <= k - 1; ++l) {
    conv += p(l) * p(k - l);
    conj_conv += p(-l) * p(l - k);
  }
  const std::complex<double> e = -0.5 * beta * (2.0 - beta) * k * std::norm(pk) -
                                 0.25 * beta * beta * conv * std::conj(pk) -
                                 0.25 * beta * beta * conj_conv * pk;
  const double n = static_cast<double>(p.n());
  return checked_real(e, 1e-10 * n * n * k, "residual_E");
}

double residual_E(const SpectrumSample& x, int k, double beta) {
  return residual_E(PowerSumTable(x, std::max(k, 1)), k, beta);
}

double residual_Eprime(const PowerSumTable& p, int k, double beta) {
  require_positive_index(k, "residual_Eprime");
  const std::complex<double> pk = p(k);
  const std::complex<double> p2k = p(2 * k);
  const std::complex<double> e =
      -0.5 * beta * beta * (p2k * std::conj(pk) * std::conj(pk) + std::conj(p2k) * pk * pk);
  const double n = static_cast<double>(p.n());
  return checked_real(e, 1e-10 * n * n * k, "residual_Eprime");
}

double residual_Eprime(const SpectrumSample& x, int k, double beta) {
  return residual_Eprime(PowerSumTable(x, 2 * std::max(k, 1)), k, beta);
}

Rational moment_E_sq(int k) {
  require_positive_index(k, "moment_E_sq");
  const long long kk = k;
  if (kk % 2 == 1) return Rational(kk * kk * kk - kk, 6);
  return Rational(2 * kk * kk * kk + 3 * kk * kk - 2 * kk, 12);
}

BigInt moment_Eprime_sq(int k) {
  require_positive_index(k, "moment_Eprime_sq");
  BigInt kk = k;
  return 32 * kk * kk * kk;
}

}  // namespace steinrmt
