#include "steinrmt/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "steinrmt/errors.hpp"

namespace steinrmt {

namespace {

const double kOnePlusTwoOverE = 1.0 + 2.0 / std::exp(1.0);
const double kSqrt3 = std::sqrt(3.0);

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw InvalidArgument(std::string(what) + " must be non-negative");
}

}  // namespace

double bound_sphere(long n) {
  if (n < 2) throw InvalidArgument("bound_sphere: n must be at least 2");
  const double nd = static_cast<double>(n);
  return 2.0 * std::sqrt(2.0) / std::sqrt((nd - 1.0) * (nd + 2.0));
}

double bound_cue(long n, long k) {
  if (n < 1 || k < 1) throw InvalidArgument("bound_cue: n and k must be positive");
  const double c = 1.0 + 8.0 * std::sqrt(2.0);
  return std::sqrt(c * std::sqrt(static_cast<double>(k)) / static_cast<double>(n));
}

CbeConstants cbe_constants(long n, long k, double beta) {
  if (n < 1 || k < 1) throw InvalidArgument("cbe_constants: n and k must be positive");
  if (!(beta > 0.0)) throw InvalidArgument("cbe_constants: beta must be positive");
  CbeConstants c;
  c.n = n;
  c.k = k;
  c.beta = beta;
  c.alpha = 2.0 / beta;
  const double dev = std::abs(c.alpha - 1.0);
  const double d2 = static_cast<double>(n - 2 * k) + c.alpha;
  const double d4 = static_cast<double>(n - 4 * k) + c.alpha;
  if (!(d2 > 0.0) || !(d4 > 0.0))
    throw OutOfRegime("cbe_constants: n − 2k + α and n − 4k + α must be positive");
  const double kd = static_cast<double>(k);
  const double lo2 = 1.0 - dev / d2;
  const double lo4 = 1.0 - dev / d4;
  c.A = std::pow(lo2, 2.0 * kd);
  c.B = std::pow(1.0 + dev / d2, 2.0 * kd);
  c.A_prime = std::pow(lo4, 4.0 * kd);
  c.B_prime = std::pow(1.0 + dev / d4, 4.0 * kd);
  c.C_E = std::max(std::abs(c.A - 1.0), std::abs(c.B - 1.0));
  c.C_E_prime = std::max(std::abs(c.A_prime - 1.0), std::abs(c.B_prime - 1.0));
  c.in_regime = lo2 > 0.0 && lo2 <= 1.0 && lo4 > 0.0 && lo4 <= 1.0;
  return c;
}

CbeBound bound_cbe(long n, long k, double beta) {
  CbeBound out;
  out.constants = cbe_constants(n, k, beta);
  if (!out.constants.in_regime) throw OutOfRegime("bound_cbe: constants out of regime");
  const double c = out.constants.C_E_prime;
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double first = std::sqrt(80.0 * c * kd) / (std::sqrt(beta) * nd);
  const double second = kOnePlusTwoOverE * std::sqrt(2.0 * c * kd * kd * kd) / (beta * nd);
  out.value = 2.0 * std::sqrt(first + second);
  out.degenerate = c == 0.0;
  return out;
}

ExpApproxBound bound_thm53(double lambda, double mean_abs_E, double mean_abs_Eprime, std::optional<double> delta) {
  if (!(lambda > 0.0)) throw InvalidArgument("bound_thm53: lambda must be positive");
  require_nonnegative(mean_abs_E, "bound_thm53: mean_abs_E");
  require_nonnegative(mean_abs_Eprime, "bound_thm53: mean_abs_Eprime");
  const double a = (2.0 * mean_abs_Eprime + kOnePlusTwoOverE * mean_abs_E) / lambda;
  ExpApproxBound out;
  if (delta) {
    if (!(*delta > 0.0)) throw InvalidArgument("bound_thm53: delta must be positive");
    out.delta_used = *delta;
    out.bound = a / *delta + *delta / 2.0;
    return out;
  }
  out.delta_used = std::sqrt(2.0 * a);
  out.bound = out.delta_used;
  return out;
}

double bound_meckes(double lambda_inv_op, double sigma_inv_op, double mean_E_abs, double mean_Eprime_hs) {
  require_nonnegative(lambda_inv_op, "bound_meckes: lambda_inv_op");
  require_nonnegative(sigma_inv_op, "bound_meckes: sigma_inv_op");
  require_nonnegative(mean_E_abs, "bound_meckes: mean_E_abs");
  require_nonnegative(mean_Eprime_hs, "bound_meckes: mean_Eprime_hs");
  return lambda_inv_op * (0.5 * sigma_inv_op * mean_Eprime_hs + mean_E_abs);
}

std::array<double, 4> lemma62_bounds(long k, double beta, double C_E) {
  if (k < 1 || !(beta > 0.0)) throw InvalidArgument("lemma62_bounds: k and beta must be positive");
  require_nonnegative(C_E, "lemma62_bounds: C_E");
  const double kd = static_cast<double>(k);
  const double k2 = kd * kd;
  const double k3 = k2 * kd;
  const double b2 = beta * beta;
  const double b3 = b2 * beta;
  return {8.0 * C_E * k2 / b2, 8.0 * kSqrt3 * C_E * k3 / b3, std::pow(2.0 / beta, 2.5) * C_E * k2 * std::sqrt(kd),
          4.0 * C_E * k3 / b3};
}

std::array<double, 2> lemma63_bounds(long k, double beta, double C_E_prime) {
  if (k < 1 || !(beta > 0.0)) throw InvalidArgument("lemma63_bounds: k and beta must be positive");
  require_nonnegative(C_E_prime, "lemma63_bounds: C_E_prime");
  const double kd = static_cast<double>(k);
  const double k3 = kd * kd * kd;
  const double b3 = beta * beta * beta;
  return {64.0 * kSqrt3 * C_E_prime * k3 / b3, 32.0 * C_E_prime * k3 / b3};
}

}  // namespace steinrmt
