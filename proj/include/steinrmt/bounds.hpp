#pragma once

#include <array>
#include <optional>

namespace steinrmt {

// 2√2 / √((n−1)(n+2)); n ≥ 2.
double bound_sphere(long n);

// √((1 + 8√2)·√k / n).
double bound_cue(long n, long k);

/// Constants of the exponential bound for the circular β-ensemble, α = 2/β:
///   A  = (1 − |α−1|/(n−2k+α))^{2k},  B  = (1 + |α−1|/(n−2k+α))^{2k},
///   A' = (1 − |α−1|/(n−4k+α))^{4k},  B' = (1 + |α−1|/(n−4k+α))^{4k}.
struct CbeConstants {
  long n = 0;
  long k = 0;
  double beta = 0.0;
  double alpha = 0.0;
  double A = 1.0;
  double B = 1.0;
  double A_prime = 1.0;
  double B_prime = 1.0;
  double C_E = 0.0;        // max(|A−1|, |B−1|)
  double C_E_prime = 0.0;  // max(|A'−1|, |B'−1|)
  bool in_regime = false;  // both bases of A and A' lie in (0, 1]
};

// Throws OutOfRegime when n − 2k + α ≤ 0 or n − 4k + α ≤ 0.
CbeConstants cbe_constants(long n, long k, double beta);

struct CbeBound {
  double value = 0.0;
  // C_E' = 0, so the printed bound is zero regardless of the true distance.
  bool degenerate = false;
  CbeConstants constants;
};

// 2·√( √(80 C_E' k)/(√β n) + (1+2/e)·√(2 C_E' k³)/(β n) ).
CbeBound bound_cbe(long n, long k, double beta);

struct ExpApproxBound {
  double delta_used = 0.0;
  double bound = 0.0;
};

// With a = (2 E|E'| + (1+2/e) E|E|)/λ, returns a/δ + δ/2 at the given δ or,
// when δ is omitted, the minimiser δ* = √(2a) and the value √(2a).
ExpApproxBound bound_thm53(double lambda, double mean_abs_E, double mean_abs_Eprime,
                           std::optional<double> delta = std::nullopt);

// ‖Λ^{-1}‖·(½‖Σ^{-1/2}‖·E‖E'‖ + E|E|).
double bound_meckes(double lambda_inv_op, double sigma_inv_op, double mean_E_abs, double mean_Eprime_hs);

// 8C_E k²/β², 8√3 C_E k³/β³, (2/β)^{5/2} C_E k^{5/2}, 4C_E k³/β³.
std::array<double, 4> lemma62_bounds(long k, double beta, double C_E);
// 64√3 C_E' k³/β³, 32 C_E' k³/β³.
std::array<double, 2> lemma63_bounds(long k, double beta, double C_E_prime);

}  // namespace steinrmt
