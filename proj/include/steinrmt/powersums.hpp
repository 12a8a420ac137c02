#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

#include "steinrmt/ensembles.hpp"

namespace steinrmt {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::rational<long long>;

// p_k(θ) = Σ_j exp(i k θ_j). p_0 = n exactly and p_{−k} = conj(p_k) exactly.
std::complex<double> power_sum(const SpectrumSample& x, int k);

/// p_m for all m in [−max_index, max_index], evaluated once.
class PowerSumTable {
 public:
  PowerSumTable(const SpectrumSample& x, int max_index);
  // Builds the table from precomputed p_1..p_M (for example traces of U^j).
  static PowerSumTable from_positive(std::size_t n, const std::vector<std::complex<double>>& positive);

  std::complex<double> operator()(int m) const;
  [[nodiscard]] int max_index() const { return max_index_; }
  [[nodiscard]] std::size_t n() const { return n_; }

 private:
  PowerSumTable() = default;
  std::size_t n_ = 0;
  int max_index_ = 0;
  std::vector<std::complex<double>> positive_;  // p_1..p_M
};

// W = (β / 2k)·|p_k|².
double w_statistic(const SpectrumSample& x, int k, double beta);
double w_statistic(const PowerSumTable& p, int k, double beta);

/// Multiplicity vectors: a[j−1] is the multiplicity of part j.
struct PartitionExponents {
  std::vector<unsigned> a;
  std::vector<unsigned> b;

  // Σ_j j·(a_j + b_j)
  [[nodiscard]] unsigned total_degree() const;
  // Σ_j (a_j + b_j)
  [[nodiscard]] unsigned total_count() const;
};

// E[∏_j Tr(U^j)^{a_j} conj(Tr(U^j))^{b_j}] for Haar U in U(n):
// δ_{ab}·∏_j j^{a_j}·a_j!. Requires n ≥ Σ_j (a_j + b_j); throws OutOfRegime
// otherwise.
BigInt haar_joint_moment(const PartitionExponents& p, std::size_t n);

// The monomial ∏_j p_j^{a_j} conj(p_j)^{b_j} at one configuration.
std::complex<double> partition_monomial(const PowerSumTable& p, const PartitionExponents& e);

// D p_j from the definition of the Dyson operator
//   D = Σ_a ∂²_a + (β/2) Σ_{a≠b} cot((θ_a − θ_b)/2) ∂_a.
// Throws SingularConfiguration if two angles are within 1e−10.
std::complex<double> dyson_apply_direct(const SpectrumSample& x, int j, double beta);

// D p_j through the power-sum identity
//   −(jβ/2) Σ_{l=1}^{j−1} p_l p_{j−l} + (j²β/2 − njβ/2 − j²) p_j.
std::complex<double> dyson_apply_formula(const SpectrumSample& x, int j, double beta);
std::complex<double> dyson_apply_formula(const PowerSumTable& p, int j, double beta);

// D(p_j conj(p_j)):
//   −nβj|p_j|² − (2−β)j²|p_j|² + 2j²n
//   − (β/2) j Σ_{l=1}^{j−1} p_{−l} p_{l−j} p_j − (β/2) j Σ_{l=1}^{j−1} p_l p_{j−l} conj(p_j)
std::complex<double> dyson_apply_w_formula(const SpectrumSample& x, int j, double beta);
std::complex<double> dyson_apply_w_formula(const PowerSumTable& p, int j, double beta);

// Σ_a ∂_a p_k · ∂_a p_l = −k·l·p_{k+l}.
std::complex<double> grad_pairing(const SpectrumSample& x, int k, int l);

// Drift residual
//   E = −(β(2−β)/2) k |p_k|² − (β²/4) Σ_{l=1}^{k−1} p_l p_{k−l} conj(p_k)
//       − (β²/4) Σ_{l=1}^{k−1} p_{−l} p_{l−k} p_k.
// Real by symmetry; throws NumericError if |Im| > 1e−10·n²·k.
double residual_E(const SpectrumSample& x, int k, double beta);
double residual_E(const PowerSumTable& p, int k, double beta);

// Quadratic-variation residual E' = −(β²/2)(p_{2k} p_{−k}² + p_{−2k} p_k²).
double residual_Eprime(const SpectrumSample& x, int k, double beta);
double residual_Eprime(const PowerSumTable& p, int k, double beta);

// E[E²] at β = 2: (k³−k)/6 for odd k, (2k³+3k²−2k)/12 for even k.
Rational moment_E_sq(int k);
// E[E'²] at β = 2: 32k³.
BigInt moment_Eprime_sq(int k);

}  // namespace steinrmt
