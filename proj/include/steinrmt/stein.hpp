#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace steinrmt {

using RealFunction = std::function<double(double)>;

/// Smoothed indicator of (−∞, t]: 1 up to t−δ, two quadratic pieces joining
/// at t−δ/2 with value 1/2, and 0 beyond t.
struct SmoothingParams {
  double t = 0.0;
  double delta = 1.0;
};

double smoothing_h(const SmoothingParams& p, double x);
double smoothing_h_derivative(const SmoothingParams& p, double x);
// Points where the second derivative jumps: t−δ, t−δ/2, t (those ≥ 0).
std::vector<double> smoothing_breakpoints(const SmoothingParams& p);

// ∫_a^b g(x) e^{−(x−a)} dx by adaptive quadrature that integrates the
// quadratic interpolant of g against the exponential weight exactly on every
// panel. Throws NumericError when the panel tolerance cannot be met.
double exp_weighted_integral(const RealFunction& g, double a, double b, double tol);

/// Tabulated solution of  w f'(w) − (w−1) f(w) = h(w) − E h(Z),  Z ~ Exp(1).
class SteinSolution {
 public:
  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double h_mean() const { return h_mean_; }
  [[nodiscard]] double quad_tol() const { return quad_tol_; }

  // f at grid point i (same as values()[i]).
  [[nodiscard]] double value(std::size_t i) const { return values_[i]; }
  // f at w, integrated locally from the tabulated anchor of node i.
  [[nodiscard]] double value_near(std::size_t i, double w) const;
  // f'(grid[i]) by a fourth-order centred difference. The step is at most 2.5e−4
  // and shrinks so the stencil does not cross a breakpoint of h.
  [[nodiscard]] double derivative(std::size_t i) const;
  // w f'(w) − (w−1) f(w) − (h(w) − E h(Z)) at grid point i.
  [[nodiscard]] double residual(std::size_t i) const;
  // Largest |residual| over interior grid points.
  [[nodiscard]] double max_residual() const;

 private:
  friend SteinSolution stein_solve(RealFunction h, std::vector<double> grid, double quad_tol,
                                   std::vector<double> breakpoints);
  [[nodiscard]] double stencil_step(std::size_t i) const;
  [[nodiscard]] double local_integral(double a, double b, double tol) const;

  RealFunction h_;
  std::vector<double> grid_;
  std::vector<double> values_;
  // F(w) = ∫_0^w (h − m) e^{−x} dx for w ≤ kForwardLimit, else
  // G(w) = ∫_w^∞ (h − m) e^{−(x−w)} dx.
  std::vector<double> anchor_;
  std::vector<double> breakpoints_;
  double h_mean_ = 0.0;
  double quad_tol_ = 0.0;
};

/// Solves the exponential Stein equation on `grid` (sorted, non-negative, at
/// least three points). `breakpoints` lists points where h or its low
/// derivatives are not smooth; quadrature panels and difference stencils
/// respect them.
///
/// f(w) = −(e^w / w) ∫_w^∞ (h(x) − m) e^{−x} dx with m = E h(Z). Since
/// ∫_0^∞ (h − m) e^{−x} dx = 0 the same function is (e^w / w) ∫_0^w (h − m) e^{−x} dx;
/// the second form is used for w ≤ 1 and the first beyond, so neither
/// cancels catastrophically. At w = 0, G(w) = ∫_w^∞ (h − m) e^{−(x−w)} dx
/// vanishes with G'(0) = −(h(0) − m), hence f(0) = h(0) − m. The tail is cut
/// at x = w_max + 40; the discarded mass is below sup|h − m|·e^{−40}.
SteinSolution stein_solve(RealFunction h, std::vector<double> grid, double quad_tol = 1e-10,
                          std::vector<double> breakpoints = {});

// 2048 points: w = 0, then geometric from 1e−6 to 0.5, then uniform to w_max.
std::vector<double> default_stein_grid(std::size_t points = 2048, double w_max = 20.0);

struct SteinBoundsReport {
  double sup_f = 0.0;
  double sup_fprime = 0.0;
  double h_prime_sup = 0.0;
  double bound_f = 0.0;       // (1 + 2/e)·‖h'‖
  double bound_fprime = 0.0;  // 2·‖h'‖
  bool f_within = false;
  bool fprime_within = false;
  [[nodiscard]] bool pass() const { return f_within && fprime_within; }
};

// Grid suprema of |f| and |f'| against ‖f‖ ≤ (1+2/e)‖h'‖ and ‖f'‖ ≤ 2‖h'‖,
// each with 10·quad_tol slack.
SteinBoundsReport verify_stein_bounds(const SteinSolution& sol, double h_prime_sup);

}  // namespace steinrmt
