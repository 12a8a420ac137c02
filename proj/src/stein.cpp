#include "steinrmt/stein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "steinrmt/errors.hpp"

namespace steinrmt {

namespace {

constexpr double kForwardLimit = 1.0;
constexpr double kTailLength = 40.0;
constexpr int kMaxDepth = 60;
constexpr double kMaxStencilStep = 2.5e-4;
constexpr double kMinStencilStep = 1e-6;
constexpr double kLocalTol = 1e-14;

// μ_j = ∫_0^H s^j e^{−s} ds, j = 0, 1, 2.
void exp_moments(double H, double mu[3]) {
  if (H >= 0.5) {
    const double e = std::exp(-H);
    mu[0] = -std::expm1(-H);
    mu[1] = 1.0 - e * (1.0 + H);
    mu[2] = 2.0 - e * (H * H + 2.0 * H + 2.0);
    return;
  }
  // Σ_m (−1)^m H^{m+j+1} / (m! (m+j+1))
  for (int j = 0; j < 3; ++j) {
    double term_base = std::pow(H, j + 1);  // H^{m+j+1}/m! at m = 0
    double sum = 0.0;
    for (int m = 0; m < 40; ++m) {
      const double term = term_base / (m + j + 1);
      sum += (m % 2 == 0) ? term : -term;
      if (std::abs(term) < 1e-19 * std::abs(sum)) break;
      term_base *= H / (m + 1);
    }
    mu[j] = sum;
  }
}

// ∫_a^b q(x) e^{−(x−a)} dx with q the quadratic through (a, ga), (mid, gm), (b, gb).
double weighted_panel(double H, double ga, double gm, double gb) {
  double mu[3];
  exp_moments(H, mu);
  const double inv = 1.0 / (H * H);
  const double w0 = 2.0 * inv * (mu[2] - 1.5 * H * mu[1] + 0.5 * H * H * mu[0]);
  const double w1 = -4.0 * inv * (mu[2] - H * mu[1]);
  const double w2 = 2.0 * inv * (mu[2] - 0.5 * H * mu[1]);
  return w0 * ga + w1 * gm + w2 * gb;
}

struct AdaptiveState {
  const RealFunction* g;
  double worst_excess = 0.0;
  double worst_at = 0.0;
  bool failed = false;
};

double adapt(AdaptiveState& st, double a, double b, double ga, double gm, double gb, double whole, double tol,
             int depth) {
  const double m = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double glm = (*st.g)(0.5 * (a + m));
  const double grm = (*st.g)(0.5 * (m + b));
  const double left = weighted_panel(h, ga, glm, gm);
  const double right = weighted_panel(h, gm, grm, gb);
  const double combined = left + std::exp(-h) * right;
  const double err = std::abs(combined - whole);
  if (err <= tol) return combined;
  if (depth >= kMaxDepth || h < 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a))) {
    if (err - tol > st.worst_excess) {
      st.worst_excess = err - tol;
      st.worst_at = a;
    }
    st.failed = true;
    return combined;
  }
  const double l = adapt(st, a, m, ga, glm, gm, left, 0.5 * tol, depth + 1);
  const double r = adapt(st, m, b, gm, grm, gb, right, 0.5 * tol, depth + 1);
  return l + std::exp(-h) * r;
}

}  // namespace

double smoothing_h(const SmoothingParams& p, double x) {
  const double t = p.t;
  const double d = p.delta;
  if (x <= t - d) return 1.0;
  if (x <= t - 0.5 * d) {
    const double u = x - t + d;
    return 1.0 - 2.0 * u * u / (d * d);
  }
  if (x <= t) {
    const double u = x - t;
    return 2.0 * u * u / (d * d);
  }
  return 0.0;
}

double smoothing_h_derivative(const SmoothingParams& p, double x) {
  const double t = p.t;
  const double d = p.delta;
  if (x <= t - d) return 0.0;
  if (x <= t - 0.5 * d) return -4.0 * (x - t + d) / (d * d);
  if (x <= t) return 4.0 * (x - t) / (d * d);
  return 0.0;
}

std::vector<double> smoothing_breakpoints(const SmoothingParams& p) {
  std::vector<double> out;
  for (double b : {p.t - p.delta, p.t - 0.5 * p.delta, p.t})
    if (b >= 0.0) out.push_back(b);
  return out;
}

double exp_weighted_integral(const RealFunction& g, double a, double b, double tol) {
  if (!(b >= a)) throw InvalidArgument("exp_weighted_integral: requires a <= b");
  if (b == a) return 0.0;
  AdaptiveState st{&g};
  const double ga = g(a);
  const double gm = g(0.5 * (a + b));
  const double gb = g(b);
  const double whole = weighted_panel(b - a, ga, gm, gb);
  const double value = adapt(st, a, b, ga, gm, gb, whole, tol, 0);
  if (st.failed) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "exp_weighted_integral: tolerance " << tol << " not met on [" << a << ", " << b
        << "]; worst excess " << st.worst_excess << " near x = " << st.worst_at;
    throw NumericError(msg.str());
  }
  return value;
}

double SteinSolution::local_integral(double a, double b, double tol) const {
  // ∫_a^b (h − m) e^{−(x−a)} dx split at breakpoints.
  const RealFunction g = [this](double x) { return h_(x) - h_mean_; };
  double total = 0.0;
  double start = a;
  for (double bp : breakpoints_) {
    if (bp > start && bp < b) {
      total += std::exp(-(start - a)) * exp_weighted_integral(g, start, bp, tol);
      start = bp;
    }
  }
  total += std::exp(-(start - a)) * exp_weighted_integral(g, start, b, tol);
  return total;
}

double SteinSolution::value_near(std::size_t i, double w) const {
  const double wi = grid_[i];
  if (w == 0.0) return h_(0.0) - h_mean_;
  if (wi <= kForwardLimit) {
    // F(w) relative to F(w_i)
    double F = anchor_[i];
    if (w >= wi) {
      F += std::exp(-wi) * local_integral(wi, w, kLocalTol);
    } else {
      F -= std::exp(-w) * local_integral(w, wi, kLocalTol);
    }
    return std::exp(w) * F / w;
  }
  double G = anchor_[i];
  if (w >= wi) {
    G = std::exp(w - wi) * (G - local_integral(wi, w, kLocalTol));
  } else {
    G = local_integral(w, wi, kLocalTol) + std::exp(-(wi - w)) * G;
  }
  return -G / w;
}

double SteinSolution::stencil_step(std::size_t i) const {
  const double w = grid_[i];
  double dist = w / 2.5;  // keep the stencil inside w > 0
  for (double bp : breakpoints_) dist = std::min(dist, std::abs(bp - w));
  return std::clamp(dist / 3.0, kMinStencilStep, kMaxStencilStep);
}

double SteinSolution::derivative(std::size_t i) const {
  const double w = grid_[i];
  const double eta = std::min(stencil_step(i), w / 2.5);
  const double fp1 = value_near(i, w + eta);
  const double fm1 = value_near(i, w - eta);
  const double fp2 = value_near(i, w + 2.0 * eta);
  const double fm2 = value_near(i, w - 2.0 * eta);
  return (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * eta);
}

double SteinSolution::residual(std::size_t i) const {
  const double w = grid_[i];
  const double f = value_near(i, w);
  return w * derivative(i) - (w - 1.0) * f - (h_(w) - h_mean_);
}

double SteinSolution::max_residual() const {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid_.size(); ++i) {
    if (grid_[i] <= 0.0) continue;
    worst = std::max(worst, std::abs(residual(i)));
  }
  return worst;
}

SteinSolution stein_solve(RealFunction h, std::vector<double> grid, double quad_tol,
                          std::vector<double> breakpoints) {
  if (!h) throw InvalidArgument("stein_solve: h is empty");
  if (grid.size() < 3) throw InvalidArgument("stein_solve: grid needs at least three points");
  if (!(quad_tol > 0.0)) throw InvalidArgument("stein_solve: quad_tol must be positive");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0)) throw InvalidArgument("stein_solve: grid must be non-negative");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("stein_solve: grid must be strictly increasing");
  }
  std::sort(breakpoints.begin(), breakpoints.end());

  SteinSolution sol;
  sol.h_ = std::move(h);
  sol.grid_ = std::move(grid);
  sol.breakpoints_ = std::move(breakpoints);
  sol.quad_tol_ = quad_tol;

  const auto& g = sol.grid_;
  const std::size_t n = g.size();
  const double w_max = g.back();
  const double upper = std::max(w_max, sol.breakpoints_.empty() ? 0.0 : sol.breakpoints_.back()) + kTailLength;

  // m = ∫_0^∞ h e^{−x} dx over unit pieces; the previous m = 0 makes
  // local_integral integrate h itself.
  sol.h_mean_ = 0.0;
  double mean = 0.0;
  for (double a = 0.0; a < upper; a += 1.0) {
    const double b = std::min(upper, a + 1.0);
    mean += std::exp(-a) * sol.local_integral(a, b, quad_tol);
  }
  sol.h_mean_ = mean;

  // Forward sweep F on nodes up to kForwardLimit (and one node past it).
  std::vector<double> forward(n, 0.0);
  {
    double F = g[0] > 0.0 ? sol.local_integral(0.0, g[0], quad_tol) : 0.0;
    forward[0] = F;
    for (std::size_t i = 0; i + 1 < n && g[i] <= kForwardLimit; ++i) {
      F += std::exp(-g[i]) * sol.local_integral(g[i], g[i + 1], quad_tol);
      forward[i + 1] = F;
    }
  }
  // Backward sweep G from the truncated tail.
  std::vector<double> backward(n, 0.0);
  {
    double G = 0.0;
    for (double b = upper; b > w_max;) {
      const double a = std::max(w_max, b - 1.0);
      G = sol.local_integral(a, b, quad_tol) + std::exp(-(b - a)) * G;
      b = a;
    }
    backward[n - 1] = G;
    for (std::size_t i = n - 1; i > 0 && g[i - 1] > kForwardLimit; --i) {
      G = sol.local_integral(g[i - 1], g[i], quad_tol) + std::exp(-(g[i] - g[i - 1])) * G;
      backward[i - 1] = G;
    }
  }

  sol.anchor_.resize(n);
  sol.values_.resize(n);
  const double f0 = sol.h_(0.0) - sol.h_mean_;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = g[i];
    if (w <= kForwardLimit) {
      sol.anchor_[i] = forward[i];
      sol.values_[i] = (w == 0.0) ? f0 : std::exp(w) * forward[i] / w;
    } else {
      sol.anchor_[i] = backward[i];
      sol.values_[i] = -backward[i] / w;
    }
    if (!std::isfinite(sol.values_[i])) throw NumericError("stein_solve: non-finite value on the grid");
  }
  return sol;
}

std::vector<double> default_stein_grid(std::size_t points, double w_max) {
  if (points < 8) throw InvalidArgument("default_stein_grid: need at least 8 points");
  const std::size_t geometric = points / 8;
  const double g_lo = 1e-6;
  const double g_hi = 0.5;
  std::vector<double> grid;
  grid.reserve(points);
  grid.push_back(0.0);
  for (std::size_t i = 0; i < geometric; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(geometric);
    grid.push_back(g_lo * std::pow(g_hi / g_lo, frac));
  }
  const std::size_t uniform = points - grid.size();
  for (std::size_t i = 0; i < uniform; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(uniform - 1);
    grid.push_back(g_hi + frac * (w_max - g_hi));
  }
  return grid;
}

SteinBoundsReport verify_stein_bounds(const SteinSolution& sol, double h_prime_sup) {
  if (!(h_prime_sup >= 0.0)) throw InvalidArgument("verify_stein_bounds: h_prime_sup must be non-negative");
  SteinBoundsReport r;
  r.h_prime_sup = h_prime_sup;
  for (double v : sol.values()) r.sup_f = std::max(r.sup_f, std::abs(v));
  const auto& grid = sol.grid();
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (grid[i] <= 0.0) continue;
    r.sup_fprime = std::max(r.sup_fprime, std::abs(sol.derivative(i)));
  }
  const double slack = 10.0 * sol.quad_tol();
  r.bound_f = (1.0 + 2.0 / std::exp(1.0)) * h_prime_sup;
  r.bound_fprime = 2.0 * h_prime_sup;
  r.f_within = r.sup_f <= r.bound_f + slack;
  r.fprime_within = r.sup_fprime <= r.bound_fprime + slack;
  return r;
}

}  // namespace steinrmt
