#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "steinrmt/diffusion.hpp"

namespace steinrmt {

enum class Condition { drift, quadratic, tail };

std::string to_string(Condition c);

/// Small-t regression of an exchangeable-pair moment.
///
/// For drift and quadratic, `estimates[j]` is the sample mean of
/// g·(W_t − W)/t resp. g·(W_t − W)²/t at t_grid[j], `extrapolated` is the
/// least-squares intercept at t = 0 and `model_value` is the sample mean of
/// g·model. The intercept is formed per replicate, so `std_error` accounts
/// for the common random numbers shared across t. pass ⇔
/// |extrapolated − model_value| ≤ 3·std_error.
///
/// For tail, `estimates[j]` is mean[(W_t − W)² 1{(W_t − W)² > ρ}]/t,
/// `extrapolated` is the estimate at the smallest t and `model_value` is 0;
/// pass additionally requires the estimates not to increase as t decreases.
struct ConditionReport {
  Condition condition = Condition::drift;
  std::vector<double> t_grid;
  std::vector<double> estimates;
  std::vector<double> estimate_errors;
  double extrapolated = 0.0;
  double model_value = 0.0;
  double std_error = 0.0;
  // extrapolated / model_value, or NaN when model_value = 0.
  double fitted_scale = 0.0;
  bool monotone = true;
  bool pass = false;
};

// Intercept weights of the least-squares line through (t_j, y_j).
std::vector<double> intercept_weights(const std::vector<double>& t_grid);

// `model` and `weight` are per-replicate values aligned with table.w0; an
// empty weight means g ≡ 1. Throws InvalidArgument with fewer than three t.
ConditionReport check_condition1(const PairTable& table, const std::vector<double>& model,
                                 const std::vector<double>& weight = {});
ConditionReport check_condition2(const PairTable& table, const std::vector<double>& model,
                                 const std::vector<double>& weight = {});
ConditionReport check_condition3(const PairTable& table, double rho);

// Same checks on per-t pair lists that share replicate order; the model is a
// function of W.
ConditionReport check_condition1(const std::map<double, std::vector<PairSample>>& pairs_by_t,
                                 const std::function<double(double)>& model);
ConditionReport check_condition2(const std::map<double, std::vector<PairSample>>& pairs_by_t,
                                 const std::function<double(double)>& model);
ConditionReport check_condition3(const std::map<double, std::vector<PairSample>>& pairs_by_t, double rho);

struct MeanEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// mean[(W_t − W)(g(W_t) + g(W))] at t_grid[t_index]; zero in expectation for an
// exchangeable pair.
MeanEstimate antisymmetry_check(const PairTable& table, std::size_t t_index, const std::function<double(double)>& g);

}  // namespace steinrmt
