#include "steinrmt/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steinrmt/errors.hpp"

namespace steinrmt {

namespace {

constexpr double kSigmas = 3.0;

MeanEstimate mean_and_error(const std::vector<double>& v) {
  MeanEstimate out;
  if (v.empty()) return out;
  const double N = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  out.mean = sum / N;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / (N - 1.0) / N);
  }
  return out;
}

void validate(const PairTable& table, const std::vector<double>& model, const std::vector<double>& weight) {
  if (table.t_grid.size() < 3) throw InvalidArgument("condition check: need at least three t values");
  for (double t : table.t_grid)
    if (!(t > 0.0)) throw InvalidArgument("condition check: t must be positive");
  if (table.replicates() < 2) throw InvalidArgument("condition check: need at least two replicates");
  if (model.size() != table.replicates()) throw InvalidArgument("condition check: model size mismatch");
  if (!weight.empty() && weight.size() != table.replicates())
    throw InvalidArgument("condition check: weight size mismatch");
}

// y(t, i) = g_i·moment(ΔW)/t, regressed to t = 0 against g_i·model_i.
ConditionReport regress(Condition which, const PairTable& table, const std::vector<double>& model,
                        const std::vector<double>& weight, int power) {
  validate(table, model, weight);
  const std::size_t reps = table.replicates();
  const std::size_t nt = table.t_grid.size();
  const auto c = intercept_weights(table.t_grid);

  ConditionReport r;
  r.condition = which;
  r.t_grid = table.t_grid;
  std::vector<double> diff(reps, 0.0);
  std::vector<double> gm(reps, 0.0);
  std::vector<std::vector<double>> y(nt, std::vector<double>(reps, 0.0));
  for (std::size_t i = 0; i < reps; ++i) {
    const double g = weight.empty() ? 1.0 : weight[i];
    gm[i] = g * model[i];
    for (std::size_t j = 0; j < nt; ++j) {
      const double dw = table.wt[j][i] - table.w0[i];
      const double m = power == 1 ? dw : dw * dw;
      y[j][i] = g * m / table.t_grid[j];
      diff[i] += c[j] * (y[j][i] - gm[i]);
    }
  }
  for (std::size_t j = 0; j < nt; ++j) {
    const auto e = mean_and_error(y[j]);
    r.estimates.push_back(e.mean);
    r.estimate_errors.push_back(e.std_error);
  }
  r.model_value = mean_and_error(gm).mean;
  r.extrapolated = 0.0;
  for (std::size_t j = 0; j < nt; ++j) r.extrapolated += c[j] * r.estimates[j];
  r.std_error = mean_and_error(diff).std_error;
  r.fitted_scale = r.model_value != 0.0 ? r.extrapolated / r.model_value : std::numeric_limits<double>::quiet_NaN();
  r.pass = std::abs(r.extrapolated - r.model_value) <= kSigmas * r.std_error;
  return r;
}

}  // namespace

std::string to_string(Condition c) {
  switch (c) {
    case Condition::drift: return "drift";
    case Condition::quadratic: return "quadratic";
    case Condition::tail: return "tail";
  }
  return "unknown";
}

std::vector<double> intercept_weights(const std::vector<double>& t_grid) {
  const std::size_t m = t_grid.size();
  if (m < 2) throw InvalidArgument("intercept_weights: need at least two points");
  double mean = 0.0;
  for (double t : t_grid) mean += t;
  mean /= static_cast<double>(m);
  double ss = 0.0;
  for (double t : t_grid) ss += (t - mean) * (t - mean);
  if (!(ss > 0.0)) throw InvalidArgument("intercept_weights: t values must be distinct");
  std::vector<double> c(m);
  for (std::size_t j = 0; j < m; ++j) c[j] = 1.0 / static_cast<double>(m) - mean * (t_grid[j] - mean) / ss;
  return c;
}

ConditionReport check_condition1(const PairTable& table, const std::vector<double>& model,
                                 const std::vector<double>& weight) {
  return regress(Condition::drift, table, model, weight, 1);
}

ConditionReport check_condition2(const PairTable& table, const std::vector<double>& model,
                                 const std::vector<double>& weight) {
  return regress(Condition::quadratic, table, model, weight, 2);
}

ConditionReport check_condition3(const PairTable& table, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("check_condition3: rho must be positive");
  validate(table, std::vector<double>(table.replicates(), 0.0), {});
  const std::size_t reps = table.replicates();
  const std::size_t nt = table.t_grid.size();

  // Visit t from largest to smallest.
  std::vector<std::size_t> order(nt);
  for (std::size_t j = 0; j < nt; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return table.t_grid[a] > table.t_grid[b]; });

  std::vector<std::vector<double>> y(nt, std::vector<double>(reps, 0.0));
  for (std::size_t j = 0; j < nt; ++j) {
    for (std::size_t i = 0; i < reps; ++i) {
      const double dw = table.wt[j][i] - table.w0[i];
      const double sq = dw * dw;
      y[j][i] = sq > rho ? sq / table.t_grid[j] : 0.0;
    }
  }
  ConditionReport r;
  r.condition = Condition::tail;
  r.t_grid = table.t_grid;
  for (std::size_t j = 0; j < nt; ++j) {
    const auto e = mean_and_error(y[j]);
    r.estimates.push_back(e.mean);
    r.estimate_errors.push_back(e.std_error);
  }
  r.monotone = true;
  for (std::size_t q = 0; q + 1 < nt; ++q) {
    const std::size_t big = order[q];
    const std::size_t small = order[q + 1];
    std::vector<double> d(reps);
    for (std::size_t i = 0; i < reps; ++i) d[i] = y[small][i] - y[big][i];
    const auto e = mean_and_error(d);
    if (e.mean > kSigmas * e.std_error) r.monotone = false;
  }
  const std::size_t smallest = order.back();
  r.extrapolated = r.estimates[smallest];
  r.std_error = r.estimate_errors[smallest];
  r.model_value = 0.0;
  r.fitted_scale = std::numeric_limits<double>::quiet_NaN();
  r.pass = r.monotone && std::abs(r.extrapolated) <= kSigmas * r.std_error;
  return r;
}

ConditionReport check_condition1(const std::map<double, std::vector<PairSample>>& pairs_by_t,
                                 const std::function<double(double)>& model) {
  const auto table = PairTable::from_pairs(pairs_by_t);
  std::vector<double> m(table.replicates());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = model(table.w0[i]);
  return check_condition1(table, m);
}

ConditionReport check_condition2(const std::map<double, std::vector<PairSample>>& pairs_by_t,
                                 const std::function<double(double)>& model) {
  const auto table = PairTable::from_pairs(pairs_by_t);
  std::vector<double> m(table.replicates());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = model(table.w0[i]);
  return check_condition2(table, m);
}

ConditionReport check_condition3(const std::map<double, std::vector<PairSample>>& pairs_by_t, double rho) {
  return check_condition3(PairTable::from_pairs(pairs_by_t), rho);
}

MeanEstimate antisymmetry_check(const PairTable& table, std::size_t t_index, const std::function<double(double)>& g) {
  if (t_index >= table.t_grid.size()) throw InvalidArgument("antisymmetry_check: t index out of range");
  std::vector<double> v(table.replicates());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = table.w0[i];
    const double b = table.wt[t_index][i];
    v[i] = (b - a) * (g(b) + g(a));
  }
  return mean_and_error(v);
}

}  // namespace steinrmt
