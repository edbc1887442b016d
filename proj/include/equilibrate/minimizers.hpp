#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "equilibrate/nfg.hpp"

namespace equilibrate {

namespace detail {
inline void check_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
  }
}
}  // namespace detail

// State of a single-simplex regret minimizer. cum_regret holds the
// accumulated regrets Q (kept nonnegative by the RM+ step, signed under
// plain RM). The induced strategy is the normalized positive part of Q,
// or uniform when that is zero.
struct RegretState {
  std::vector<double> cum_regret;
  std::optional<std::vector<double>> last_loss;  // prediction for optimistic variants
  long iteration = 0;

  static RegretState zeros(std::size_t n) {
    RegretState s;
    s.cum_regret.assign(n, 0.0);
    return s;
  }

  // Q^{0,1} <- sigma^{1,1}: the initial accumulated regret equals the
  // initial strategy, so the first induced strategy is that strategy.
  static RegretState from_strategy(const SimplexVector& sigma) {
    RegretState s;
    s.cum_regret.assign(sigma.begin(), sigma.end());
    return s;
  }

  SimplexVector strategy() const {
    std::vector<double> pos(cum_regret.size());
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = std::max(cum_regret[i], 0.0);
    return SimplexVector::from_weights(pos);
  }
};

enum class MinimizerKind { kRm, kRmPlus, kMwu, kGda };

struct MinimizerConfig {
  MinimizerKind kind = MinimizerKind::kRmPlus;
  double learning_rate = 0.1;  // ignored by RM / RM+
  bool optimistic = false;

  void validate() const {
    if ((kind == MinimizerKind::kMwu || kind == MinimizerKind::kGda) && learning_rate <= 0.0) {
      throw std::invalid_argument("MinimizerConfig: learning_rate must be positive");
    }
  }
};

// One RM+ step against a value vector q (higher is better):
//   r(a) = q(a) - <sigma, q>,  Q' = max(Q + r, 0),  sigma' = Q'/|Q'|_1.
inline std::pair<RegretState, SimplexVector> rm_plus_step(const RegretState& state,
                                                          std::span<const double> value_vector,
                                                          const SimplexVector& current) {
  if (value_vector.size() != current.size() || state.cum_regret.size() != current.size()) {
    throw std::invalid_argument("rm_plus_step: dimension mismatch");
  }
  detail::check_finite(value_vector, "rm_plus_step");
  double baseline = 0.0;
  for (std::size_t a = 0; a < current.size(); ++a) baseline += current[a] * value_vector[a];
  RegretState next = state;
  next.iteration = state.iteration + 1;
  for (std::size_t a = 0; a < current.size(); ++a) {
    next.cum_regret[a] = std::max(next.cum_regret[a] + (value_vector[a] - baseline), 0.0);
  }
  SimplexVector sigma = next.strategy();
  return {std::move(next), std::move(sigma)};
}

// Plain regret matching: Q accumulates signed regrets; the positive part is
// taken only at normalization.
inline std::pair<RegretState, SimplexVector> rm_step(const RegretState& state,
                                                     std::span<const double> value_vector,
                                                     const SimplexVector& current) {
  if (value_vector.size() != current.size() || state.cum_regret.size() != current.size()) {
    throw std::invalid_argument("rm_step: dimension mismatch");
  }
  detail::check_finite(value_vector, "rm_step");
  double baseline = 0.0;
  for (std::size_t a = 0; a < current.size(); ++a) baseline += current[a] * value_vector[a];
  RegretState next = state;
  next.iteration = state.iteration + 1;
  for (std::size_t a = 0; a < current.size(); ++a) {
    next.cum_regret[a] += value_vector[a] - baseline;
  }
  SimplexVector sigma = next.strategy();
  return {std::move(next), std::move(sigma)};
}

// Multiplicative weights on a loss vector; domain is the simplex interior.
// With a prediction the effective loss is 2*loss - prediction. Falls back to
// log-space arithmetic when any probability is below 1e-200.
inline SimplexVector mwu_step(const SimplexVector& current, std::span<const double> loss,
                              double eta, const std::vector<double>* prediction = nullptr) {
  if (loss.size() != current.size()) throw std::invalid_argument("mwu_step: dimension mismatch");
  if (eta <= 0.0) throw std::invalid_argument("mwu_step: eta must be positive");
  detail::check_finite(loss, "mwu_step");
  if (!current.strictly_positive()) {
    throw std::domain_error("mwu_step: strategy on simplex boundary");
  }
  if (prediction != nullptr && prediction->size() != loss.size()) {
    throw std::invalid_argument("mwu_step: prediction dimension mismatch");
  }
  const std::size_t n = current.size();
  std::vector<double> eff(loss.begin(), loss.end());
  if (prediction != nullptr) {
    for (std::size_t a = 0; a < n; ++a) eff[a] = 2.0 * loss[a] - (*prediction)[a];
  }
  double min_prob = *std::min_element(current.begin(), current.end());
  if (min_prob < 1e-200) {
    std::vector<double> logw(n);
    for (std::size_t a = 0; a < n; ++a) logw[a] = std::log(current[a]) - eta * eff[a];
    double m = *std::max_element(logw.begin(), logw.end());
    std::vector<double> w(n);
    for (std::size_t a = 0; a < n; ++a) w[a] = std::exp(logw[a] - m);
    return SimplexVector::from_weights(w);
  }
  double shift = *std::min_element(eff.begin(), eff.end());
  std::vector<double> w(n);
  for (std::size_t a = 0; a < n; ++a) w[a] = current[a] * std::exp(-eta * (eff[a] - shift));
  return SimplexVector::from_weights(w);
}

// Euclidean projection onto the probability simplex (sort-based).
inline SimplexVector simplex_project(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("simplex_project: empty vector");
  detail::check_finite(v, "simplex_project");
  const std::size_t n = v.size();
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double tau = 0.0;
  std::size_t rho = 0;
  for (std::size_t k = 0; k < n; ++k) {
    cumsum += u[k];
    double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) {
      rho = k + 1;
      tau = t;
    }
  }
  (void)rho;
  std::vector<double> x(n);
  for (std::size_t a = 0; a < n; ++a) x[a] = std::max(v[a] - tau, 0.0);
  return SimplexVector::from_weights(x);
}

// Projected (optimistic) gradient step: sigma' = proj(sigma - eta * eff).
inline SimplexVector gda_step(const SimplexVector& current, std::span<const double> loss,
                              double eta, const std::vector<double>* prediction = nullptr) {
  if (loss.size() != current.size()) throw std::invalid_argument("gda_step: dimension mismatch");
  if (eta < 0.0) throw std::invalid_argument("gda_step: eta must be nonnegative");
  detail::check_finite(loss, "gda_step");
  if (prediction != nullptr && prediction->size() != loss.size()) {
    throw std::invalid_argument("gda_step: prediction dimension mismatch");
  }
  std::vector<double> point(current.begin(), current.end());
  for (std::size_t a = 0; a < point.size(); ++a) {
    double eff = (prediction != nullptr) ? 2.0 * loss[a] - (*prediction)[a] : loss[a];
    point[a] -= eta * eff;
  }
  return simplex_project(point);
}

// The online-mirror-descent form of RM+: theta' = max(theta + eta * m, 0)
// with m(a) = q(a) - <sigma, q> and sigma = theta/|theta|_1. Exists to test
// the numerical equivalence with rm_plus_step.
inline std::vector<double> omd_rm_plus_step(std::span<const double> theta,
                                            std::span<const double> value_vector, double eta) {
  if (theta.size() != value_vector.size()) {
    throw std::invalid_argument("omd_rm_plus_step: dimension mismatch");
  }
  detail::check_finite(theta, "omd_rm_plus_step");
  detail::check_finite(value_vector, "omd_rm_plus_step");
  double norm = 0.0;
  for (double t : theta) {
    if (t < 0.0) throw std::invalid_argument("omd_rm_plus_step: negative theta entry");
    norm += t;
  }
  if (norm <= 0.0) throw std::invalid_argument("omd_rm_plus_step: all-zero theta");
  double baseline = 0.0;
  for (std::size_t a = 0; a < theta.size(); ++a) {
    baseline += (theta[a] / norm) * value_vector[a];
  }
  std::vector<double> next(theta.size());
  for (std::size_t a = 0; a < theta.size(); ++a) {
    next[a] = std::max(theta[a] + eta * (value_vector[a] - baseline), 0.0);
  }
  return next;
}

}  // namespace equilibrate
