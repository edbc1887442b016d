#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace equilibrate {

// A probability distribution over a finite action set. Entries are
// nonnegative and sum to 1 within 1e-12 after every public operation.
// Entries below 1e-300 are clamped to zero before renormalizing.
class SimplexVector {
 public:
  explicit SimplexVector(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty()) throw std::invalid_argument("SimplexVector: empty");
    double sum = 0.0;
    for (double& v : p_) {
      if (!std::isfinite(v)) throw std::invalid_argument("SimplexVector: non-finite entry");
      if (v < 0.0) {
        if (v < -1e-12) throw std::invalid_argument("SimplexVector: negative entry");
        v = 0.0;
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("SimplexVector: entries sum to " + std::to_string(sum));
    }
    renormalize(sum);
  }

  static SimplexVector uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("SimplexVector: empty");
    SimplexVector s;
    s.p_.assign(n, 1.0 / static_cast<double>(n));
    return s;
  }

  // Normalizes a vector of nonnegative weights. An all-zero weight vector
  // yields the uniform distribution.
  static SimplexVector from_weights(std::span<const double> w) {
    if (w.empty()) throw std::invalid_argument("SimplexVector: empty");
    double sum = 0.0;
    for (double v : w) {
      if (!std::isfinite(v)) throw std::invalid_argument("SimplexVector: non-finite weight");
      if (v < 0.0) throw std::invalid_argument("SimplexVector: negative weight");
      sum += v;
    }
    if (sum <= 0.0) return uniform(w.size());
    SimplexVector s;
    s.p_.assign(w.begin(), w.end());
    s.renormalize(sum);
    return s;
  }

  static SimplexVector point_mass(std::size_t n, std::size_t index) {
    if (index >= n) throw std::invalid_argument("SimplexVector: index out of range");
    SimplexVector s;
    s.p_.assign(n, 0.0);
    s.p_[index] = 1.0;
    return s;
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probs() const { return p_; }
  auto begin() const { return p_.begin(); }
  auto end() const { return p_.end(); }

  bool strictly_positive() const {
    return std::all_of(p_.begin(), p_.end(), [](double v) { return v > 0.0; });
  }

  friend bool operator==(const SimplexVector& a, const SimplexVector& b) {
    return a.p_ == b.p_;
  }

 private:
  SimplexVector() = default;

  void renormalize(double sum) {
    bool clamped = false;
    for (double& v : p_) {
      if (v != 0.0 && v < 1e-300) {
        v = 0.0;
        clamped = true;
      }
    }
    if (clamped) {
      sum = 0.0;
      for (double v : p_) sum += v;
      if (sum <= 0.0) {
        p_.assign(p_.size(), 1.0 / static_cast<double>(p_.size()));
        return;
      }
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      for (double& v : p_) v /= sum;
    }
  }

  std::vector<double> p_;
};

// A strategy profile: one mixed strategy per player.
struct Profile {
  SimplexVector p0;
  SimplexVector p1;
};

// Two-player zero-sum normal-form game. Only player 1's utility is stored;
// player 0's is its negation.
class MatrixGame {
 public:
  MatrixGame(int rows, int cols, std::vector<double> payoff)
      : rows_(rows), cols_(cols), payoff_(std::move(payoff)) {
    if (rows_ < 1 || cols_ < 1) throw std::invalid_argument("MatrixGame: empty dimension");
    if (payoff_.size() != static_cast<std::size_t>(rows_) * cols_) {
      throw std::invalid_argument("MatrixGame: payoff size mismatch");
    }
    for (double v : payoff_) {
      if (!std::isfinite(v)) throw std::invalid_argument("MatrixGame: non-finite payoff");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  // Player 1's utility for the pure action pair (a0, a1).
  double at(int a0, int a1) const { return payoff_[static_cast<std::size_t>(a0) * cols_ + a1]; }
  const std::vector<double>& payoff() const { return payoff_; }

  // Benchmark payoffs are normalized to [-1, 1]; the library does not
  // enforce the range, callers may warn.
  bool payoffs_within_unit_range() const {
    return std::all_of(payoff_.begin(), payoff_.end(),
                       [](double v) { return v >= -1.0 && v <= 1.0; });
  }

  Profile uniform_profile() const {
    return Profile{SimplexVector::uniform(rows_), SimplexVector::uniform(cols_)};
  }

 private:
  int rows_;
  int cols_;
  std::vector<double> payoff_;  // row-major u_1(a0, a1)
};

inline void check_profile_shape(const MatrixGame& game, const Profile& profile) {
  if (profile.p0.size() != static_cast<std::size_t>(game.rows()) ||
      profile.p1.size() != static_cast<std::size_t>(game.cols())) {
    throw std::invalid_argument("profile dimensions do not match game");
  }
}

// u_1(sigma_0, sigma_1) = sigma_0^T A sigma_1.
inline double expected_payoff(const MatrixGame& game, const Profile& profile) {
  check_profile_shape(game, profile);
  double total = 0.0;
  for (int i = 0; i < game.rows(); ++i) {
    if (profile.p0[i] == 0.0) continue;
    double row = 0.0;
    for (int j = 0; j < game.cols(); ++j) row += profile.p1[j] * game.at(i, j);
    total += profile.p0[i] * row;
  }
  return total;
}

// Loss gradient g_i(a_i) = -sum_{a_-i} sigma_-i(a_-i) u_i(a_i, a_-i).
// Player 0's utility is -u_1.
inline std::vector<double> loss_gradient(const MatrixGame& game, int player,
                                         const SimplexVector& opponent) {
  if (player != 0 && player != 1) throw std::invalid_argument("player must be 0 or 1");
  if (player == 0) {
    if (opponent.size() != static_cast<std::size_t>(game.cols())) {
      throw std::invalid_argument("opponent dimension mismatch");
    }
    std::vector<double> g(game.rows(), 0.0);
    for (int i = 0; i < game.rows(); ++i) {
      double v = 0.0;
      for (int j = 0; j < game.cols(); ++j) v += opponent[j] * game.at(i, j);
      g[i] = v;  // -u_0 = u_1
    }
    return g;
  }
  if (opponent.size() != static_cast<std::size_t>(game.rows())) {
    throw std::invalid_argument("opponent dimension mismatch");
  }
  std::vector<double> g(game.cols(), 0.0);
  for (int j = 0; j < game.cols(); ++j) {
    double v = 0.0;
    for (int i = 0; i < game.rows(); ++i) v += opponent[i] * game.at(i, j);
    g[j] = -v;
  }
  return g;
}

// Exploitability: eps(sigma) = 0.5 * (max_{a1} u_1(sigma_0, a1) +
// max_{a0} u_0(a0, sigma_1)). Zero iff sigma is a Nash equilibrium.
// Best responses break ties toward the lowest action index.
inline double exploitability(const MatrixGame& game, const Profile& profile) {
  check_profile_shape(game, profile);
  double best1 = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < game.cols(); ++j) {
    double v = 0.0;
    for (int i = 0; i < game.rows(); ++i) v += profile.p0[i] * game.at(i, j);
    if (v > best1) best1 = v;
  }
  double best0 = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < game.rows(); ++i) {
    double v = 0.0;
    for (int j = 0; j < game.cols(); ++j) v -= profile.p1[j] * game.at(i, j);
    if (v > best0) best0 = v;
  }
  return 0.5 * (best1 + best0);
}

// Half squared L2 distance between concatenated profiles, minimized over a
// set of known equilibria (the Bregman divergence of the Euclidean square
// norm to the nearest listed NE).
inline double nash_distance(const Profile& profile, std::span<const Profile> ne_set) {
  if (ne_set.empty()) throw std::invalid_argument("nash_distance: empty NE set");
  double best = std::numeric_limits<double>::infinity();
  for (const Profile& ne : ne_set) {
    if (ne.p0.size() != profile.p0.size() || ne.p1.size() != profile.p1.size()) {
      throw std::invalid_argument("nash_distance: dimension mismatch");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < profile.p0.size(); ++i) {
      double diff = ne.p0[i] - profile.p0[i];
      d += diff * diff;
    }
    for (std::size_t j = 0; j < profile.p1.size(); ++j) {
      double diff = ne.p1[j] - profile.p1[j];
      d += diff * diff;
    }
    best = std::min(best, 0.5 * d);
  }
  return best;
}

inline void to_json(nlohmann::json& j, const MatrixGame& game) {
  nlohmann::json payoff = nlohmann::json::array();
  for (int i = 0; i < game.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < game.cols(); ++c) row.push_back(game.at(i, c));
    payoff.push_back(std::move(row));
  }
  j = nlohmann::json{{"rows", game.rows()}, {"cols", game.cols()}, {"payoff", std::move(payoff)}};
}

inline MatrixGame matrix_game_from_json(const nlohmann::json& j) {
  int rows = j.at("rows").get<int>();
  int cols = j.at("cols").get<int>();
  std::vector<double> payoff;
  payoff.reserve(static_cast<std::size_t>(rows) * cols);
  for (const auto& row : j.at("payoff")) {
    for (const auto& v : row) payoff.push_back(v.get<double>());
  }
  return MatrixGame(rows, cols, std::move(payoff));
}

}  // namespace equilibrate
