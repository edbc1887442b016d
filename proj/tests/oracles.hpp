// Test-only oracles, kept independent of the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "equilibrate/efg.hpp"
#include "equilibrate/nfg.hpp"
#include "equilibrate/rt_nfg.hpp"

namespace oracles {

using equilibrate::BehaviorProfile;
using equilibrate::MatrixGame;
using equilibrate::Profile;
using equilibrate::SimplexVector;
using equilibrate::TreeGame;

// Euclidean projection of a 2-vector onto the simplex by grid search with
// local refinement.
inline std::vector<double> grid_project_2d(const std::vector<double>& v) {
  double best_p = 0.0;
  double best_dist = std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 1.0;
  for (int round = 0; round < 6; ++round) {
    double step = (hi - lo) / 1000.0;
    for (int k = 0; k <= 1000; ++k) {
      double p = lo + k * step;
      double d0 = p - v[0];
      double d1 = (1.0 - p) - v[1];
      double dist = d0 * d0 + d1 * d1;
      if (dist < best_dist) {
        best_dist = dist;
        best_p = p;
      }
    }
    lo = std::max(0.0, best_p - step);
    hi = std::min(1.0, best_p + step);
  }
  return {best_p, 1.0 - best_p};
}

// Expected value for player 1 by explicit path enumeration: every
// root-to-terminal path contributes its probability product times the
// terminal payoff.
inline double tree_walk_value(const TreeGame& game, const BehaviorProfile& profile, int node_id,
                              double path_prob) {
  const TreeGame::Node& node = game.nodes[node_id];
  if (node.is_terminal()) return path_prob * node.payoff;
  double total = 0.0;
  for (int c = 0; c < node.num_children; ++c) {
    double p = node.is_chance() ? game.chance_prob(node, c)
                                : profile.at(node.player, node.infoset)[c];
    total += tree_walk_value(game, profile, node.first_child + c, path_prob * p);
  }
  return total;
}

inline double tree_walk_value(const TreeGame& game, const BehaviorProfile& profile) {
  return tree_walk_value(game, profile, game.root(), 1.0);
}

// Enumerates every pure behavioral strategy of `player` (one action per
// infoset) and returns the best value achievable against the opponent's
// part of `profile`, in the player's own payoff terms.
inline double pure_best_response_value(const TreeGame& game, const BehaviorProfile& profile,
                                       int player) {
  int num_infosets = game.num_infosets(player);
  std::vector<int> choice(num_infosets, 0);
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(int)> enumerate = [&](int infoset) {
    if (infoset == num_infosets) {
      BehaviorProfile pure = profile;
      for (int i = 0; i < num_infosets; ++i) {
        pure.policy[player][i] =
            SimplexVector::point_mass(game.infoset_num_actions[player][i], choice[i]);
      }
      double value = tree_walk_value(game, pure);
      if (player == 0) value = -value;
      best = std::max(best, value);
      return;
    }
    for (int a = 0; a < game.infoset_num_actions[player][infoset]; ++a) {
      choice[infoset] = a;
      enumerate(infoset + 1);
    }
  };
  enumerate(0);
  return best;
}

inline double pure_strategy_exploitability(const TreeGame& game, const BehaviorProfile& profile) {
  return 0.5 * (pure_best_response_value(game, profile, 0) +
                pure_best_response_value(game, profile, 1));
}

// Objective of the regularized 2x2 game at mixed strategies parameterized
// by the first-action probabilities (p, q).
inline double sccp_objective_2x2(const equilibrate::SccpSpec& spec, double p, double q) {
  const MatrixGame& game = spec.game;
  double u = p * q * game.at(0, 0) + p * (1.0 - q) * game.at(0, 1) +
             (1.0 - p) * q * game.at(1, 0) + (1.0 - p) * (1.0 - q) * game.at(1, 1);
  auto half_sq = [](double a, double b) { return 0.5 * (a * a + b * b); };
  double d0 = half_sq(p - spec.reference.p0[0], (1.0 - p) - spec.reference.p0[1]);
  double d1 = half_sq(q - spec.reference.p1[0], (1.0 - q) - spec.reference.p1[1]);
  return u + spec.mu * d0 - spec.mu * d1;
}

// Saddle point of a 2x2 SCCP with the Euclidean regularizer by nested grid
// search with iterative refinement (player 0 minimizes, player 1 maximizes).
inline Profile grid_saddle_2x2(const equilibrate::SccpSpec& spec) {
  const int kGrid = 100;
  double p_lo = 0.0, p_hi = 1.0, q_lo = 0.0, q_hi = 1.0;
  double best_p = 0.5, best_q = 0.5;
  for (int round = 0; round < 5; ++round) {
    double p_step = (p_hi - p_lo) / kGrid;
    double q_step = (q_hi - q_lo) / kGrid;
    double best_outer = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
      double p = p_lo + i * p_step;
      double worst = -std::numeric_limits<double>::infinity();
      double arg_q = q_lo;
      for (int j = 0; j <= kGrid; ++j) {
        double q = q_lo + j * q_step;
        double value = sccp_objective_2x2(spec, p, q);
        if (value > worst) {
          worst = value;
          arg_q = q;
        }
      }
      if (worst < best_outer) {
        best_outer = worst;
        best_p = p;
        best_q = arg_q;
      }
    }
    p_lo = std::max(0.0, best_p - p_step);
    p_hi = std::min(1.0, best_p + p_step);
    q_lo = std::max(0.0, best_q - q_step);
    q_hi = std::min(1.0, best_q + q_step);
  }
  return Profile{SimplexVector({best_p, 1.0 - best_p}), SimplexVector({best_q, 1.0 - best_q})};
}

// Duality gap of a 2x2 SCCP maximized over a 101x101 grid of deviation
// profiles.
inline double grid_duality_gap_2x2(const equilibrate::SccpSpec& spec, const Profile& profile) {
  std::vector<double> l0 = equilibrate::sccp_loss_gradient(spec, 0, profile);
  std::vector<double> l1 = equilibrate::sccp_loss_gradient(spec, 1, profile);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    double p = i / 100.0;
    double term0 = l0[0] * (profile.p0[0] - p) + l0[1] * (profile.p0[1] - (1.0 - p));
    for (int j = 0; j <= 100; ++j) {
      double q = j / 100.0;
      double term1 = l1[0] * (profile.p1[0] - q) + l1[1] * (profile.p1[1] - (1.0 - q));
      best = std::max(best, 0.5 * (term0 + term1));
    }
  }
  return best;
}

// Max L2 norm of a player's loss gradient over the opponent simplex; the
// maximum of a convex function is attained at a vertex.
inline double gradient_bound(const MatrixGame& game) {
  double bound = 0.0;
  for (int a1 = 0; a1 < game.cols(); ++a1) {
    double sq = 0.0;
    for (int a0 = 0; a0 < game.rows(); ++a0) sq += game.at(a0, a1) * game.at(a0, a1);
    bound = std::max(bound, std::sqrt(sq));
  }
  for (int a0 = 0; a0 < game.rows(); ++a0) {
    double sq = 0.0;
    for (int a1 = 0; a1 < game.cols(); ++a1) sq += game.at(a0, a1) * game.at(a0, a1);
    bound = std::max(bound, std::sqrt(sq));
  }
  return bound;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mean_x) * (x[i] - mean_x);
    sxy += (x[i] - mean_x) * (y[i] - mean_y);
    syy += (y[i] - mean_y) * (y[i] - mean_y);
  }
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double predicted = fit.intercept + fit.slope * x[i];
    ss_res += (y[i] - predicted) * (y[i] - predicted);
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

// All square antisymmetric matrices with zero diagonal and strictly-upper
// entries drawn from {-1, 0, 1}.
inline std::vector<MatrixGame> antisymmetric_games(int size) {
  int free_entries = size * (size - 1) / 2;
  long count = 1;
  for (int i = 0; i < free_entries; ++i) count *= 3;
  std::vector<MatrixGame> games;
  games.reserve(count);
  for (long code = 0; code < count; ++code) {
    std::vector<double> payoff(static_cast<std::size_t>(size) * size, 0.0);
    long rest = code;
    for (int i = 0; i < size; ++i) {
      for (int j = i + 1; j < size; ++j) {
        double entry = static_cast<double>(rest % 3) - 1.0;
        rest /= 3;
        payoff[static_cast<std::size_t>(i) * size + j] = entry;
        payoff[static_cast<std::size_t>(j) * size + i] = -entry;
      }
    }
    games.emplace_back(size, size, std::move(payoff));
  }
  return games;
}

}  // namespace oracles
