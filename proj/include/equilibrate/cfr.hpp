#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "equilibrate/efg.hpp"
#include "equilibrate/minimizers.hpp"
#include "equilibrate/rt_nfg.hpp"

namespace equilibrate {

// Counterfactual values q(I,a) = sum_{h in I} pi_{-i}(h) * v_i(child(h,a)),
// where v_i is the full-profile expected value of the subtree and pi_{-i}
// includes chance. One forward reach pass and one children-first value pass.
inline std::vector<std::vector<double>> counterfactual_values(const TreeGame& game,
                                                              const BehaviorProfile& profile,
                                                              int player) {
  if (player != 0 && player != 1) throw std::invalid_argument("player must be 0 or 1");
  profile.check_shape(game);
  const int n = game.num_nodes();
  const int opp = 1 - player;
  const double sign = (player == 1) ? 1.0 : -1.0;

  std::vector<double> cf_reach(n, 1.0);
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    for (int c = 0; c < node.num_children; ++c) {
      double p = 1.0;
      if (node.is_chance()) {
        p = game.chance_prob(node, c);
      } else if (node.player == opp) {
        p = profile.at(opp, node.infoset)[c];
      }
      cf_reach[node.first_child + c] = cf_reach[id] * p;
    }
  }
  std::vector<double> value(n, 0.0);
  for (int id = n - 1; id >= 0; --id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.is_terminal()) {
      value[id] = sign * node.payoff;
      continue;
    }
    double v = 0.0;
    for (int c = 0; c < node.num_children; ++c) {
      double p = node.is_chance() ? game.chance_prob(node, c)
                                  : profile.at(node.player, node.infoset)[c];
      v += p * value[node.first_child + c];
    }
    value[id] = v;
  }

  std::vector<std::vector<double>> q(game.num_infosets(player));
  for (int i = 0; i < game.num_infosets(player); ++i) {
    q[i].assign(game.infoset_num_actions[player][i], 0.0);
  }
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.player != player) continue;
    std::vector<double>& qi = q[node.infoset];
    for (int c = 0; c < node.num_children; ++c) {
      qi[c] += cf_reach[id] * value[node.first_child + c];
    }
  }
  return q;
}

// Counterfactual-regret state over all infosets of both players. Regrets
// are initialized to the initial (uniform) strategy, mirroring the
// Q^{0,1} <- sigma^{1,1} warm start of the RT algorithms, so the mu -> 0
// limit of RTCFR+ coincides with CFR+ exactly.
struct CfrState {
  std::array<std::vector<std::vector<double>>, 2> regrets;
  std::array<std::vector<std::vector<double>>, 2> avg_numerator;
  std::array<std::vector<SimplexVector>, 2> current;
  long iteration = 0;
  bool plus = true;
  bool alternating = true;
  bool linear_weighting = true;

  static CfrState make(const TreeGame& game, bool plus = true, bool alternating = true,
                       bool linear_weighting = true) {
    CfrState state;
    state.plus = plus;
    state.alternating = alternating;
    state.linear_weighting = linear_weighting;
    for (int p = 0; p < 2; ++p) {
      int count = game.num_infosets(p);
      state.regrets[p].resize(count);
      state.avg_numerator[p].resize(count);
      state.current[p].reserve(count);
      for (int i = 0; i < count; ++i) {
        int actions = game.infoset_num_actions[p][i];
        SimplexVector uniform = SimplexVector::uniform(actions);
        state.regrets[p][i].assign(uniform.begin(), uniform.end());
        state.avg_numerator[p][i].assign(actions, 0.0);
        state.current[p].push_back(std::move(uniform));
      }
    }
    return state;
  }

  BehaviorProfile current_profile() const { return BehaviorProfile{current}; }

  BehaviorProfile average_profile() const {
    BehaviorProfile profile;
    for (int p = 0; p < 2; ++p) {
      profile.policy[p].reserve(avg_numerator[p].size());
      for (const std::vector<double>& num : avg_numerator[p]) {
        profile.policy[p].push_back(SimplexVector::from_weights(num));
      }
    }
    return profile;
  }
};

namespace detail {

// Own reach to each infoset (identical across members under perfect recall).
inline std::vector<double> own_infoset_reach(const TreeGame& game,
                                             const BehaviorProfile& profile, int player) {
  std::vector<double> node_reach(game.num_nodes(), 1.0);
  for (int id = 0; id < game.num_nodes(); ++id) {
    const TreeGame::Node& node = game.nodes[id];
    for (int c = 0; c < node.num_children; ++c) {
      double p = (node.player == player) ? profile.at(player, node.infoset)[c] : 1.0;
      node_reach[node.first_child + c] = node_reach[id] * p;
    }
  }
  std::vector<double> reach(game.num_infosets(player), 0.0);
  for (int i = 0; i < game.num_infosets(player); ++i) {
    reach[i] = node_reach[game.infoset_members[player][i].front()];
  }
  return reach;
}

inline void local_regret_update(CfrState& state, int player, int infoset,
                                const std::vector<double>& values) {
  std::vector<double>& regret = state.regrets[player][infoset];
  const SimplexVector& sigma = state.current[player][infoset];
  double baseline = 0.0;
  for (std::size_t a = 0; a < values.size(); ++a) baseline += sigma[a] * values[a];
  if (state.plus) {
    for (std::size_t a = 0; a < values.size(); ++a) {
      regret[a] = std::max(regret[a] + (values[a] - baseline), 0.0);
    }
  } else {
    for (std::size_t a = 0; a < values.size(); ++a) regret[a] += values[a] - baseline;
  }
  std::vector<double> pos(values.size());
  for (std::size_t a = 0; a < values.size(); ++a) pos[a] = std::max(regret[a], 0.0);
  state.current[player][infoset] = SimplexVector::from_weights(pos);
}

inline void accumulate_average(CfrState& state, const TreeGame& game, int player, double weight) {
  BehaviorProfile profile{state.current};
  std::vector<double> reach = own_infoset_reach(game, profile, player);
  for (int i = 0; i < game.num_infosets(player); ++i) {
    const SimplexVector& sigma = state.current[player][i];
    std::vector<double>& num = state.avg_numerator[player][i];
    for (std::size_t a = 0; a < num.size(); ++a) num[a] += weight * reach[i] * sigma[a];
  }
}

}  // namespace detail

// One full CFR iteration: counterfactual values, a local RM/RM+ step at
// every infoset, and average accumulation with uniform or linear weights.
inline CfrState cfr_iteration(const TreeGame& game, CfrState state) {
  const long t = state.iteration + 1;
  const double weight = state.linear_weighting ? static_cast<double>(t) : 1.0;
  // The average accumulates each player's freshly updated strategy; with
  // linear weights and alternation this is the fast CFR+ averaging scheme.
  auto update_player = [&](int player) {
    BehaviorProfile profile{state.current};
    std::vector<std::vector<double>> q = counterfactual_values(game, profile, player);
    for (int i = 0; i < game.num_infosets(player); ++i) {
      detail::local_regret_update(state, player, i, q[i]);
    }
    detail::accumulate_average(state, game, player, weight);
  };
  if (state.alternating) {
    update_player(0);
    update_player(1);
  } else {
    BehaviorProfile profile{state.current};
    std::vector<std::vector<double>> q0 = counterfactual_values(game, profile, 0);
    std::vector<std::vector<double>> q1 = counterfactual_values(game, profile, 1);
    for (int i = 0; i < game.num_infosets(0); ++i) detail::local_regret_update(state, 0, i, q0[i]);
    for (int i = 0; i < game.num_infosets(1); ++i) detail::local_regret_update(state, 1, i, q1[i]);
    detail::accumulate_average(state, game, 0, weight);
    detail::accumulate_average(state, game, 1, weight);
  }
  state.iteration = t;
  return state;
}

// Which reach probability weights the propagated reward-transformation
// corrections: the full product of all players and chance, or only the
// updating player's own contribution.
enum class RtReach { kFull, kSelfOnly };

struct RtcfrState {
  CfrState cfr;
  BehaviorProfile reference;
  double mu = 0.1;
  long inner_iterations = 10;  // T
  int sccp_index = 1;
  long inner_t = 0;
  RtReach reach_mode = RtReach::kFull;

  static RtcfrState make(const TreeGame& game, double mu, long inner_iterations,
                         bool alternating = true, RtReach reach_mode = RtReach::kFull) {
    if (mu < 0.0) throw std::invalid_argument("RtcfrState: mu must be nonnegative");
    if (inner_iterations < 1) throw std::invalid_argument("RtcfrState: T must be positive");
    RtcfrState state;
    state.cfr = CfrState::make(game, /*plus=*/true, alternating, /*linear_weighting=*/true);
    state.reference = BehaviorProfile::uniform(game);
    state.mu = mu;
    state.inner_iterations = inner_iterations;
    state.reach_mode = reach_mode;
    return state;
  }
};

namespace detail {

// Transformed counterfactual values of RTCFR+ for one player, computed in a
// single pass. Alongside the plain subtree value v, a correction
//   d(g) = sum over own decision histories h' at or below g of
//          pi(g -> h') * sum_a (ref(h',a) - sigma(h',a))
// propagates up with reach weights, so
//   q(I,a) = sum_h pi_{-i}(h) [ v(child(h,a)) + mu * d(child(h,a)) ]
//            + mu * (ref(I,a) - sigma(I,a)) * sum_h pi_{-i}(h).
inline std::vector<std::vector<double>> rt_counterfactual_values(
    const TreeGame& game, const BehaviorProfile& profile, const BehaviorProfile& reference,
    int player, double mu, RtReach reach_mode) {
  const int n = game.num_nodes();
  const int opp = 1 - player;
  const double sign = (player == 1) ? 1.0 : -1.0;

  std::vector<double> cf_reach(n, 1.0);
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    for (int c = 0; c < node.num_children; ++c) {
      double p = 1.0;
      if (node.is_chance()) {
        p = game.chance_prob(node, c);
      } else if (node.player == opp) {
        p = profile.at(opp, node.infoset)[c];
      }
      cf_reach[node.first_child + c] = cf_reach[id] * p;
    }
  }

  std::vector<double> value(n, 0.0);
  std::vector<double> correction(n, 0.0);
  for (int id = n - 1; id >= 0; --id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.is_terminal()) continue;
    double v = 0.0;
    double d = 0.0;
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      double p = node.is_chance() ? game.chance_prob(node, c)
                                  : profile.at(node.player, node.infoset)[c];
      double child_value = game.nodes[child].is_terminal() ? sign * game.nodes[child].payoff
                                                           : value[child];
      v += p * child_value;
      if (node.player == player || reach_mode == RtReach::kFull) {
        d += p * correction[child];
      } else {
        d += correction[child];
      }
    }
    if (node.player == player) {
      const SimplexVector& sigma = profile.at(player, node.infoset);
      const SimplexVector& ref = reference.at(player, node.infoset);
      for (int c = 0; c < node.num_children; ++c) d += ref[c] - sigma[c];
    }
    value[id] = v;
    correction[id] = d;
  }

  std::vector<std::vector<double>> q(game.num_infosets(player));
  std::vector<double> infoset_reach(game.num_infosets(player), 0.0);
  for (int i = 0; i < game.num_infosets(player); ++i) {
    q[i].assign(game.infoset_num_actions[player][i], 0.0);
  }
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.player != player) continue;
    std::vector<double>& qi = q[node.infoset];
    infoset_reach[node.infoset] += cf_reach[id];
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      double child_value = game.nodes[child].is_terminal() ? sign * game.nodes[child].payoff
                                                           : value[child];
      qi[c] += cf_reach[id] * (child_value + mu * correction[child]);
    }
  }
  for (int i = 0; i < game.num_infosets(player); ++i) {
    const SimplexVector& sigma = profile.at(player, i);
    const SimplexVector& ref = reference.at(player, i);
    for (std::size_t a = 0; a < q[i].size(); ++a) {
      q[i][a] += mu * (ref[a] - sigma[a]) * infoset_reach[i];
    }
  }
  return q;
}

}  // namespace detail

// One RTCFR+ iteration. When the inner counter reaches T the reference
// update of the outer loop fires: sigma^{r,n+1} <- sigma^{T+1,n}, regrets
// carry over, and the SCCP index increments.
inline RtcfrState rtcfr_plus_iteration(const TreeGame& game, RtcfrState state) {
  state.reference.check_shape(game);
  auto update_player = [&](int player) {
    BehaviorProfile profile{state.cfr.current};
    std::vector<std::vector<double>> q = detail::rt_counterfactual_values(
        game, profile, state.reference, player, state.mu, state.reach_mode);
    for (int i = 0; i < game.num_infosets(player); ++i) {
      detail::local_regret_update(state.cfr, player, i, q[i]);
    }
  };
  if (state.cfr.alternating) {
    update_player(0);
    update_player(1);
  } else {
    BehaviorProfile profile{state.cfr.current};
    std::vector<std::vector<double>> q0 = detail::rt_counterfactual_values(
        game, profile, state.reference, 0, state.mu, state.reach_mode);
    std::vector<std::vector<double>> q1 = detail::rt_counterfactual_values(
        game, profile, state.reference, 1, state.mu, state.reach_mode);
    for (int i = 0; i < game.num_infosets(0); ++i) {
      detail::local_regret_update(state.cfr, 0, i, q0[i]);
    }
    for (int i = 0; i < game.num_infosets(1); ++i) {
      detail::local_regret_update(state.cfr, 1, i, q1[i]);
    }
  }
  state.cfr.iteration += 1;
  state.inner_t += 1;
  if (state.inner_t >= state.inner_iterations) {
    state.reference = state.cfr.current_profile();
    state.sccp_index += 1;
    state.inner_t = 0;
  }
  return state;
}

struct RtcfrResult {
  BehaviorProfile final_profile;
  std::vector<ConvergenceRecord> records;
};

// Full RTCFR+ run: N outer SCCPs of T iterations each, exploitability of the
// last iterate recorded on the evaluation cadence.
inline RtcfrResult rtcfr_plus_run(const TreeGame& game, const RtRunConfig& config,
                                  RtReach reach_mode = RtReach::kFull) {
  config.validate();
  detail::WallClock clock;
  const long total = config.inner_iterations * config.outer_iterations;
  if (total == 0) {
    BehaviorProfile uniform = BehaviorProfile::uniform(game);
    double eps = exploitability_efg(game, uniform);
    return RtcfrResult{std::move(uniform),
                       {ConvergenceRecord{0, 0, eps, std::nullopt, clock.elapsed_ns()}}};
  }
  RtcfrState state = RtcfrState::make(game, config.mu, config.inner_iterations,
                                      config.alternating, reach_mode);
  RtcfrResult result;
  const long eval_every = config.effective_eval_every();
  for (long t = 1; t <= total; ++t) {
    int sccp_of_t = static_cast<int>((t - 1) / config.inner_iterations) + 1;
    state = rtcfr_plus_iteration(game, std::move(state));
    if (t % eval_every == 0 || t == total) {
      result.records.push_back(ConvergenceRecord{
          t, sccp_of_t, exploitability_efg(game, state.cfr.current_profile()),
          std::nullopt, clock.elapsed_ns()});
    }
  }
  result.final_profile = state.cfr.current_profile();
  return result;
}

// Per-infoset weights of the dilated Euclidean distance generator.
struct DilatedNorm {
  std::array<std::vector<double>, 2> beta;

  static DilatedNorm ones(const TreeGame& game) {
    DilatedNorm norm;
    norm.beta[0].assign(game.num_infosets(0), 1.0);
    norm.beta[1].assign(game.num_infosets(1), 1.0);
    return norm;
  }

  void validate(const TreeGame& game) const {
    for (int p = 0; p < 2; ++p) {
      if (static_cast<int>(beta[p].size()) != game.num_infosets(p)) {
        throw std::invalid_argument("DilatedNorm: infoset count mismatch");
      }
      for (double b : beta[p]) {
        if (!(b > 0.0)) throw std::invalid_argument("DilatedNorm: weights must be positive");
      }
    }
  }
};

// Sequence-form view of one player's decision space: sequences are
// (infoset, action) pairs, each infoset hangs off its parent sequence, and
// infosets are ordered children-before-parents for bottom-up proximal steps.
struct SequenceIndex {
  struct PlayerIndex {
    std::vector<int> seq_infoset;
    std::vector<int> seq_action;
    std::vector<int> first_seq;          // per infoset: id of its (I, 0) sequence
    std::vector<int> parent_seq;         // per infoset: parent sequence or -1
    std::vector<std::vector<int>> child_infosets;  // per sequence
    std::vector<int> root_infosets;      // infosets with no parent sequence
    std::vector<int> bottom_up;          // infosets, deepest first
    int num_sequences() const { return static_cast<int>(seq_infoset.size()); }
  };
  std::array<PlayerIndex, 2> player;

  static SequenceIndex make(const TreeGame& game) {
    SequenceIndex index;
    for (int p = 0; p < 2; ++p) {
      PlayerIndex& pi = index.player[p];
      int count = game.num_infosets(p);
      pi.first_seq.assign(count, -1);
      pi.parent_seq.assign(count, -2);
      int next = 0;
      for (int i = 0; i < count; ++i) {
        pi.first_seq[i] = next;
        for (int a = 0; a < game.infoset_num_actions[p][i]; ++a) {
          pi.seq_infoset.push_back(i);
          pi.seq_action.push_back(a);
          ++next;
        }
      }
      pi.child_infosets.assign(pi.num_sequences(), {});
      // Walk the tree to find each infoset's parent sequence.
      std::vector<int> last_seq(game.num_nodes(), -1);
      for (int id = 0; id < game.num_nodes(); ++id) {
        const TreeGame::Node& node = game.nodes[id];
        if (node.player == p) {
          int parent = last_seq[id];
          if (pi.parent_seq[node.infoset] == -2) {
            pi.parent_seq[node.infoset] = parent;
            if (parent >= 0) {
              pi.child_infosets[parent].push_back(node.infoset);
            } else {
              pi.root_infosets.push_back(node.infoset);
            }
          }
        }
        for (int c = 0; c < node.num_children; ++c) {
          int child = node.first_child + c;
          last_seq[child] = (node.player == p) ? pi.first_seq[node.infoset] + c : last_seq[id];
        }
      }
      pi.bottom_up.resize(count);
      std::iota(pi.bottom_up.begin(), pi.bottom_up.end(), 0);
      std::stable_sort(pi.bottom_up.begin(), pi.bottom_up.end(), [&](int a, int b) {
        return game.infoset_depth[p][a] > game.infoset_depth[p][b];
      });
    }
    return index;
  }
};

struct DogdaState {
  BehaviorProfile current;
  SequenceIndex index;
  std::array<std::vector<double>, 2> prev_loss;
  bool has_prev = false;

  static DogdaState make(const TreeGame& game) {
    DogdaState state;
    state.current = BehaviorProfile::uniform(game);
    state.index = SequenceIndex::make(game);
    return state;
  }
};

namespace detail {

// Sequence-form loss gradient for one player: g(Ia) = -sum over terminals
// whose last own sequence is (I,a) of the opponent-and-chance reach times
// the player's payoff.
inline std::vector<double> sequence_loss_gradient(const TreeGame& game,
                                                  const BehaviorProfile& profile, int player,
                                                  const SequenceIndex::PlayerIndex& pi) {
  const int opp = 1 - player;
  const double sign = (player == 1) ? 1.0 : -1.0;
  std::vector<double> g(pi.num_sequences(), 0.0);
  std::vector<double> reach(game.num_nodes(), 1.0);
  std::vector<int> last_seq(game.num_nodes(), -1);
  for (int id = 0; id < game.num_nodes(); ++id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.is_terminal()) {
      if (last_seq[id] >= 0) g[last_seq[id]] -= reach[id] * sign * node.payoff;
      continue;
    }
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      double p = 1.0;
      if (node.is_chance()) {
        p = game.chance_prob(node, c);
      } else if (node.player == opp) {
        p = profile.at(opp, node.infoset)[c];
      }
      reach[child] = reach[id] * p;
      last_seq[child] = (node.player == player) ? pi.first_seq[node.infoset] + c : last_seq[id];
    }
  }
  return g;
}

// Solves argmin_x <c, x> + phi(x) over the treeplex, where phi is the
// dilated Euclidean square norm: one simplex projection per infoset,
// bottom-up, each infoset's optimal local value folded into its parent
// sequence's cost.
inline void dilated_prox(const TreeGame& game, const SequenceIndex::PlayerIndex& pi, int player,
                         const std::vector<double>& beta, std::vector<double> cost,
                         std::vector<SimplexVector>& out) {
  std::vector<double> infoset_value(game.num_infosets(player), 0.0);
  for (int i : pi.bottom_up) {
    int actions = game.infoset_num_actions[player][i];
    int base = pi.first_seq[i];
    std::vector<double> local(actions);
    for (int a = 0; a < actions; ++a) {
      double c = cost[base + a];
      for (int child : pi.child_infosets[base + a]) c += infoset_value[child];
      local[a] = c;
    }
    std::vector<double> target(actions);
    for (int a = 0; a < actions; ++a) target[a] = -local[a] / beta[i];
    SimplexVector b = simplex_project(target);
    double value = 0.0;
    double sq = 0.0;
    for (int a = 0; a < actions; ++a) {
      value += local[a] * b[a];
      sq += b[a] * b[a];
    }
    infoset_value[i] = value + 0.5 * beta[i] * sq;
    out[i] = std::move(b);
  }
}

}  // namespace detail

// One optimistic mirror-descent step over the sequence-form polytope with
// the dilated Euclidean distance generator; both players step
// simultaneously from the current profile.
inline DogdaState dogda_iteration(const TreeGame& game, DogdaState state,
                                  const DilatedNorm& norm, double eta) {
  norm.validate(game);
  if (eta < 0.0) throw std::invalid_argument("dogda_iteration: eta must be nonnegative");
  state.current.check_shape(game);
  std::array<std::vector<double>, 2> loss;
  for (int p = 0; p < 2; ++p) {
    loss[p] = detail::sequence_loss_gradient(game, state.current, p, state.index.player[p]);
  }
  BehaviorProfile next = state.current;
  for (int p = 0; p < 2; ++p) {
    const SequenceIndex::PlayerIndex& pi = state.index.player[p];
    // cost = eta * (2 g_t - g_{t-1}) - grad phi(x_t); the prox then reads
    // argmin <cost, x> + phi(x).
    std::vector<double> cost(pi.num_sequences());
    for (int s = 0; s < pi.num_sequences(); ++s) {
      double eff = state.has_prev ? 2.0 * loss[p][s] - state.prev_loss[p][s] : loss[p][s];
      cost[s] = eta * eff;
    }
    std::vector<double> child_psi(game.num_infosets(p), 0.0);
    for (int i = 0; i < game.num_infosets(p); ++i) {
      const SimplexVector& b = state.current.policy[p][i];
      double sq = 0.0;
      for (double v : b) sq += v * v;
      child_psi[i] = norm.beta[p][i] * 0.5 * sq;
    }
    for (int s = 0; s < pi.num_sequences(); ++s) {
      double grad = norm.beta[p][pi.seq_infoset[s]] *
                    state.current.policy[p][pi.seq_infoset[s]][pi.seq_action[s]];
      for (int child : pi.child_infosets[s]) grad -= child_psi[child];
      cost[s] -= grad;
    }
    detail::dilated_prox(game, pi, p, norm.beta[p], std::move(cost), next.policy[p]);
  }
  state.current = std::move(next);
  state.prev_loss = std::move(loss);
  state.has_prev = true;
  return state;
}

struct CfrRunResult {
  BehaviorProfile profile;  // the designated profile (average for CFR/CFR+)
  std::vector<ConvergenceRecord> records;
};

// Self-play harness for CFR / CFR+ over a TreeGame; records the
// exploitability of the average profile on the evaluation cadence.
inline CfrRunResult cfr_run(const TreeGame& game, long iterations, bool plus, bool alternating,
                            bool linear_weighting, long eval_every = 0) {
  if (iterations < 0) throw std::invalid_argument("cfr_run: negative iterations");
  detail::WallClock clock;
  CfrState state = CfrState::make(game, plus, alternating, linear_weighting);
  CfrRunResult result;
  if (eval_every <= 0) eval_every = std::max<long>(1, iterations / 1000);
  if (iterations == 0) {
    BehaviorProfile uniform = BehaviorProfile::uniform(game);
    result.records.push_back(ConvergenceRecord{
        0, 0, exploitability_efg(game, uniform), std::nullopt, clock.elapsed_ns()});
    result.profile = std::move(uniform);
    return result;
  }
  for (long t = 1; t <= iterations; ++t) {
    state = cfr_iteration(game, std::move(state));
    if (t % eval_every == 0 || t == iterations) {
      result.records.push_back(ConvergenceRecord{
          t, 0, exploitability_efg(game, state.average_profile()), std::nullopt,
          clock.elapsed_ns()});
    }
  }
  result.profile = state.average_profile();
  return result;
}

// Self-play harness for DOGDA; records the last iterate.
inline CfrRunResult dogda_run(const TreeGame& game, long iterations, double eta,
                              const DilatedNorm* norm = nullptr, long eval_every = 0) {
  if (iterations < 0) throw std::invalid_argument("dogda_run: negative iterations");
  detail::WallClock clock;
  DilatedNorm ones = DilatedNorm::ones(game);
  const DilatedNorm& use = norm != nullptr ? *norm : ones;
  DogdaState state = DogdaState::make(game);
  CfrRunResult result;
  if (eval_every <= 0) eval_every = std::max<long>(1, iterations / 1000);
  if (iterations == 0) {
    result.records.push_back(ConvergenceRecord{
        0, 0, exploitability_efg(game, state.current), std::nullopt, clock.elapsed_ns()});
    result.profile = state.current;
    return result;
  }
  for (long t = 1; t <= iterations; ++t) {
    state = dogda_iteration(game, std::move(state), use, eta);
    if (t % eval_every == 0 || t == iterations) {
      result.records.push_back(ConvergenceRecord{
          t, 0, exploitability_efg(game, state.current), std::nullopt, clock.elapsed_ns()});
    }
  }
  result.profile = state.current;
  return result;
}

}  // namespace equilibrate
