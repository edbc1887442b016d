#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "equilibrate/nfg.hpp"

namespace equilibrate {

// Explicit two-player zero-sum extensive-form game with perfect recall.
// Nodes live in a flat arena indexed breadth-first, so every node's children
// occupy a contiguous block and all children have larger indices than their
// parent. Terminals store u_1(z) only; u_0 = -u_1.
class TreeGame {
 public:
  static constexpr int kChance = -1;
  static constexpr int kTerminal = -2;

  struct Node {
    int player = kTerminal;   // 0, 1, kChance or kTerminal
    int infoset = -1;         // decision nodes only
    int first_child = -1;
    int num_children = 0;
    int chance_offset = -1;   // chance nodes: offset into chance_probs
    double payoff = 0.0;      // terminal nodes: u_1(z)

    bool is_terminal() const { return player == kTerminal; }
    bool is_chance() const { return player == kChance; }
    bool is_decision() const { return player == 0 || player == 1; }
  };

  std::vector<Node> nodes;
  std::vector<double> chance_probs;
  // Per player: number of actions per infoset, member nodes per infoset and
  // the number of own infosets on the path above (the sequence depth).
  std::array<std::vector<int>, 2> infoset_num_actions;
  std::array<std::vector<std::vector<int>>, 2> infoset_members;
  std::array<std::vector<int>, 2> infoset_depth;

  int root() const { return 0; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_infosets(int player) const {
    return static_cast<int>(infoset_num_actions[player].size());
  }
  int num_terminals() const {
    int n = 0;
    for (const Node& node : nodes) n += node.is_terminal();
    return n;
  }
  double chance_prob(const Node& node, int action) const {
    return chance_probs[node.chance_offset + action];
  }

  // Derives the infoset tables from the node arena. Called by the builder
  // and by the JSON loader; assumes infoset ids are in range.
  void rebuild_infoset_tables() {
    for (int p = 0; p < 2; ++p) {
      int max_id = -1;
      for (const Node& node : nodes) {
        if (node.player == p) max_id = std::max(max_id, node.infoset);
      }
      infoset_num_actions[p].assign(max_id + 1, 0);
      infoset_members[p].assign(max_id + 1, {});
      infoset_depth[p].assign(max_id + 1, 0);
    }
    for (int id = 0; id < num_nodes(); ++id) {
      const Node& node = nodes[id];
      if (!node.is_decision()) continue;
      infoset_members[node.player][node.infoset].push_back(id);
      infoset_num_actions[node.player][node.infoset] = node.num_children;
    }
    // Sequence depth per infoset, propagated top-down (parents precede
    // children in the arena).
    std::array<std::vector<int>, 2> node_depth;
    node_depth[0].assign(num_nodes(), 0);
    node_depth[1].assign(num_nodes(), 0);
    for (int id = 0; id < num_nodes(); ++id) {
      const Node& node = nodes[id];
      for (int c = 0; c < node.num_children; ++c) {
        int child = node.first_child + c;
        for (int p = 0; p < 2; ++p) {
          node_depth[p][child] = node_depth[p][id] + (node.player == p ? 1 : 0);
        }
      }
      if (node.is_decision()) {
        infoset_depth[node.player][node.infoset] = node_depth[node.player][id];
      }
    }
  }
};

// Assembles a TreeGame from recursively constructed nodes, then linearizes
// them breadth-first so children end up contiguous.
class TreeBuilder {
 public:
  int decision(int player, int infoset, int num_actions) {
    if (player != 0 && player != 1) throw std::invalid_argument("TreeBuilder: bad player");
    if (infoset < 0) throw std::invalid_argument("TreeBuilder: bad infoset id");
    if (num_actions < 1) throw std::invalid_argument("TreeBuilder: decision needs actions");
    protos_.push_back(Proto{player, infoset, 0.0, {}, std::vector<int>(num_actions, -1)});
    return static_cast<int>(protos_.size()) - 1;
  }

  int chance(std::vector<double> probs) {
    if (probs.empty()) throw std::invalid_argument("TreeBuilder: chance needs outcomes");
    std::size_t n = probs.size();
    protos_.push_back(Proto{TreeGame::kChance, -1, 0.0, std::move(probs),
                            std::vector<int>(n, -1)});
    return static_cast<int>(protos_.size()) - 1;
  }

  int terminal(double payoff_p1) {
    protos_.push_back(Proto{TreeGame::kTerminal, -1, payoff_p1, {}, {}});
    return static_cast<int>(protos_.size()) - 1;
  }

  void link(int parent, int action, int child) {
    protos_.at(parent).children.at(action) = child;
  }

  TreeGame build(int root) {
    TreeGame game;
    std::vector<int> new_id(protos_.size(), -1);
    std::queue<int> queue;
    queue.push(root);
    new_id[root] = 0;
    game.nodes.resize(protos_.size());
    int tail = 1;
    while (!queue.empty()) {
      int proto_id = queue.front();
      queue.pop();
      const Proto& proto = protos_[proto_id];
      TreeGame::Node node;
      node.player = proto.player;
      node.infoset = proto.infoset;
      node.payoff = proto.payoff;
      node.num_children = static_cast<int>(proto.children.size());
      node.first_child = proto.children.empty() ? -1 : tail;
      if (proto.player == TreeGame::kChance) {
        node.chance_offset = static_cast<int>(game.chance_probs.size());
        game.chance_probs.insert(game.chance_probs.end(), proto.probs.begin(),
                                 proto.probs.end());
      }
      for (int child : proto.children) {
        if (child < 0) throw std::logic_error("TreeBuilder: unlinked child");
        new_id[child] = tail++;
        queue.push(child);
      }
      game.nodes[new_id[proto_id]] = node;
    }
    if (tail != static_cast<int>(protos_.size())) {
      throw std::logic_error("TreeBuilder: unreachable nodes");
    }
    game.rebuild_infoset_tables();
    return game;
  }

 private:
  struct Proto {
    int player;
    int infoset;
    double payoff;
    std::vector<double> probs;
    std::vector<int> children;
  };
  std::vector<Proto> protos_;
};

// Behavioral strategy: one distribution per infoset per player.
struct BehaviorProfile {
  std::array<std::vector<SimplexVector>, 2> policy;

  static BehaviorProfile uniform(const TreeGame& game) {
    BehaviorProfile profile;
    for (int p = 0; p < 2; ++p) {
      profile.policy[p].reserve(game.num_infosets(p));
      for (int actions : game.infoset_num_actions[p]) {
        profile.policy[p].push_back(SimplexVector::uniform(actions));
      }
    }
    return profile;
  }

  const SimplexVector& at(int player, int infoset) const { return policy[player][infoset]; }

  void check_shape(const TreeGame& game) const {
    for (int p = 0; p < 2; ++p) {
      if (static_cast<int>(policy[p].size()) != game.num_infosets(p)) {
        throw std::invalid_argument("BehaviorProfile: infoset count mismatch");
      }
      for (int i = 0; i < game.num_infosets(p); ++i) {
        if (static_cast<int>(policy[p][i].size()) !=
            game.infoset_num_actions[p][i]) {
          throw std::invalid_argument("BehaviorProfile: action count mismatch");
        }
      }
    }
  }
};

enum class ValidationCode {
  kOk,
  kImperfectRecall,
  kNonSimplexChance,
  kCycle,
  kDanglingInfoset,
  kNonFinitePayoff,
};

inline const char* validation_code_name(ValidationCode code) {
  switch (code) {
    case ValidationCode::kOk: return "OK";
    case ValidationCode::kImperfectRecall: return "IMPERFECT_RECALL";
    case ValidationCode::kNonSimplexChance: return "NON_SIMPLEX_CHANCE";
    case ValidationCode::kCycle: return "CYCLE";
    case ValidationCode::kDanglingInfoset: return "DANGLING_INFOSET";
    case ValidationCode::kNonFinitePayoff: return "NON_FINITE_PAYOFF";
  }
  return "?";
}

struct ValidationResult {
  ValidationCode code = ValidationCode::kOk;
  int node = -1;
  std::string message;

  bool ok() const { return code == ValidationCode::kOk; }
};

// Checks the TreeGame invariants and reports the first violation: tree
// structure, chance distributions on the simplex, contiguous nonempty
// infosets, and perfect recall (members of an infoset share the acting
// player, the action count, and the player's (infoset, action) sequence
// from the root).
inline ValidationResult validate(const TreeGame& game) {
  auto fail = [](ValidationCode code, int node, std::string message) {
    return ValidationResult{code, node, std::move(message)};
  };
  if (game.nodes.empty()) return fail(ValidationCode::kCycle, -1, "empty game");

  const int n = game.num_nodes();
  std::vector<int> ref_count(n, 0);
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.num_children > 0 &&
        (node.first_child < 0 || node.first_child + node.num_children > n)) {
      return fail(ValidationCode::kCycle, id, "child index out of range");
    }
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      if (child <= id) return fail(ValidationCode::kCycle, id, "child does not follow parent");
      ++ref_count[child];
    }
    if (node.is_terminal() && !std::isfinite(node.payoff)) {
      return fail(ValidationCode::kNonFinitePayoff, id, "terminal payoff not finite");
    }
    if (node.is_decision() && node.num_children < 1) {
      return fail(ValidationCode::kCycle, id, "decision node without actions");
    }
    if (node.is_chance()) {
      double sum = 0.0;
      for (int c = 0; c < node.num_children; ++c) {
        double p = game.chance_prob(node, c);
        if (!(p >= 0.0) || !std::isfinite(p)) {
          return fail(ValidationCode::kNonSimplexChance, id, "negative chance probability");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-12) {
        return fail(ValidationCode::kNonSimplexChance, id,
                    "chance probabilities sum to " + std::to_string(sum));
      }
    }
  }
  if (ref_count[0] != 0) return fail(ValidationCode::kCycle, 0, "root is referenced");
  for (int id = 1; id < n; ++id) {
    if (ref_count[id] != 1) {
      return fail(ValidationCode::kCycle, id, "node referenced " +
                      std::to_string(ref_count[id]) + " times");
    }
  }

  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < game.num_infosets(p); ++i) {
      if (game.infoset_members[p][i].empty()) {
        return fail(ValidationCode::kDanglingInfoset, -1,
                    "player " + std::to_string(p) + " infoset " + std::to_string(i) +
                        " has no member nodes");
      }
    }
  }
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.is_decision() &&
        (node.infoset < 0 || node.infoset >= game.num_infosets(node.player))) {
      return fail(ValidationCode::kDanglingInfoset, id, "infoset id out of range");
    }
  }

  // Perfect recall via interned per-player action sequences.
  std::array<std::vector<int>, 2> node_seq;
  node_seq[0].assign(n, 0);
  node_seq[1].assign(n, 0);
  std::array<std::map<std::tuple<int, int, int>, int>, 2> intern;
  std::array<int, 2> next_seq = {1, 1};
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      for (int p = 0; p < 2; ++p) {
        if (node.player == p) {
          auto key = std::make_tuple(node_seq[p][id], node.infoset, c);
          auto [it, inserted] = intern[p].try_emplace(key, next_seq[p]);
          if (inserted) ++next_seq[p];
          node_seq[p][child] = it->second;
        } else {
          node_seq[p][child] = node_seq[p][id];
        }
      }
    }
  }
  for (int p = 0; p < 2; ++p) {
    for (int i = 0; i < game.num_infosets(p); ++i) {
      const std::vector<int>& members = game.infoset_members[p][i];
      const TreeGame::Node& first = game.nodes[members.front()];
      for (int member : members) {
        const TreeGame::Node& node = game.nodes[member];
        if (node.player != p || node.num_children != first.num_children ||
            node_seq[p][member] != node_seq[p][members.front()]) {
          return fail(ValidationCode::kImperfectRecall, member,
                      "player " + std::to_string(p) + " infoset " + std::to_string(i) +
                          " mixes distinct action histories");
        }
      }
    }
  }
  return ValidationResult{};
}

// Per-node reach probability factors pi(h) = pi_0 * pi_1 * pi_c.
struct ReachProbabilities {
  std::vector<double> p0;
  std::vector<double> p1;
  std::vector<double> chance;
};

inline ReachProbabilities reach_probabilities(const TreeGame& game,
                                              const BehaviorProfile& profile) {
  profile.check_shape(game);
  const int n = game.num_nodes();
  ReachProbabilities reach{std::vector<double>(n, 1.0), std::vector<double>(n, 1.0),
                           std::vector<double>(n, 1.0)};
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      reach.p0[child] = reach.p0[id];
      reach.p1[child] = reach.p1[id];
      reach.chance[child] = reach.chance[id];
      if (node.is_chance()) {
        reach.chance[child] *= game.chance_prob(node, c);
      } else if (node.player == 0) {
        reach.p0[child] *= profile.at(0, node.infoset)[c];
      } else {
        reach.p1[child] *= profile.at(1, node.infoset)[c];
      }
    }
  }
  return reach;
}

namespace detail {

// Expected value of every subtree for player 1, computed children-first
// (children always follow their parent in the arena).
inline std::vector<double> subtree_values_p1(const TreeGame& game,
                                             const BehaviorProfile& profile) {
  std::vector<double> value(game.num_nodes(), 0.0);
  for (int id = game.num_nodes() - 1; id >= 0; --id) {
    const TreeGame::Node& node = game.nodes[id];
    if (node.is_terminal()) {
      value[id] = node.payoff;
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
  return value;
}

}  // namespace detail

// Player 1's expected payoff under the full reach-probability product.
inline double expected_value(const TreeGame& game, const BehaviorProfile& profile) {
  profile.check_shape(game);
  return detail::subtree_values_p1(game, profile)[game.root()];
}

// Exact best response for `player` against the opponent's part of `profile`.
// Returns the best-response value in the player's own payoff terms together
// with a maximizing pure behavioral strategy (ties toward the lowest action
// index; the opponent's side of the returned profile is copied unchanged).
inline std::pair<double, BehaviorProfile> best_response_value(const TreeGame& game,
                                                              const BehaviorProfile& profile,
                                                              int player) {
  if (player != 0 && player != 1) throw std::invalid_argument("player must be 0 or 1");
  profile.check_shape(game);
  const int n = game.num_nodes();
  const int opp = 1 - player;
  const double sign = (player == 1) ? 1.0 : -1.0;

  // Opponent-and-chance reach per node.
  std::vector<double> cf_reach(n, 1.0);
  for (int id = 0; id < n; ++id) {
    const TreeGame::Node& node = game.nodes[id];
    for (int c = 0; c < node.num_children; ++c) {
      int child = node.first_child + c;
      double p = 1.0;
      if (node.is_chance()) {
        p = game.chance_prob(node, c);
      } else if (node.player == opp) {
        p = profile.at(opp, node.infoset)[c];
      }
      cf_reach[child] = cf_reach[id] * p;
    }
  }

  const int num_infosets = game.num_infosets(player);
  std::vector<int> br_action(num_infosets, 0);
  int max_depth = 0;
  for (int i = 0; i < num_infosets; ++i) {
    max_depth = std::max(max_depth, game.infoset_depth[player][i]);
  }

  // Process infosets deepest-first. Every subtree value needed at depth d
  // only contains best-response choices at depths > d, which are already
  // fixed, so a full children-first value pass per level suffices.
  std::vector<double> value(n, 0.0);
  auto value_pass = [&]() {
    for (int id = n - 1; id >= 0; --id) {
      const TreeGame::Node& node = game.nodes[id];
      if (node.is_terminal()) {
        value[id] = sign * node.payoff;
        continue;
      }
      if (node.player == player) {
        value[id] = value[node.first_child + br_action[node.infoset]];
        continue;
      }
      double v = 0.0;
      for (int c = 0; c < node.num_children; ++c) {
        double p = node.is_chance() ? game.chance_prob(node, c)
                                    : profile.at(opp, node.infoset)[c];
        v += p * value[node.first_child + c];
      }
      value[id] = v;
    }
  };

  for (int depth = max_depth; depth >= 0; --depth) {
    value_pass();
    for (int i = 0; i < num_infosets; ++i) {
      if (game.infoset_depth[player][i] != depth) continue;
      int actions = game.infoset_num_actions[player][i];
      std::vector<double> q(actions, 0.0);
      for (int member : game.infoset_members[player][i]) {
        const TreeGame::Node& node = game.nodes[member];
        for (int a = 0; a < actions; ++a) {
          q[a] += cf_reach[member] * value[node.first_child + a];
        }
      }
      int best = 0;
      for (int a = 1; a < actions; ++a) {
        if (q[a] > q[best]) best = a;
      }
      br_action[i] = best;
    }
  }
  value_pass();

  BehaviorProfile response = profile;
  for (int i = 0; i < num_infosets; ++i) {
    response.policy[player][i] =
        SimplexVector::point_mass(game.infoset_num_actions[player][i], br_action[i]);
  }
  return {value[game.root()], response};
}

// eps(sigma) = 0.5 * (best-response value of player 0 + player 1), each
// against the other's strategy in `profile`. Zero iff `profile` is an NE.
inline double exploitability_efg(const TreeGame& game, const BehaviorProfile& profile) {
  double br0 = best_response_value(game, profile, 0).first;
  double br1 = best_response_value(game, profile, 1).first;
  return 0.5 * (br0 + br1);
}

// Wraps a matrix game as a depth-2 EFG: one player-0 infoset at the root,
// one player-1 infoset over all second-level nodes.
inline TreeGame embed_matrix_game(const MatrixGame& matrix) {
  TreeBuilder builder;
  int root = builder.decision(0, 0, matrix.rows());
  for (int i = 0; i < matrix.rows(); ++i) {
    int mid = builder.decision(1, 0, matrix.cols());
    builder.link(root, i, mid);
    for (int j = 0; j < matrix.cols(); ++j) {
      builder.link(mid, j, builder.terminal(matrix.at(i, j)));
    }
  }
  return builder.build(root);
}

// Recovers the matrix from a depth-2 embedding; empty when the tree has any
// other shape.
inline std::optional<MatrixGame> try_extract_matrix(const TreeGame& game) {
  const TreeGame::Node& root = game.nodes[game.root()];
  if (root.player != 0 || game.num_infosets(0) != 1 || game.num_infosets(1) != 1) {
    return std::nullopt;
  }
  int rows = root.num_children;
  int cols = -1;
  std::vector<double> payoff;
  for (int i = 0; i < rows; ++i) {
    const TreeGame::Node& mid = game.nodes[root.first_child + i];
    if (mid.player != 1) return std::nullopt;
    if (cols == -1) {
      cols = mid.num_children;
      payoff.reserve(static_cast<std::size_t>(rows) * cols);
    } else if (mid.num_children != cols) {
      return std::nullopt;
    }
    for (int j = 0; j < cols; ++j) {
      const TreeGame::Node& leaf = game.nodes[mid.first_child + j];
      if (!leaf.is_terminal()) return std::nullopt;
      payoff.push_back(leaf.payoff);
    }
  }
  return MatrixGame(rows, cols, std::move(payoff));
}

inline void to_json(nlohmann::json& j, const TreeGame& game) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const TreeGame::Node& node : game.nodes) {
    nlohmann::json entry;
    if (node.is_terminal()) {
      entry["terminal"] = node.payoff;
    } else {
      nlohmann::json children = nlohmann::json::array();
      for (int c = 0; c < node.num_children; ++c) children.push_back(node.first_child + c);
      if (node.is_chance()) {
        nlohmann::json probs = nlohmann::json::array();
        for (int c = 0; c < node.num_children; ++c) probs.push_back(game.chance_prob(node, c));
        entry["chance"] = std::move(probs);
      } else {
        entry["player"] = node.player;
        entry["infoset"] = node.infoset;
        entry["actions"] = node.num_children;
      }
      entry["children"] = std::move(children);
    }
    nodes.push_back(std::move(entry));
  }
  j = nlohmann::json{{"nodes", std::move(nodes)}};
}

inline TreeGame tree_game_from_json(const nlohmann::json& j) {
  TreeGame game;
  const nlohmann::json& nodes = j.at("nodes");
  game.nodes.reserve(nodes.size());
  for (const auto& entry : nodes) {
    TreeGame::Node node;
    if (entry.contains("terminal")) {
      node.player = TreeGame::kTerminal;
      node.payoff = entry.at("terminal").get<double>();
    } else {
      const auto& children = entry.at("children");
      node.num_children = static_cast<int>(children.size());
      node.first_child = node.num_children > 0 ? children.front().get<int>() : -1;
      for (int c = 0; c < node.num_children; ++c) {
        if (children[c].get<int>() != node.first_child + c) {
          throw std::invalid_argument("TreeGame JSON: children must be contiguous");
        }
      }
      if (entry.contains("chance")) {
        node.player = TreeGame::kChance;
        node.chance_offset = static_cast<int>(game.chance_probs.size());
        for (const auto& p : entry.at("chance")) {
          game.chance_probs.push_back(p.get<double>());
        }
        if (static_cast<int>(entry.at("chance").size()) != node.num_children) {
          throw std::invalid_argument("TreeGame JSON: chance arity mismatch");
        }
      } else {
        node.player = entry.at("player").get<int>();
        node.infoset = entry.at("infoset").get<int>();
        if (entry.at("actions").get<int>() != node.num_children) {
          throw std::invalid_argument("TreeGame JSON: action arity mismatch");
        }
      }
    }
    game.nodes.push_back(node);
  }
  game.rebuild_infoset_tables();
  ValidationResult check = validate(game);
  if (!check.ok()) {
    throw std::invalid_argument(std::string("TreeGame JSON: ") +
                                validation_code_name(check.code) + ": " + check.message);
  }
  return game;
}

inline nlohmann::json behavior_profile_to_json(const BehaviorProfile& profile) {
  nlohmann::json j;
  for (int p = 0; p < 2; ++p) {
    nlohmann::json per_infoset = nlohmann::json::object();
    for (std::size_t i = 0; i < profile.policy[p].size(); ++i) {
      per_infoset[std::to_string(i)] = profile.policy[p][i].probs();
    }
    j[p == 0 ? "player0" : "player1"] = std::move(per_infoset);
  }
  return j;
}

}  // namespace equilibrate
