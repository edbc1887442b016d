#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "equilibrate/efg.hpp"
#include "equilibrate/nfg.hpp"

namespace equilibrate {

// xoshiro256** (Blackman & Vigna), state seeded from a splitmix64 stream of
// the 64-bit seed. This is the library's one PRNG: the same seed always
// yields the same byte-for-byte game.
class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      // splitmix64 step
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_;
};

// Payoff entries i.i.d. uniform on [-1, 1], filled row-major.
inline MatrixGame random_nfg(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("random_nfg: empty dimension");
  Xoshiro256StarStar rng(seed);
  std::vector<double> payoff(static_cast<std::size_t>(rows) * cols);
  for (double& v : payoff) v = rng.uniform(-1.0, 1.0);
  return MatrixGame(rows, cols, std::move(payoff));
}

// A point sampled uniformly from the probability simplex (normalized
// exponentials).
inline SimplexVector random_simplex(std::size_t n, Xoshiro256StarStar& rng) {
  std::vector<double> w(n);
  for (double& v : w) v = -std::log(1.0 - rng.uniform01());
  return SimplexVector::from_weights(w);
}

namespace detail {

// Interns infoset labels into dense per-player ids during construction.
class InfosetInterner {
 public:
  int id(int player, const std::string& key) {
    auto [it, inserted] = map_[player].try_emplace(key, next_[player]);
    if (inserted) ++next_[player];
    return it->second;
  }

 private:
  std::array<std::map<std::string, int>, 2> map_;
  std::array<int, 2> next_ = {0, 0};
};

}  // namespace detail

// Kuhn poker: 3 cards, one dealt to each player without replacement, ante 1,
// bet size 1, one betting round (check/bet then call/fold, with bet after a
// check allowed). Payoffs in {+-1, +-2}.
inline TreeGame kuhn_poker() {
  TreeBuilder builder;
  detail::InfosetInterner infosets;

  // 6 ordered deals, probability 1/6 each.
  std::vector<std::pair<int, int>> deals;
  for (int c0 = 0; c0 < 3; ++c0) {
    for (int c1 = 0; c1 < 3; ++c1) {
      if (c0 != c1) deals.emplace_back(c0, c1);
    }
  }
  int root = builder.chance(std::vector<double>(deals.size(), 1.0 / 6.0));

  for (std::size_t d = 0; d < deals.size(); ++d) {
    auto [c0, c1] = deals[d];
    double showdown = (c1 > c0) ? 1.0 : -1.0;

    // Actions: 0 = check/fold, 1 = bet/call.
    int p0_first = builder.decision(0, infosets.id(0, std::to_string(c0) + "|"), 2);
    builder.link(root, static_cast<int>(d), p0_first);

    int p1_after_check = builder.decision(1, infosets.id(1, std::to_string(c1) + "|c"), 2);
    builder.link(p0_first, 0, p1_after_check);
    builder.link(p1_after_check, 0, builder.terminal(showdown));  // check-check
    int p0_facing_bet = builder.decision(0, infosets.id(0, std::to_string(c0) + "|cb"), 2);
    builder.link(p1_after_check, 1, p0_facing_bet);
    builder.link(p0_facing_bet, 0, builder.terminal(1.0));             // P0 folds
    builder.link(p0_facing_bet, 1, builder.terminal(2.0 * showdown));  // call

    int p1_facing_bet = builder.decision(1, infosets.id(1, std::to_string(c1) + "|b"), 2);
    builder.link(p0_first, 1, p1_facing_bet);
    builder.link(p1_facing_bet, 0, builder.terminal(-1.0));            // P1 folds
    builder.link(p1_facing_bet, 1, builder.terminal(2.0 * showdown));  // call
  }
  return builder.build(root);
}

namespace detail {

struct LeducRules {
  static constexpr int kAnte = 1;
  static constexpr int kMaxRaises = 2;  // the opening bet counts as a raise
  static constexpr std::array<int, 2> kBetSize = {2, 4};
};

inline int leduc_rank(int card) { return card / 2; }  // 3 ranks x 2 suits

struct LeducBuilder {
  TreeBuilder builder;
  InfosetInterner infosets;
  std::array<int, 2> cards;

  std::string infoset_key(int player, int board, const std::string& history) const {
    std::string board_part = board >= 0 ? std::to_string(leduc_rank(board)) : "-";
    return std::to_string(leduc_rank(cards[player])) + "|" + board_part + "|" + history;
  }

  double showdown_payoff(int board, int pot_each) const {
    int r0 = leduc_rank(cards[0]);
    int r1 = leduc_rank(cards[1]);
    int rb = leduc_rank(board);
    int winner;
    if (r0 == rb) {
      winner = 0;
    } else if (r1 == rb) {
      winner = 1;
    } else if (r0 != r1) {
      winner = (r0 > r1) ? 0 : 1;
    } else {
      return 0.0;
    }
    return (winner == 1) ? pot_each : -pot_each;
  }

  // One betting round. contrib = chips already committed by each player;
  // actor to move; raises = bets/raises so far this round. Returns the node
  // id of the betting state.
  int betting_node(int round, int board, std::string history, std::array<int, 2> contrib,
                   int actor, int raises) {
    int bet = LeducRules::kBetSize[round];
    bool facing_bet = contrib[actor] < contrib[1 - actor];
    int to_call = contrib[1 - actor] - contrib[actor];

    std::vector<std::pair<char, int>> actions;  // (symbol, delta chips)
    if (!facing_bet) {
      actions.emplace_back('c', 0);  // check
      if (raises < LeducRules::kMaxRaises) actions.emplace_back('b', bet);
    } else {
      actions.emplace_back('f', 0);
      actions.emplace_back('k', to_call);  // call
      if (raises < LeducRules::kMaxRaises) actions.emplace_back('r', to_call + bet);
    }

    int node = builder.decision(actor, infosets.id(actor, infoset_key(actor, board, history)),
                                static_cast<int>(actions.size()));
    for (std::size_t a = 0; a < actions.size(); ++a) {
      auto [symbol, delta] = actions[a];
      std::array<int, 2> next_contrib = contrib;
      next_contrib[actor] += delta;
      std::string next_history = history + symbol;
      int child;
      switch (symbol) {
        case 'f':
          // The folder forfeits their contribution.
          child = builder.terminal(actor == 1 ? -next_contrib[1] : next_contrib[0]);
          break;
        case 'c':
          if (history.empty() || history.back() == '/') {
            child = betting_node(round, board, next_history, next_contrib, 1 - actor, raises);
          } else {
            child = round_over(round, board, next_history, next_contrib);
          }
          break;
        case 'k':
          child = round_over(round, board, next_history, next_contrib);
          break;
        default:  // 'b' or 'r'
          child = betting_node(round, board, next_history, next_contrib, 1 - actor, raises + 1);
          break;
      }
      builder.link(node, static_cast<int>(a), child);
    }
    return node;
  }

  int round_over(int round, int board, const std::string& history, std::array<int, 2> contrib) {
    if (round == 0) {
      // Deal the board card from the four remaining.
      std::vector<int> remaining;
      for (int c = 0; c < 6; ++c) {
        if (c != cards[0] && c != cards[1]) remaining.push_back(c);
      }
      int chance = builder.chance(std::vector<double>(remaining.size(), 0.25));
      for (std::size_t b = 0; b < remaining.size(); ++b) {
        builder.link(chance, static_cast<int>(b),
                     betting_node(1, remaining[b], history + "/", contrib, 0, 0));
      }
      return chance;
    }
    return builder.terminal(showdown_payoff(board, contrib[0]));
  }
};

}  // namespace detail

// Leduc poker: 6 cards (3 ranks, 2 suits), ante 1, two betting rounds with
// bet sizes 2 then 4 and at most 2 bets/raises per round, one board card
// dealt between the rounds. A board pairing beats rank order; equal ranks
// split. Infosets are keyed on rank (suits are strategically symmetric).
inline TreeGame leduc_poker() {
  detail::LeducBuilder leduc;
  std::vector<std::pair<int, int>> deals;
  for (int c0 = 0; c0 < 6; ++c0) {
    for (int c1 = 0; c1 < 6; ++c1) {
      if (c0 != c1) deals.emplace_back(c0, c1);
    }
  }
  int root = leduc.builder.chance(std::vector<double>(deals.size(), 1.0 / 30.0));
  for (std::size_t d = 0; d < deals.size(); ++d) {
    leduc.cards = {deals[d].first, deals[d].second};
    leduc.builder.link(root, static_cast<int>(d),
                       leduc.betting_node(0, -1, "", {detail::LeducRules::kAnte,
                                                      detail::LeducRules::kAnte}, 0, 0));
  }
  return leduc.builder.build(root);
}

namespace detail {

struct GoofspielBuilder {
  TreeBuilder builder;
  InfosetInterner infosets;
  int n = 0;

  static std::vector<int> cards_of(unsigned mask) {
    std::vector<int> cards;
    for (int c = 0; mask >> c; ++c) {
      if (mask & (1u << c)) cards.push_back(c);
    }
    return cards;
  }

  // round is 0-based; the prize in round k is n - k. Bids become public
  // after each round, so both players' infosets are keyed by the history of
  // completed rounds; player 1 bids without seeing player 0's pending bid.
  int round_node(int round, unsigned mask0, unsigned mask1, double points0, double points1,
                 const std::string& history) {
    std::vector<int> cards0 = cards_of(mask0);
    std::vector<int> cards1 = cards_of(mask1);
    int prize = n - round;
    if (cards0.size() == 1) {
      // Forced last round.
      auto [np0, np1] = resolve(points0, points1, cards0[0], cards1[0], prize);
      return builder.terminal(np1 - np0);
    }
    int p0 = builder.decision(0, infosets.id(0, history),
                              static_cast<int>(cards0.size()));
    for (std::size_t i = 0; i < cards0.size(); ++i) {
      int bid0 = cards0[i];
      int p1 = builder.decision(1, infosets.id(1, history),
                                static_cast<int>(cards1.size()));
      builder.link(p0, static_cast<int>(i), p1);
      for (std::size_t j = 0; j < cards1.size(); ++j) {
        int bid1 = cards1[j];
        auto [np0, np1] = resolve(points0, points1, bid0, bid1, prize);
        std::string next_history =
            history + std::to_string(bid0 + 1) + "," + std::to_string(bid1 + 1) + ";";
        builder.link(p1, static_cast<int>(j),
                     round_node(round + 1, mask0 & ~(1u << bid0), mask1 & ~(1u << bid1),
                                np0, np1, next_history));
      }
    }
    return p0;
  }

  static std::pair<double, double> resolve(double points0, double points1, int bid0, int bid1,
                                           int prize) {
    if (bid0 > bid1) return {points0 + prize, points1};
    if (bid1 > bid0) return {points0, points1 + prize};
    return {points0 + prize / 2.0, points1 + prize / 2.0};
  }
};

}  // namespace detail

// Goofspiel(n): n bid cards (values 1..n) per player, n prize cards revealed
// in fixed descending order (n first). Sealed simultaneous bids, higher bid
// wins the prize, ties split it; bids become public after each round and the
// final round is forced. Payoff is player 1's point differential.
inline TreeGame goofspiel(int n) {
  if (n < 3 || n > 5) throw std::invalid_argument("goofspiel: n must be in [3, 5]");
  detail::GoofspielBuilder goof;
  goof.n = n;
  unsigned full = (1u << n) - 1;
  int root = goof.round_node(0, full, full, 0.0, 0.0, "");
  return goof.builder.build(root);
}

namespace detail {

struct LiarsDiceBuilder {
  TreeBuilder builder;
  InfosetInterner infosets;
  int sides = 0;
  std::array<int, 2> dice;  // face values 1..sides

  int num_bids() const { return 2 * sides; }
  int bid_quantity(int bid) const { return bid / sides + 1; }
  int bid_face(int bid) const { return bid % sides + 1; }

  bool die_matches(int die, int face) const { return die == face || die == sides; }

  // Caller wins +1 when the standing bid is false. The highest face is wild.
  double call_payoff(int caller, int bid) const {
    int count = die_matches(dice[0], bid_face(bid)) + die_matches(dice[1], bid_face(bid));
    bool bid_true = count >= bid_quantity(bid);
    double caller_value = bid_true ? -1.0 : 1.0;
    return caller == 1 ? caller_value : -caller_value;
  }

  int bid_node(int actor, int last_bid, const std::string& history) {
    std::string key = std::to_string(dice[actor]) + "|" + history;
    int raise_count = num_bids() - (last_bid + 1);
    bool can_call = last_bid >= 0;
    int node = builder.decision(actor, infosets.id(actor, key),
                                raise_count + (can_call ? 1 : 0));
    for (int i = 0; i < raise_count; ++i) {
      int bid = last_bid + 1 + i;
      std::string next_history = history + std::to_string(bid) + ",";
      builder.link(node, i, bid_node(1 - actor, bid, next_history));
    }
    if (can_call) {
      builder.link(node, raise_count, builder.terminal(call_payoff(actor, last_bid)));
    }
    return node;
  }
};

}  // namespace detail

// Liar's dice: one die per player with `sides` faces, the highest face wild.
// Chance deals both dice; players alternate strictly increasing bids over
// (quantity, face) — ordered by quantity then face — or call "liar", which
// ends the game with the caller winning +-1 by the truth of the standing
// bid.
inline TreeGame liars_dice(int sides) {
  if (sides < 2 || sides > 6) throw std::invalid_argument("liars_dice: sides must be in [2, 6]");
  detail::LiarsDiceBuilder liar;
  liar.sides = sides;
  int outcomes = sides * sides;
  int root = liar.builder.chance(std::vector<double>(outcomes, 1.0 / outcomes));
  for (int d0 = 1; d0 <= sides; ++d0) {
    for (int d1 = 1; d1 <= sides; ++d1) {
      liar.dice = {d0, d1};
      liar.builder.link(root, (d0 - 1) * sides + (d1 - 1), liar.bid_node(0, -1, ""));
    }
  }
  return liar.builder.build(root);
}

enum class GameKind { kRandomNfg, kKuhn, kLeduc, kGoofspiel, kLiarsDice };

struct GameSpec {
  GameKind kind = GameKind::kKuhn;
  int rows = 5;
  int cols = 5;
  std::uint64_t seed = 0;
  int cards = 4;  // goofspiel
  int sides = 4;  // liars dice

  void validate() const {
    switch (kind) {
      case GameKind::kRandomNfg:
        if (rows < 1 || cols < 1) throw std::invalid_argument("GameSpec: dimensions must be positive");
        break;
      case GameKind::kGoofspiel:
        if (cards < 3 || cards > 5) throw std::invalid_argument("GameSpec: goofspiel cards in [3, 5]");
        break;
      case GameKind::kLiarsDice:
        if (sides < 2 || sides > 6) throw std::invalid_argument("GameSpec: liars dice sides in [2, 6]");
        break;
      default:
        break;
    }
  }

  std::string name() const {
    switch (kind) {
      case GameKind::kRandomNfg:
        return "random_nfg:" + std::to_string(rows) + "x" + std::to_string(cols) + ":" +
               std::to_string(seed);
      case GameKind::kKuhn: return "kuhn";
      case GameKind::kLeduc: return "leduc";
      case GameKind::kGoofspiel: return "goofspiel:" + std::to_string(cards);
      case GameKind::kLiarsDice: return "liars_dice:" + std::to_string(sides);
    }
    return "?";
  }

  bool is_matrix() const { return kind == GameKind::kRandomNfg; }

  MatrixGame build_matrix() const {
    validate();
    if (kind != GameKind::kRandomNfg) throw std::logic_error("GameSpec: not a matrix game");
    return random_nfg(rows, cols, seed);
  }

  TreeGame build_tree() const {
    validate();
    switch (kind) {
      case GameKind::kRandomNfg: return embed_matrix_game(build_matrix());
      case GameKind::kKuhn: return kuhn_poker();
      case GameKind::kLeduc: return leduc_poker();
      case GameKind::kGoofspiel: return goofspiel(cards);
      case GameKind::kLiarsDice: return liars_dice(sides);
    }
    throw std::logic_error("GameSpec: unknown kind");
  }

  // Accepts "kuhn", "leduc", "goofspiel:4", "liars_dice:4" and
  // "random_nfg:RxC:SEED".
  static GameSpec parse(const std::string& text);
};

inline GameSpec GameSpec::parse(const std::string& text) {
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = s.find(sep, start);
      parts.push_back(s.substr(start, pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return parts;
  };
  auto parse_number = [&text](const std::string& token) -> long long {
    try {
      std::size_t used = 0;
      long long value = std::stoll(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return value;
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed game spec: " + text);
    }
  };
  std::vector<std::string> parts = split(text, ':');
  GameSpec spec;
  const std::string& head = parts[0];
  if (head == "kuhn") {
    spec.kind = GameKind::kKuhn;
  } else if (head == "leduc") {
    spec.kind = GameKind::kLeduc;
  } else if (head == "goofspiel") {
    spec.kind = GameKind::kGoofspiel;
    if (parts.size() > 1) spec.cards = static_cast<int>(parse_number(parts[1]));
  } else if (head == "liars_dice") {
    spec.kind = GameKind::kLiarsDice;
    if (parts.size() > 1) spec.sides = static_cast<int>(parse_number(parts[1]));
  } else if (head == "random_nfg") {
    spec.kind = GameKind::kRandomNfg;
    if (parts.size() > 1) {
      std::vector<std::string> dims = split(parts[1], 'x');
      if (dims.size() != 2) throw std::invalid_argument("malformed game spec: " + text);
      spec.rows = static_cast<int>(parse_number(dims[0]));
      spec.cols = static_cast<int>(parse_number(dims[1]));
    }
    if (parts.size() > 2) spec.seed = static_cast<std::uint64_t>(parse_number(parts[2]));
  } else {
    throw std::invalid_argument("unknown game kind: " + head);
  }
  spec.validate();
  return spec;
}

inline void to_json(nlohmann::json& j, const GameSpec& spec) {
  switch (spec.kind) {
    case GameKind::kRandomNfg:
      j = {{"kind", "random_nfg"}, {"rows", spec.rows}, {"cols", spec.cols}, {"seed", spec.seed}};
      return;
    case GameKind::kKuhn: j = {{"kind", "kuhn"}}; return;
    case GameKind::kLeduc: j = {{"kind", "leduc"}}; return;
    case GameKind::kGoofspiel: j = {{"kind", "goofspiel"}, {"cards", spec.cards}}; return;
    case GameKind::kLiarsDice: j = {{"kind", "liars_dice"}, {"sides", spec.sides}}; return;
  }
}

inline GameSpec game_spec_from_json(const nlohmann::json& j) {
  GameSpec spec;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "random_nfg") {
    spec.kind = GameKind::kRandomNfg;
    spec.rows = j.value("rows", 5);
    spec.cols = j.value("cols", 5);
    spec.seed = j.value("seed", std::uint64_t{0});
  } else if (kind == "kuhn") {
    spec.kind = GameKind::kKuhn;
  } else if (kind == "leduc") {
    spec.kind = GameKind::kLeduc;
  } else if (kind == "goofspiel") {
    spec.kind = GameKind::kGoofspiel;
    spec.cards = j.value("cards", 4);
  } else if (kind == "liars_dice") {
    spec.kind = GameKind::kLiarsDice;
    spec.sides = j.value("sides", 4);
  } else {
    throw std::invalid_argument("unknown game kind: " + kind);
  }
  spec.validate();
  return spec;
}

}  // namespace equilibrate
