#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "equilibrate/minimizers.hpp"
#include "equilibrate/nfg.hpp"

namespace equilibrate {

// Regularizer phi(sigma, sigma_ref) of the regularized game. The Euclidean
// Bregman kind extends the domain to the whole simplex; the entropy kinds
// require interior points.
enum class Regularizer { kEuclideanBregman, kKl, kReverseEntropy };

inline const char* regularizer_name(Regularizer r) {
  switch (r) {
    case Regularizer::kEuclideanBregman: return "euclidean";
    case Regularizer::kKl: return "kl";
    case Regularizer::kReverseEntropy: return "reverse_entropy";
  }
  return "?";
}

// One strongly convex-concave problem: the base game plus a mu-weighted
// regularizer anchored at the reference profile.
struct SccpSpec {
  MatrixGame game;
  Profile reference;
  double mu = 0.1;
  Regularizer regularizer = Regularizer::kEuclideanBregman;
  int index = 1;

  void validate() const {
    if (mu <= 0.0) throw std::invalid_argument("SccpSpec: mu must be positive");
    check_profile_shape(game, reference);
    if (regularizer != Regularizer::kEuclideanBregman &&
        (!reference.p0.strictly_positive() || !reference.p1.strictly_positive())) {
      throw std::invalid_argument("SccpSpec: entropy regularizers need an interior reference");
    }
  }
};

namespace detail {

// mu * grad_sigma phi(sigma, ref), added to the base loss gradient.
inline void add_regularizer_gradient(Regularizer kind, double mu, const SimplexVector& sigma,
                                     const SimplexVector& ref, std::vector<double>& out) {
  if (mu == 0.0) return;
  switch (kind) {
    case Regularizer::kEuclideanBregman:
      for (std::size_t a = 0; a < out.size(); ++a) out[a] += mu * (sigma[a] - ref[a]);
      return;
    case Regularizer::kKl:
      for (std::size_t a = 0; a < out.size(); ++a) {
        if (sigma[a] <= 0.0 || ref[a] <= 0.0) {
          throw std::domain_error("KL regularizer gradient at simplex boundary");
        }
        out[a] += mu * (std::log(sigma[a]) - std::log(ref[a]) + 1.0);
      }
      return;
    case Regularizer::kReverseEntropy:
      for (std::size_t a = 0; a < out.size(); ++a) {
        if (sigma[a] <= 0.0) {
          throw std::domain_error("reverse-entropy regularizer gradient at simplex boundary");
        }
        out[a] += mu * (-ref[a] / sigma[a]);
      }
      return;
  }
}

}  // namespace detail

// Transformed loss gradient of the SCCP: g_i + mu * grad phi(sigma_i, ref_i).
inline std::vector<double> sccp_loss_gradient(const SccpSpec& spec, int player,
                                              const Profile& profile) {
  check_profile_shape(spec.game, profile);
  const SimplexVector& opponent = (player == 0) ? profile.p1 : profile.p0;
  const SimplexVector& self = (player == 0) ? profile.p0 : profile.p1;
  const SimplexVector& ref = (player == 0) ? spec.reference.p0 : spec.reference.p1;
  std::vector<double> loss = loss_gradient(spec.game, player, opponent);
  detail::add_regularizer_gradient(spec.regularizer, spec.mu, self, ref, loss);
  return loss;
}

// Duality gap of the SCCP at a profile; the per-player inner maximum is
// attained at a pure strategy because the objective is linear in the
// deviation. Nonnegative, zero exactly at the SCCP saddle point; for mu = 0
// it coincides with exploitability.
inline double sccp_duality_gap(const SccpSpec& spec, const Profile& profile) {
  double total = 0.0;
  for (int player = 0; player < 2; ++player) {
    std::vector<double> loss = (spec.mu == 0.0)
        ? loss_gradient(spec.game, player, player == 0 ? profile.p1 : profile.p0)
        : sccp_loss_gradient(spec, player, profile);
    const SimplexVector& self = (player == 0) ? profile.p0 : profile.p1;
    double inner = 0.0;
    double best = loss[0];
    for (std::size_t a = 0; a < loss.size(); ++a) {
      inner += self[a] * loss[a];
      best = std::min(best, loss[a]);
    }
    // Each player's term is nonnegative in exact arithmetic; clamp rounding
    // noise.
    total += std::max(inner - best, 0.0);
  }
  return 0.5 * total;
}

struct RtRunConfig {
  double mu = 0.1;
  long inner_iterations = 10;  // T
  long outer_iterations = 100;  // N
  bool alternating = true;
  long eval_every = 0;  // 0: max(1, T*N/1000)
  std::uint64_t seed = 0;
  // Gap-threshold mode: run each inner solve until the duality gap falls
  // below the threshold (capped at max_inner_per_sccp) instead of a fixed T.
  std::optional<double> gap_threshold;
  long max_inner_per_sccp = 200000;

  void validate() const {
    if (inner_iterations < 0 || outer_iterations < 0) {
      throw std::invalid_argument("RtRunConfig: negative iteration count");
    }
    // mu = 0 is allowed and degenerates to plain self-play.
    if (mu < 0.0) throw std::invalid_argument("RtRunConfig: mu must be nonnegative");
    if (gap_threshold && *gap_threshold <= 0.0) {
      throw std::invalid_argument("RtRunConfig: gap threshold must be positive");
    }
  }

  long effective_eval_every() const {
    if (eval_every > 0) return eval_every;
    return std::max<long>(1, inner_iterations * outer_iterations / 1000);
  }
};

struct ConvergenceRecord {
  long total_iteration = 0;
  int sccp_index = 0;
  double exploitability = 0.0;
  std::optional<double> duality_gap;
  std::uint64_t wall_time_ns = 0;
};

struct RtNfgResult {
  Profile final_profile;
  std::vector<ConvergenceRecord> records;
  // Reference profiles captured at every SCCP boundary (sigma^{r,1} first).
  std::vector<Profile> references;
};

namespace detail {

class WallClock {
 public:
  WallClock() : start_(std::chrono::steady_clock::now()) {}
  std::uint64_t elapsed_ns() const {
    return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(
        std::chrono::steady_clock::now() - start_).count());
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Value vector of the transformed game for the RM family:
// q(a) = sum_b sigma_opp(b) u_i(a, b) + mu*(ref(a) - sigma(a)).
inline std::vector<double> rt_value_vector(const MatrixGame& game, int player, double mu,
                                           const Profile& profile, const Profile& reference) {
  const SimplexVector& opponent = (player == 0) ? profile.p1 : profile.p0;
  const SimplexVector& self = (player == 0) ? profile.p0 : profile.p1;
  const SimplexVector& ref = (player == 0) ? reference.p0 : reference.p1;
  std::vector<double> q = loss_gradient(game, player, opponent);
  for (std::size_t a = 0; a < q.size(); ++a) {
    q[a] = -q[a] + mu * (ref[a] - self[a]);
  }
  return q;
}

}  // namespace detail

// RTRM+ on a normal-form game: N outer SCCPs, each solved by T inner RM+
// steps on the transformed value vector, with the warm start
//   sigma^{r,n+1} <- sigma^{T+1,n},  Q^{0,n+1} <- Q^{T,n},
//   sigma^{1,n+1} <- sigma^{T+1,n}
// at every SCCP boundary. Returns the final last-iterate profile. The
// initial strategy sigma^{1,1} and reference sigma^{r,1} default to uniform.
inline RtNfgResult rtrm_plus_run(const MatrixGame& game, const RtRunConfig& config,
                                 const Profile* initial_strategy = nullptr,
                                 const Profile* initial_reference = nullptr) {
  config.validate();
  detail::WallClock clock;
  Profile current = initial_strategy != nullptr ? *initial_strategy : game.uniform_profile();
  Profile reference = initial_reference != nullptr ? *initial_reference : current;
  check_profile_shape(game, current);
  check_profile_shape(game, reference);
  RegretState q0 = RegretState::from_strategy(current.p0);
  RegretState q1 = RegretState::from_strategy(current.p1);

  RtNfgResult result{current, {}, {reference}};
  const long eval_every = config.effective_eval_every();
  const long total_planned = config.inner_iterations * config.outer_iterations;
  long total_t = 0;

  auto record = [&](int sccp_index) {
    SccpSpec spec{game, reference, config.mu, Regularizer::kEuclideanBregman, sccp_index};
    result.records.push_back(ConvergenceRecord{
        total_t, sccp_index, exploitability(game, current),
        sccp_duality_gap(spec, current), clock.elapsed_ns()});
  };

  if (config.outer_iterations == 0 ||
      (!config.gap_threshold && config.inner_iterations == 0)) {
    record(0);
    result.final_profile = current;
    return result;
  }

  for (int n = 1; n <= config.outer_iterations; ++n) {
    SccpSpec spec{game, reference, config.mu, Regularizer::kEuclideanBregman, n};
    long inner_budget = config.gap_threshold ? config.max_inner_per_sccp
                                             : config.inner_iterations;
    for (long t = 1; t <= inner_budget; ++t) {
      if (config.alternating) {
        auto [s0, sig0] = rm_plus_step(
            q0, detail::rt_value_vector(game, 0, config.mu, current, reference), current.p0);
        q0 = std::move(s0);
        current.p0 = std::move(sig0);
        auto [s1, sig1] = rm_plus_step(
            q1, detail::rt_value_vector(game, 1, config.mu, current, reference), current.p1);
        q1 = std::move(s1);
        current.p1 = std::move(sig1);
      } else {
        std::vector<double> v0 = detail::rt_value_vector(game, 0, config.mu, current, reference);
        std::vector<double> v1 = detail::rt_value_vector(game, 1, config.mu, current, reference);
        auto [s0, sig0] = rm_plus_step(q0, v0, current.p0);
        auto [s1, sig1] = rm_plus_step(q1, v1, current.p1);
        q0 = std::move(s0);
        q1 = std::move(s1);
        current.p0 = std::move(sig0);
        current.p1 = std::move(sig1);
      }
      ++total_t;
      if (total_t % eval_every == 0 || (!config.gap_threshold && total_t == total_planned)) {
        record(n);
      }
      if (config.gap_threshold && sccp_duality_gap(spec, current) <= *config.gap_threshold) {
        break;
      }
    }
    reference = current;
    result.references.push_back(reference);
  }
  if (result.records.empty() || result.records.back().total_iteration != total_t) {
    record(config.outer_iterations);
  }
  result.final_profile = current;
  return result;
}

// RT-MWU: the same outer/inner loop and reference schedule, with the inner
// step a (optionally optimistic) multiplicative-weights update on the
// transformed loss. With the KL regularizer this is the R-NaD baseline;
// optimistic = true gives OR-NaD.
inline RtNfgResult rt_mwu_run(const MatrixGame& game, const RtRunConfig& config,
                              Regularizer regularizer, double learning_rate, bool optimistic,
                              const Profile* initial_strategy = nullptr,
                              const Profile* initial_reference = nullptr) {
  config.validate();
  if (learning_rate <= 0.0) throw std::invalid_argument("rt_mwu_run: learning rate must be positive");
  detail::WallClock clock;
  Profile current = initial_strategy != nullptr ? *initial_strategy : game.uniform_profile();
  Profile reference = initial_reference != nullptr ? *initial_reference : current;
  check_profile_shape(game, current);
  check_profile_shape(game, reference);
  std::optional<std::vector<double>> prev0;
  std::optional<std::vector<double>> prev1;

  RtNfgResult result{current, {}, {reference}};
  const long eval_every = config.effective_eval_every();
  const long total_planned = config.inner_iterations * config.outer_iterations;
  long total_t = 0;

  auto record = [&](int sccp_index) {
    SccpSpec spec{game, reference, config.mu, regularizer, sccp_index};
    result.records.push_back(ConvergenceRecord{
        total_t, sccp_index, exploitability(game, current),
        sccp_duality_gap(spec, current), clock.elapsed_ns()});
  };

  if (config.outer_iterations == 0 ||
      (!config.gap_threshold && config.inner_iterations == 0)) {
    record(0);
    result.final_profile = current;
    return result;
  }

  for (int n = 1; n <= config.outer_iterations; ++n) {
    SccpSpec spec{game, reference, config.mu, regularizer, n};
    long inner_budget = config.gap_threshold ? config.max_inner_per_sccp
                                             : config.inner_iterations;
    for (long t = 1; t <= inner_budget; ++t) {
      if (config.alternating) {
        std::vector<double> l0 = sccp_loss_gradient(spec, 0, current);
        current.p0 = mwu_step(current.p0, l0, learning_rate,
                              optimistic && prev0 ? &*prev0 : nullptr);
        prev0 = std::move(l0);
        std::vector<double> l1 = sccp_loss_gradient(spec, 1, current);
        current.p1 = mwu_step(current.p1, l1, learning_rate,
                              optimistic && prev1 ? &*prev1 : nullptr);
        prev1 = std::move(l1);
      } else {
        std::vector<double> l0 = sccp_loss_gradient(spec, 0, current);
        std::vector<double> l1 = sccp_loss_gradient(spec, 1, current);
        current.p0 = mwu_step(current.p0, l0, learning_rate,
                              optimistic && prev0 ? &*prev0 : nullptr);
        current.p1 = mwu_step(current.p1, l1, learning_rate,
                              optimistic && prev1 ? &*prev1 : nullptr);
        prev0 = std::move(l0);
        prev1 = std::move(l1);
      }
      ++total_t;
      if (total_t % eval_every == 0 || (!config.gap_threshold && total_t == total_planned)) {
        record(n);
      }
      if (config.gap_threshold && sccp_duality_gap(spec, current) <= *config.gap_threshold) {
        break;
      }
    }
    reference = current;
    result.references.push_back(reference);
  }
  if (result.records.empty() || result.records.back().total_iteration != total_t) {
    record(config.outer_iterations);
  }
  result.final_profile = current;
  return result;
}

enum class Averaging { kNone, kUniform, kLinear };

struct BaselineResult {
  // The designated profile: running average under averaging, else the last
  // iterate.
  Profile profile;
  std::vector<ConvergenceRecord> records;
  // Set when averaging was requested for an algorithm normally evaluated by
  // its last iterate (permitted, but surfaced to the caller).
  bool averaging_flagged = false;
};

// Plain self-play for RM / RM+ / MWU / GDA and their optimistic variants,
// with optional uniform or linear strategy averaging.
inline BaselineResult baseline_selfplay_run(const MatrixGame& game, const MinimizerConfig& algo,
                                            long iterations, bool alternating,
                                            Averaging averaging, long eval_every = 0) {
  algo.validate();
  if (iterations < 0) throw std::invalid_argument("baseline_selfplay_run: negative iterations");
  detail::WallClock clock;
  Profile current = game.uniform_profile();
  RegretState q0 = RegretState::from_strategy(current.p0);
  RegretState q1 = RegretState::from_strategy(current.p1);
  std::vector<double> avg0(game.rows(), 0.0);
  std::vector<double> avg1(game.cols(), 0.0);

  const bool rm_family = algo.kind == MinimizerKind::kRm || algo.kind == MinimizerKind::kRmPlus;
  BaselineResult result{current, {}, averaging != Averaging::kNone && !rm_family};
  if (eval_every <= 0) eval_every = std::max<long>(1, iterations / 1000);

  auto designated = [&]() -> Profile {
    if (averaging == Averaging::kNone) return current;
    return Profile{SimplexVector::from_weights(avg0), SimplexVector::from_weights(avg1)};
  };
  auto record = [&](long t) {
    result.records.push_back(ConvergenceRecord{
        t, 0, exploitability(game, designated()), std::nullopt, clock.elapsed_ns()});
  };

  if (iterations == 0) {
    record(0);
    result.profile = designated();
    return result;
  }

  auto step_player = [&](int player, const Profile& seen) {
    const SimplexVector& self = (player == 0) ? current.p0 : current.p1;
    const SimplexVector& opp = (player == 0) ? seen.p1 : seen.p0;
    RegretState& q = (player == 0) ? q0 : q1;
    std::vector<double> loss = loss_gradient(game, player, opp);
    SimplexVector next = self;
    switch (algo.kind) {
      case MinimizerKind::kRm:
      case MinimizerKind::kRmPlus: {
        std::vector<double> value(loss.size());
        for (std::size_t a = 0; a < loss.size(); ++a) value[a] = -loss[a];
        auto [s, sigma] = (algo.kind == MinimizerKind::kRmPlus) ? rm_plus_step(q, value, self)
                                                                : rm_step(q, value, self);
        q = std::move(s);
        next = std::move(sigma);
        break;
      }
      case MinimizerKind::kMwu:
        next = mwu_step(self, loss, algo.learning_rate,
                        algo.optimistic && q.last_loss ? &*q.last_loss : nullptr);
        q.last_loss = std::move(loss);
        q.iteration += 1;
        break;
      case MinimizerKind::kGda:
        next = gda_step(self, loss, algo.learning_rate,
                        algo.optimistic && q.last_loss ? &*q.last_loss : nullptr);
        q.last_loss = std::move(loss);
        q.iteration += 1;
        break;
    }
    if (player == 0) {
      current.p0 = std::move(next);
    } else {
      current.p1 = std::move(next);
    }
  };

  for (long t = 1; t <= iterations; ++t) {
    double w = (averaging == Averaging::kLinear) ? static_cast<double>(t) : 1.0;
    for (std::size_t a = 0; a < avg0.size(); ++a) avg0[a] += w * current.p0[a];
    for (std::size_t a = 0; a < avg1.size(); ++a) avg1[a] += w * current.p1[a];
    if (alternating) {
      step_player(0, current);
      step_player(1, current);
    } else {
      Profile seen = current;
      step_player(0, seen);
      step_player(1, seen);
    }
    if (t % eval_every == 0 || t == iterations) record(t);
  }
  result.profile = designated();
  return result;
}

}  // namespace equilibrate
