#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "equilibrate/games.hpp"
#include "equilibrate/harness.hpp"
#include "equilibrate/rt_nfg.hpp"
#include "oracles.hpp"

using namespace equilibrate;

namespace {

MatrixGame matching_pennies() { return MatrixGame(2, 2, {1, -1, -1, 1}); }

}  // namespace

TEST_CASE("sccp loss gradient") {
  MatrixGame mp = matching_pennies();
  Profile uniform = mp.uniform_profile();

  // At the reference the Euclidean regularizer gradient vanishes.
  SccpSpec at_ref{mp, uniform, 1.0, Regularizer::kEuclideanBregman, 1};
  std::vector<double> transformed = sccp_loss_gradient(at_ref, 0, uniform);
  std::vector<double> plain = loss_gradient(mp, 0, uniform.p1);
  CHECK(transformed[0] == doctest::Approx(plain[0]));
  CHECK(transformed[1] == doctest::Approx(plain[1]));

  // mu = 0 reduces to the plain gradient for every regularizer kind.
  Profile interior{SimplexVector({0.6, 0.4}), SimplexVector({0.3, 0.7})};
  for (Regularizer kind : {Regularizer::kEuclideanBregman, Regularizer::kKl,
                           Regularizer::kReverseEntropy}) {
    SccpSpec degenerate{mp, uniform, 0.0, kind, 1};
    std::vector<double> g = sccp_loss_gradient(degenerate, 1, interior);
    std::vector<double> base = loss_gradient(mp, 1, interior.p0);
    CHECK(g[0] == doctest::Approx(base[0]));
    CHECK(g[1] == doctest::Approx(base[1]));
  }

  // Pure sigma_0 = (1, 0) against the uniform reference, mu = 1.
  Profile pure{SimplexVector::point_mass(2, 0), SimplexVector::uniform(2)};
  SccpSpec spec{mp, uniform, 1.0, Regularizer::kEuclideanBregman, 1};
  std::vector<double> g = sccp_loss_gradient(spec, 0, pure);
  std::vector<double> base = loss_gradient(mp, 0, pure.p1);
  CHECK(g[0] == doctest::Approx(base[0] + 0.5));
  CHECK(g[1] == doctest::Approx(base[1] - 0.5));

  // Entropy regularizers reject boundary strategies.
  SccpSpec kl{mp, uniform, 1.0, Regularizer::kKl, 1};
  CHECK_THROWS_AS(sccp_loss_gradient(kl, 0, pure), std::domain_error);
  SccpSpec reverse{mp, uniform, 1.0, Regularizer::kReverseEntropy, 1};
  CHECK_THROWS_AS(sccp_loss_gradient(reverse, 0, pure), std::domain_error);

  SccpSpec bad{mp, uniform, -1.0, Regularizer::kEuclideanBregman, 1};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sccp duality gap") {
  MatrixGame mp = matching_pennies();
  Profile ne = mp.uniform_profile();

  // Reference = profile = NE of the base game: stationary, gap zero. The
  // grid oracle agrees.
  for (double mu : {0.1, 1.0, 5.0}) {
    SccpSpec spec{mp, ne, mu, Regularizer::kEuclideanBregman, 1};
    CHECK(sccp_duality_gap(spec, ne) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(oracles::grid_duality_gap_2x2(spec, ne) <= 1e-9);
  }

  // mu = 0: the gap equals exploitability exactly.
  Xoshiro256StarStar rng(41);
  MatrixGame game = random_nfg(4, 3, 11);
  for (int trial = 0; trial < 20; ++trial) {
    Profile profile{random_simplex(4, rng), random_simplex(3, rng)};
    SccpSpec spec{game, game.uniform_profile(), 0.0, Regularizer::kEuclideanBregman, 1};
    CHECK(sccp_duality_gap(spec, profile) ==
          doctest::Approx(exploitability(game, profile)).epsilon(1e-12));
  }

  // Gap decreases monotonically (1e-9 slack) along alternating RM+ iterates
  // on a random 3x3 SCCP with mu = 1 after iteration 100.
  MatrixGame g3 = random_nfg(3, 3, 17);
  Xoshiro256StarStar ref_rng(5);
  SccpSpec spec{g3, Profile{random_simplex(3, ref_rng), random_simplex(3, ref_rng)}, 1.0,
                Regularizer::kEuclideanBregman, 1};
  Profile current = g3.uniform_profile();
  RegretState q0 = RegretState::from_strategy(current.p0);
  RegretState q1 = RegretState::from_strategy(current.p1);
  double previous_gap = 0.0;
  for (int t = 1; t <= 2000; ++t) {
    for (int player = 0; player < 2; ++player) {
      std::vector<double> value = sccp_loss_gradient(spec, player, current);
      for (double& v : value) v = -v;
      if (player == 0) {
        auto [s, sigma] = rm_plus_step(q0, value, current.p0);
        q0 = std::move(s);
        current.p0 = std::move(sigma);
      } else {
        auto [s, sigma] = rm_plus_step(q1, value, current.p1);
        q1 = std::move(s);
        current.p1 = std::move(sigma);
      }
    }
    double gap = sccp_duality_gap(spec, current);
    if (t > 100) CHECK(gap <= previous_gap + 1e-9);
    previous_gap = gap;
    if (gap == 0.0) break;
  }
  CHECK(previous_gap <= 1e-10);
}

TEST_CASE("rtrm_plus_run on matching pennies") {
  MatrixGame mp = matching_pennies();

  RtRunConfig empty{0.5, 10, 0, true};
  RtNfgResult none = rtrm_plus_run(mp, empty);
  CHECK(none.final_profile.p0[0] == doctest::Approx(0.5));
  CHECK(none.final_profile.p1[1] == doctest::Approx(0.5));
  CHECK(none.records.size() == 1);

  RtRunConfig config{0.5, 10, 200, true};
  RtNfgResult result = rtrm_plus_run(mp, config);
  CHECK(exploitability(mp, result.final_profile) <= 1e-6);
  CHECK(result.records.back().total_iteration == 2000);
}

TEST_CASE("rtrm_plus_run on the seed-0 5x5 benchmark beats averaged RM+") {
  MatrixGame game = random_nfg(5, 5, 0);
  RtRunConfig config{0.1, 50, 40, true};
  RtNfgResult rt = rtrm_plus_run(game, config);
  double rt_eps = exploitability(game, rt.final_profile);
  CHECK(rt_eps <= 1e-6);

  MinimizerConfig rm_plus{MinimizerKind::kRmPlus, 0.1, false};
  BaselineResult averaged = baseline_selfplay_run(game, rm_plus, 2000, true, Averaging::kLinear);
  double rm_eps = exploitability(game, averaged.profile);
  CHECK(rm_eps >= 100.0 * rt_eps);
}

TEST_CASE("lemma 1 and theorem 1 protocols") {
  // Under the gap-threshold protocol the nash distance of the reference
  // sequence decreases strictly until below 1e-9, and the exploitability of
  // the references vanishes.
  struct Case {
    MatrixGame game;
    Profile start;
  };
  std::vector<Case> cases;
  cases.push_back({matching_pennies(),
                   Profile{SimplexVector({0.85, 0.15}), SimplexVector({0.2, 0.8})}});
  cases.push_back({MatrixGame(3, 3, {0, 1, -1, -1, 0, 1, 1, -1, 0}),
                   Profile{SimplexVector({0.7, 0.2, 0.1}), SimplexVector({0.1, 0.3, 0.6})}});
  for (const Case& c : cases) {
    std::vector<Profile> ne = {c.game.uniform_profile()};
    RtRunConfig config{0.5, 0, 200, true};
    config.gap_threshold = 1e-10;
    RtNfgResult result = rtrm_plus_run(c.game, config, &c.start, &c.start);
    double previous = std::numeric_limits<double>::infinity();
    bool reached = false;
    for (const Profile& reference : result.references) {
      double distance = nash_distance(reference, ne);
      if (!reached) {
        CHECK(distance < previous);
        previous = distance;
        reached = distance < 1e-9;
      }
    }
    CHECK(reached);
    CHECK(exploitability(c.game, result.references.back()) <= 1e-6);
  }
}

TEST_CASE("exploitability bound diagnostic on 2x2 games") {
  // eps(sigma^{t,n}) <= eps(sigma^{*,n}) + mu * L * |sigma^{*,n} - sigma^{t,n}|_2
  // with the SCCP saddle from the grid oracle. The mu * L constant is only
  // sound for mu >= 1 (the deviation term does not shrink with mu), so the
  // diagnostic runs at mu = 1.
  std::vector<MatrixGame> games = {matching_pennies(), random_nfg(2, 2, 21)};
  for (const MatrixGame& game : games) {
    double bound_l = oracles::gradient_bound(game);
    double mu = 1.0;
    Profile reference{SimplexVector({0.7, 0.3}), SimplexVector({0.25, 0.75})};
    Profile current = reference;
    RegretState q0 = RegretState::from_strategy(current.p0);
    RegretState q1 = RegretState::from_strategy(current.p1);
    for (int n = 1; n <= 4; ++n) {
      SccpSpec spec{game, reference, mu, Regularizer::kEuclideanBregman, n};
      Profile saddle = oracles::grid_saddle_2x2(spec);
      double saddle_eps = exploitability(game, saddle);
      for (int t = 1; t <= 40; ++t) {
        for (int player = 0; player < 2; ++player) {
          std::vector<double> value = sccp_loss_gradient(spec, player, current);
          for (double& v : value) v = -v;
          if (player == 0) {
            auto [s, sigma] = rm_plus_step(q0, value, current.p0);
            q0 = std::move(s);
            current.p0 = std::move(sigma);
          } else {
            auto [s, sigma] = rm_plus_step(q1, value, current.p1);
            q1 = std::move(s);
            current.p1 = std::move(sigma);
          }
        }
        double distance =
            std::sqrt(2.0 * nash_distance(current, std::vector<Profile>{saddle}));
        CHECK(exploitability(game, current) <= saddle_eps + mu * bound_l * distance + 1e-6);
      }
      reference = current;
    }
  }
}

TEST_CASE("rt_mwu_run") {
  MatrixGame mp = matching_pennies();

  // mu = 0, N = 1: plain MWU self-play, equal to the baseline harness.
  RtRunConfig degenerate{0.0, 500, 1, false};
  RtNfgResult plain = rt_mwu_run(mp, degenerate, Regularizer::kKl, 0.25, false);
  MinimizerConfig mwu{MinimizerKind::kMwu, 0.25, false};
  BaselineResult baseline = baseline_selfplay_run(mp, mwu, 500, false, Averaging::kNone);
  for (int a = 0; a < 2; ++a) {
    CHECK(plain.final_profile.p0[a] == doctest::Approx(baseline.profile.p0[a]).epsilon(1e-12));
    CHECK(plain.final_profile.p1[a] == doctest::Approx(baseline.profile.p1[a]).epsilon(1e-12));
  }
  // Classical behavior: the averaged strategy improves.
  BaselineResult averaged = baseline_selfplay_run(mp, mwu, 2000, false, Averaging::kUniform);
  CHECK(exploitability(mp, averaged.profile) <= 0.05);

  // R-NaD configuration: KL regularizer, alternating updates.
  RtRunConfig rnad{0.05, 100, 20, true};
  RtNfgResult result = rt_mwu_run(mp, rnad, Regularizer::kKl, 0.5, false);
  CHECK(exploitability(mp, result.final_profile) <= 1e-3);

  // OR-NaD drives matching pennies down as well.
  RtNfgResult optimistic = rt_mwu_run(mp, rnad, Regularizer::kKl, 0.5, true);
  CHECK(exploitability(mp, optimistic.final_profile) <= 1e-3);

  // Reverse-entropy regularizer option.
  RtNfgResult reverse = rt_mwu_run(mp, rnad, Regularizer::kReverseEntropy, 0.5, false);
  CHECK(exploitability(mp, reverse.final_profile) <= 1e-2);

  // Fixed reference (N = 1, large T): iterates reach the regularized-game
  // saddle point, gap -> 0.
  MatrixGame game = random_nfg(3, 3, 9);
  RtRunConfig fixed{0.5, 30000, 1, true};
  RtNfgResult converged = rt_mwu_run(game, fixed, Regularizer::kKl, 0.5, false);
  SccpSpec spec{game, game.uniform_profile(), 0.5, Regularizer::kKl, 1};
  CHECK(sccp_duality_gap(spec, converged.final_profile) <= 1e-8);
}

TEST_CASE("baseline self-play runs") {
  MatrixGame mp = matching_pennies();

  // RM+ with alternation and linear averaging.
  MinimizerConfig rm_plus{MinimizerKind::kRmPlus, 0.1, false};
  BaselineResult rm = baseline_selfplay_run(mp, rm_plus, 10000, true, Averaging::kLinear);
  CHECK(exploitability(mp, rm.profile) <= 1e-3);
  CHECK_FALSE(rm.averaging_flagged);

  // OGDA last iterate.
  MinimizerConfig ogda{MinimizerKind::kGda, 0.1, true};
  BaselineResult og = baseline_selfplay_run(mp, ogda, 10000, false, Averaging::kNone);
  CHECK(exploitability(mp, og.profile) <= 1e-6);

  // Averaging a last-iterate algorithm is permitted but flagged.
  BaselineResult flagged = baseline_selfplay_run(mp, ogda, 100, false, Averaging::kUniform);
  CHECK(flagged.averaging_flagged);

  // Zero iterations: the uniform profile and its exploitability.
  BaselineResult none = baseline_selfplay_run(mp, rm_plus, 0, true, Averaging::kNone);
  CHECK(none.records.size() == 1);
  CHECK(none.records[0].exploitability ==
        doctest::Approx(exploitability(mp, mp.uniform_profile())));

  CHECK_THROWS_AS(baseline_selfplay_run(mp, MinimizerConfig{MinimizerKind::kMwu, -1.0, false},
                                        10, true, Averaging::kNone),
                  std::invalid_argument);
}

TEST_CASE("record streams are deterministic and serialize with 17 digits") {
  MatrixGame game = random_nfg(4, 4, 2);
  RtRunConfig config{0.2, 10, 30, true};
  RtNfgResult a = rtrm_plus_run(game, config);
  RtNfgResult b = rtrm_plus_run(game, config);
  std::string csv_a = records_to_csv(a.records);
  std::string csv_b = records_to_csv(b.records);
  CHECK(csv_a == csv_b);
  CHECK(csv_a.rfind("iteration,sccp_index,exploitability,duality_gap,wall_time_ns\n", 0) == 0);

  // 1/3 must round-trip: 17 significant digits.
  std::vector<ConvergenceRecord> records = {{1, 1, 1.0 / 3.0, 2.0 / 3.0, 42}};
  std::string csv = records_to_csv(records);
  CHECK(csv.find("0.33333333333333331") != std::string::npos);
  CHECK(csv.find("0.66666666666666663") != std::string::npos);
  CHECK(csv.find(",42") == std::string::npos);  // wall time zeroed by default
  CHECK(records_to_csv(records, true).find(",42") != std::string::npos);
}
