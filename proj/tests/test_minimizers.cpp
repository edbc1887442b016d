#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "equilibrate/games.hpp"
#include "equilibrate/minimizers.hpp"
#include "oracles.hpp"

using namespace equilibrate;

TEST_CASE("rm_plus_step") {
  RegretState state = RegretState::zeros(2);
  auto [next, sigma] = rm_plus_step(state, std::vector<double>{1.0, -1.0},
                                    SimplexVector::uniform(2));
  CHECK(next.cum_regret[0] == doctest::Approx(1.0));
  CHECK(next.cum_regret[1] == doctest::Approx(0.0));
  CHECK(sigma[0] == doctest::Approx(1.0));

  // Constant value vectors produce zero regret.
  RegretState q = RegretState::zeros(3);
  q.cum_regret = {0.2, 0.5, 0.0};
  auto [unchanged, sigma2] = rm_plus_step(q, std::vector<double>{3.0, 3.0, 3.0},
                                          SimplexVector::uniform(3));
  CHECK(unchanged.cum_regret == q.cum_regret);
  CHECK(sigma2[0] == doctest::Approx(0.2 / 0.7));

  RegretState q3 = RegretState::zeros(2);
  q3.cum_regret = {0.3, 0.0};
  auto [next3, sigma3] = rm_plus_step(q3, std::vector<double>{-1.0, -2.0},
                                      SimplexVector::point_mass(2, 0));
  CHECK(next3.cum_regret[0] == doctest::Approx(0.3));
  CHECK(next3.cum_regret[1] == doctest::Approx(0.0));
  CHECK(sigma3[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(
      rm_plus_step(state, std::vector<double>{std::nan(""), 0.0}, SimplexVector::uniform(2)),
      std::invalid_argument);
}

TEST_CASE("rm_step keeps signed regrets") {
  RegretState state = RegretState::zeros(2);
  auto [next, sigma] = rm_step(state, std::vector<double>{2.0, 2.0}, SimplexVector::uniform(2));
  CHECK(next.cum_regret == std::vector<double>{0.0, 0.0});
  CHECK(sigma[0] == doctest::Approx(0.5));

  RegretState negative = RegretState::zeros(2);
  negative.cum_regret = {-2.0, 1.0};
  auto [next2, sigma2] = rm_step(negative, std::vector<double>{0.0, 0.0},
                                 SimplexVector::uniform(2));
  CHECK(next2.cum_regret == std::vector<double>{-2.0, 1.0});
  CHECK(sigma2[0] == doctest::Approx(0.0));
  CHECK(sigma2[1] == doctest::Approx(1.0));
}

TEST_CASE("rm and rm_plus diverge in state, not strategy, on the flooring step") {
  // RM from Q = [-1, 0] with regret increment [2, 0] lands on Q' = [1, 0];
  // RM+ from the floored state [0, 0] lands on Q' = [2, 0]. Same strategy.
  SimplexVector sigma = SimplexVector::point_mass(2, 1);
  std::vector<double> value = {2.0, 0.0};  // r = value - <sigma, value> = [2, 0]

  RegretState rm_state = RegretState::zeros(2);
  rm_state.cum_regret = {-1.0, 0.0};
  auto [rm_next, rm_sigma] = rm_step(rm_state, value, sigma);
  CHECK(rm_next.cum_regret == std::vector<double>{1.0, 0.0});
  CHECK(rm_sigma[0] == doctest::Approx(1.0));

  RegretState plus_state = RegretState::zeros(2);
  auto [plus_next, plus_sigma] = rm_plus_step(plus_state, value, sigma);
  CHECK(plus_next.cum_regret == std::vector<double>{2.0, 0.0});
  CHECK(plus_sigma[0] == doctest::Approx(1.0));
}

TEST_CASE("mwu_step") {
  SimplexVector uniform = SimplexVector::uniform(2);

  SimplexVector same = mwu_step(uniform, std::vector<double>{5.0, 5.0}, 1.0);
  CHECK(same[0] == doctest::Approx(0.5).epsilon(1e-15));

  SimplexVector skewed = mwu_step(uniform, std::vector<double>{0.0, std::log(4.0)}, 0.5);
  CHECK(skewed[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(skewed[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  SimplexVector tiny = mwu_step(uniform, std::vector<double>{0.3, -0.7}, 1e-9);
  CHECK(std::abs(tiny[0] - 0.5) <= 1e-8);

  CHECK_THROWS_AS(mwu_step(SimplexVector::point_mass(2, 0), std::vector<double>{0.0, 0.0}, 1.0),
                  std::domain_error);
}

TEST_CASE("gda_step") {
  SimplexVector start = SimplexVector::point_mass(2, 0);
  SimplexVector projected = gda_step(start, std::vector<double>{1.0, 0.0}, 1.0);
  CHECK(projected[0] == doctest::Approx(0.5));
  CHECK(projected[1] == doctest::Approx(0.5));

  SimplexVector same = gda_step(start, std::vector<double>{2.0, 2.0}, 0.7);
  CHECK(same[0] == doctest::Approx(1.0));

  SimplexVector fixed = gda_step(start, std::vector<double>{3.0, -1.0}, 0.0);
  CHECK(fixed[0] == doctest::Approx(1.0));
}

TEST_CASE("simplex projection") {
  SimplexVector on_simplex = simplex_project(std::vector<double>{0.3, 0.7});
  CHECK(on_simplex[0] == doctest::Approx(0.3).epsilon(1e-15));

  SimplexVector corner = simplex_project(std::vector<double>{2.0, 0.0});
  std::vector<double> oracle = oracles::grid_project_2d({2.0, 0.0});
  CHECK(corner[0] == doctest::Approx(oracle[0]).epsilon(1e-6));
  CHECK(corner[0] == doctest::Approx(1.0));

  // Shift invariance.
  Xoshiro256StarStar rng(19);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> v(4);
    for (double& x : v) x = rng.uniform(-3.0, 3.0);
    double c = rng.uniform(-10.0, 10.0);
    std::vector<double> shifted = v;
    for (double& x : shifted) x += c;
    SimplexVector a = simplex_project(v);
    SimplexVector b = simplex_project(shifted);
    for (int i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }

  // Against the grid oracle on random 2-vectors.
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
    SimplexVector fast = simplex_project(v);
    std::vector<double> slow = oracles::grid_project_2d(v);
    CHECK(fast[0] == doctest::Approx(slow[0]).epsilon(1e-6));
  }

  CHECK_THROWS_AS(simplex_project(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("omd form of rm_plus") {
  Xoshiro256StarStar rng(23);

  // eta = 1 starting from theta = Q: identical strategies at every step.
  RegretState state = RegretState::from_strategy(SimplexVector::uniform(3));
  std::vector<double> theta = state.cum_regret;
  SimplexVector sigma = SimplexVector::uniform(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> q = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    theta = omd_rm_plus_step(theta, q, 1.0);
    auto [next, next_sigma] = rm_plus_step(state, q, sigma);
    state = std::move(next);
    sigma = next_sigma;
    for (int a = 0; a < 3; ++a) CHECK(theta[a] == doctest::Approx(state.cum_regret[a]));
  }

  // Scaling theta and eta by the same constant leaves the strategy sequence
  // untouched.
  for (int trial = 0; trial < 5; ++trial) {
    double c = 0.25 + 4.0 * rng.uniform01();
    std::vector<double> plain = {0.5, 0.25, 0.25};
    std::vector<double> scaled = plain;
    for (double& v : scaled) v *= c;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> q = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      plain = omd_rm_plus_step(plain, q, 1.0);
      scaled = omd_rm_plus_step(scaled, q, c);
      SimplexVector a = SimplexVector::from_weights(plain);
      SimplexVector b = SimplexVector::from_weights(scaled);
      for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }

  // Constant value vector: m = 0 and theta is unchanged.
  std::vector<double> fixed = {0.2, 0.8};
  std::vector<double> result = omd_rm_plus_step(fixed, std::vector<double>{4.0, 4.0}, 2.0);
  CHECK(result == fixed);

  CHECK_THROWS_AS(omd_rm_plus_step(std::vector<double>{0.0, 0.0},
                                   std::vector<double>{1.0, 2.0}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("rm_plus state stays nonnegative over random streams") {
  Xoshiro256StarStar rng(29);
  RegretState state = RegretState::from_strategy(SimplexVector::uniform(5));
  SimplexVector sigma = SimplexVector::uniform(5);
  for (int t = 0; t < 20000; ++t) {
    std::vector<double> q(5);
    for (double& v : q) v = rng.uniform(-2.0, 2.0);
    auto [next, next_sigma] = rm_plus_step(state, q, sigma);
    state = std::move(next);
    sigma = next_sigma;
    double sum = 0.0;
    for (int a = 0; a < 5; ++a) {
      CHECK(state.cum_regret[a] >= 0.0);
      sum += sigma[a];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("rm_plus regret grows sublinearly on random streams") {
  // Fit of log(max regret) against log(T) over checkpoints; slope below
  // 0.75 indicates O(sqrt(T))-like growth.
  Xoshiro256StarStar rng(31);
  const int actions = 4;
  std::vector<double> log_t;
  std::vector<double> log_regret;
  RegretState state = RegretState::from_strategy(SimplexVector::uniform(actions));
  SimplexVector sigma = SimplexVector::uniform(actions);
  std::vector<double> cumulative(actions, 0.0);
  long next_checkpoint = 64;
  for (long t = 1; t <= (1L << 15); ++t) {
    std::vector<double> q(actions);
    for (double& v : q) v = rng.uniform(-1.0, 1.0);
    double baseline = 0.0;
    for (int a = 0; a < actions; ++a) baseline += sigma[a] * q[a];
    for (int a = 0; a < actions; ++a) cumulative[a] += q[a] - baseline;
    auto [next, next_sigma] = rm_plus_step(state, q, sigma);
    state = std::move(next);
    sigma = next_sigma;
    if (t == next_checkpoint) {
      double worst = *std::max_element(cumulative.begin(), cumulative.end());
      log_t.push_back(std::log(static_cast<double>(t)));
      log_regret.push_back(std::log(std::max(worst, 1e-3)));
      next_checkpoint *= 2;
    }
  }
  oracles::LinearFit fit = oracles::fit_line(log_t, log_regret);
  CHECK(fit.slope < 0.75);
}
