#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ergokit/diagnostics.hpp"
#include "ergokit/rollout.hpp"
#include "support/fixtures.hpp"

using namespace ergokit;
using namespace ergotest;

namespace {

TrajectoryRecord constant_reward_traj(double c, std::size_t horizon) {
  TrajectoryRecord rec;
  rec.horizon = horizon;
  rec.states.assign(horizon, 0);
  rec.actions.assign(horizon, 0);
  double ret = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    rec.rewards.push_back(c);
    ret += c;
    rec.returns.push_back(ret);
  }
  return rec;
}

MdpSpec symmetric_mrp_diag_reward() {
  return make_mrp({{0.5, 0.5}, {0.5, 0.5}}, {{1.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
}

}  // namespace

TEST_CASE("ensemble_average_at: identical trajectories collapse the CI") {
  std::vector<TrajectoryRecord> trajs(8, constant_reward_traj(3.0, 16));
  const auto mc = ensemble_average_at(trajs, 5);
  CHECK(mc.mean == doctest::Approx(3.0));
  CHECK(mc.ci_halfwidth == doctest::Approx(0.0));
  CHECK(mc.n == 8);
}

TEST_CASE("ensemble_average_at input validation") {
  std::vector<TrajectoryRecord> empty;
  CHECK_THROWS_AS(ensemble_average_at(empty, 0), EmptyInput);
  std::vector<TrajectoryRecord> shorty(2, constant_reward_traj(1.0, 4));
  CHECK_THROWS_AS(ensemble_average_at(shorty, 4), ShapeError);
}

TEST_CASE("ensemble average matches rho on the symmetric fixture") {
  // rho oracle: pi = (1/2, 1/2), diagonal rewards give rho = 1/2.
  const MdpSpec mrp = symmetric_mrp_diag_reward();
  const auto trajs =
      ensemble_rollout(mrp, PolicySpec::deterministic({0, 0}, 1), 32, 10000, 612);
  for (std::size_t t : {0, 7, 31}) {
    const auto mc = ensemble_average_at(trajs, t);
    CHECK(std::abs(mc.mean - 0.5) < 0.01);
  }
}

TEST_CASE("time_average basics") {
  CHECK(time_average(constant_reward_traj(2.5, 100)) == doctest::Approx(2.5));

  TrajectoryRecord alt;
  alt.horizon = 10;
  alt.states.assign(10, 0);
  alt.actions.assign(10, 0);
  double ret = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const double r = (k % 2 == 0) ? 1.0 : -1.0;
    alt.rewards.push_back(r);
    ret += r;
    alt.returns.push_back(ret);
  }
  CHECK(time_average(alt) == doctest::Approx(0.0));
}

TEST_CASE("time average equals return difference over horizon") {
  const MdpSpec mrp = make_mrp({{0.3, 0.7}, {0.8, 0.2}}, {{1.5, -2.0}, {0.25, 4.0}}, {1, 0});
  const auto rec = rollout(mrp, PolicySpec::deterministic({0, 0}, 1), 5000, RngStream(4, 0));
  const double expect = (rec.final_return() - rec.initial_return) / 5000.0;
  CHECK(time_average(rec) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("long-run time average hits rho on the symmetric fixture") {
  const MdpSpec mrp = symmetric_mrp_diag_reward();
  const auto rec =
      rollout(mrp, PolicySpec::deterministic({0, 0}, 1), 1000000, RngStream(21, 0));
  CHECK(std::abs(time_average(rec) - 0.5) < 0.005);
}

TEST_CASE("ergodicity gap: ergodic fixture with stationary start has no gap") {
  const MdpSpec mrp = symmetric_mrp_diag_reward();
  const auto source = make_mdp_source(mrp, PolicySpec::deterministic({0, 0}, 1));
  const std::vector<std::size_t> probes{0, 1, 499};
  const auto rep = ergodicity_gap(source, 500, 800, probes, 2025);
  CHECK(rep.gap <= rep.ensemble_ci.back() + rep.time_mean_ci + 1e-9);
  for (double m : rep.ensemble_mean_at) CHECK(std::abs(m - 0.5) < 0.06);
}

TEST_CASE("ergodicity gap: unichain with adversarial start converges past burn-in") {
  // Absorbing fixture: rho = g(2,2) = 2. Burn-in 10x the chain size.
  const MdpSpec mrp = make_mrp({{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}},
                               {{-1.0, 0.5, 0.0}, {0.0, 0.0, -3.0}, {0.0, 0.0, 2.0}},
                               {1.0, 0.0, 0.0});
  const auto source = make_mdp_source(mrp, PolicySpec::deterministic({0, 0, 0}, 1), 0);
  const std::vector<std::size_t> probes{30, 999};
  const auto rep = ergodicity_gap(source, 1000, 600, probes, 77);
  for (double m : rep.ensemble_mean_at) CHECK(std::abs(m - 2.0) < 0.05);
  CHECK(std::abs(rep.time_mean_avg - 2.0) < 0.05);

  // Start-state independence of the time average.
  for (int s0 = 0; s0 < 3; ++s0) {
    const auto rec = rollout(mrp, PolicySpec::deterministic({0, 0, 0}, 1), 100000,
                             RngStream(3000 + s0, 0), s0);
    CHECK(std::abs(time_average(rec) - 2.0) < 0.01);
  }
}

TEST_CASE("ergodicity gap: full-stake coin toss diverges, ensemble vs time") {
  const auto source = make_coin_toss_source(CoinTossParams{}, 1.0);
  const std::vector<std::size_t> probes{0, 99, 999};
  const auto rep = ergodicity_gap(source, 1000, 1000, probes, 4242);

  // Ensemble reward average grows with t while almost every individual
  // trajectory has a negative time-averaged reward.
  CHECK(rep.ensemble_mean_at[0] > 0.0);
  std::size_t negative = 0;
  for (double tm : rep.time_mean_per_traj) negative += tm < 0.0;
  CHECK(static_cast<double>(negative) / rep.time_mean_per_traj.size() > 0.95);
  CHECK(rep.gap > 0.0);
}

TEST_CASE("growth_rate_estimate on simple series") {
  const std::vector<double> doubling{1.0, 2.0, 4.0, 8.0, 16.0};
  const auto d = growth_rate_estimate(doubling);
  CHECK(d.per_step_log_growth == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(d.valid_steps == 4);
  CHECK_FALSE(d.flagged());

  const std::vector<double> constant{5.0, 5.0, 5.0};
  CHECK(growth_rate_estimate(constant).per_step_log_growth == doctest::Approx(0.0));
}

TEST_CASE("growth_rate_estimate flags non-positive ratios instead of dropping silently") {
  const std::vector<double> crossing{4.0, 2.0, -1.0, 3.0};
  const auto est = growth_rate_estimate(crossing);
  CHECK(est.flagged());
  CHECK(est.non_positive_ratios == 2);  // 2 -> -1 and -1 -> 3
  CHECK(est.valid_steps == 1);
}

TEST_CASE("coin-toss growth at full stake matches the analytic value over 1e5 steps") {
  const auto rec = coin_toss_rollout(CoinTossParams{}, 1.0, 100000, RngStream(7777, 0));
  const auto est = growth_rate_estimate(rec);
  CHECK_FALSE(est.flagged());
  CHECK(est.valid_steps == 100000);
  CHECK(std::abs(est.per_step_log_growth - 0.5 * std::log(0.9)) < 0.003);
}

TEST_CASE("positive-growth trajectory share shrinks with horizon at full stake") {
  const std::size_t n = 10000;
  double previous_fraction = 1.0;
  for (std::size_t horizon : {10, 100, 1000}) {
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto rec = coin_toss_rollout(CoinTossParams{}, 1.0, horizon, RngStream(9090, i));
      positive += rec.log_returns.back() > std::log(100.0);
    }
    const double fraction = static_cast<double>(positive) / n;
    CHECK(fraction < previous_fraction);
    previous_fraction = fraction;
  }
  // At horizon 1000 survival is essentially gone.
  CHECK(previous_fraction < 0.01);
}

TEST_CASE("batch-means standard error is sane on an iid series") {
  const auto rec = coin_toss_rollout(CoinTossParams{}, 0.0, 1000, RngStream(1, 0));
  CHECK(time_average_se(rec) == doctest::Approx(0.0));
}
