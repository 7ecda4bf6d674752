#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ergokit/environments.hpp"
#include "support/fixtures.hpp"

using namespace ergokit;

TEST_CASE("coin_toss_step reproduces the outcome tree values") {
  CoinTossParams p;
  // Both branches over a seed scan: 100 -> 150 on a win, 100 -> 60 -> 36 on
  // consecutive losses.
  bool saw_win = false, saw_double_loss = false;
  for (std::uint64_t s = 0; s < 64 && !(saw_win && saw_double_loss); ++s) {
    RngStream rng(s, 0);
    const auto step = coin_toss_step(100.0, 1.0, rng, p);
    if (step.win) {
      saw_win = true;
      CHECK(step.reward == doctest::Approx(50.0).epsilon(1e-12));
      CHECK(step.next_return == doctest::Approx(150.0).epsilon(1e-12));
      continue;
    }
    CHECK(step.reward == doctest::Approx(-40.0).epsilon(1e-12));
    CHECK(step.next_return == doctest::Approx(60.0).epsilon(1e-12));
    const auto again = coin_toss_step(step.next_return, 1.0, rng, p);
    if (!again.win) {
      saw_double_loss = true;
      CHECK(again.next_return == doctest::Approx(36.0).epsilon(1e-12));
    }
  }
  CHECK(saw_win);
  CHECK(saw_double_loss);
}

TEST_CASE("coin_toss_step with zero stake never moves the return") {
  RngStream rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const auto step = coin_toss_step(100.0, 0.0, rng);
    CHECK(step.reward == 0.0);
    CHECK(step.next_return == 100.0);
  }
}

TEST_CASE("closed-form expected return") {
  CoinTossParams p;
  CHECK(coin_toss_expected_return(p, 1.0, 1) == doctest::Approx(105.0).epsilon(1e-12));
  CHECK(coin_toss_expected_return(p, 1.0, 2) == doctest::Approx(110.25).epsilon(1e-12));
  CHECK(coin_toss_expected_return(p, 0.0, 1000) == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("per-step log growth closed forms") {
  CHECK(coin_toss_time_growth(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(coin_toss_time_growth(1.0) == doctest::Approx(0.5 * std::log(0.9)).epsilon(1e-12));
  CHECK(coin_toss_time_growth(1.0) == doctest::Approx(-0.052680257828913).epsilon(1e-9));

  CoinTossParams ruinous;
  ruinous.loss_mult = 0.999999;
  CHECK_NOTHROW(coin_toss_time_growth(ruinous, 1.0));
}

TEST_CASE("optimal fraction: closed form and grid-search agreement") {
  const auto opt = coin_toss_optimal_fraction();
  CHECK(opt.has_edge);
  CHECK(opt.alpha == doctest::Approx(0.25).epsilon(1e-12));

  // Independent oracle: grid search over the analytic growth at 1e-4 steps.
  double best_alpha = 0.0, best = -1e300;
  for (int i = 0; i <= 10000; ++i) {
    const double a = i * 1e-4;
    const double g = ergotest::analytic_coin_growth(a);
    if (g > best) {
      best = g;
      best_alpha = a;
    }
  }
  CHECK(std::abs(best_alpha - opt.alpha) < 1e-3);
}

TEST_CASE("optimal fraction boundary regimes") {
  CoinTossParams no_edge;
  no_edge.win_mult = 0.4;
  no_edge.loss_mult = 0.4;
  const auto flat = coin_toss_optimal_fraction(no_edge);
  CHECK_FALSE(flat.has_edge);
  CHECK(flat.alpha == 0.0);

  CoinTossParams sure_thing;
  sure_thing.p_win = 0.999;
  const auto all_in = coin_toss_optimal_fraction(sure_thing);
  CHECK(all_in.has_edge);
  CHECK(all_in.alpha == 1.0);  // clamped
}

TEST_CASE("coin toss rollout: log and linear series agree, runs are reproducible") {
  const auto a = coin_toss_rollout(CoinTossParams{}, 0.7, 400, RngStream(12, 4));
  const auto b = coin_toss_rollout(CoinTossParams{}, 0.7, 400, RngStream(12, 4));
  CHECK(a.rewards == b.rewards);
  a.validate();
  REQUIRE(a.log_returns.size() == a.returns.size());
  for (std::size_t k = 0; k < a.returns.size(); ++k) {
    CHECK(a.returns[k] == doctest::Approx(std::exp(a.log_returns[k])).epsilon(1e-12));
  }
}

TEST_CASE("Monte-Carlo means match the closed form at T in {1,2,5}") {
  CoinTossParams p;
  const std::size_t n = 100000;
  for (std::size_t T : {1, 2, 5}) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto rec = coin_toss_rollout(p, 1.0, T, RngStream(500 + T, i));
      sum += rec.final_return();
      sumsq += rec.final_return() * rec.final_return();
    }
    const double mean = sum / n;
    const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
    const double se = sd / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - coin_toss_expected_return(p, 1.0, T)) < 3.0 * se);
  }
}

TEST_CASE("median final return decays like the log-growth rate") {
  const std::size_t n = 10000, T = 100;
  std::vector<double> finals;
  finals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    finals.push_back(coin_toss_rollout(CoinTossParams{}, 1.0, T, RngStream(808, i)).final_return());
  }
  std::nth_element(finals.begin(), finals.begin() + n / 2, finals.end());
  const double median = finals[n / 2];
  const double g = coin_toss_time_growth(1.0);  // negative
  CHECK(median < 100.0 * std::exp(0.9 * T * g));
  CHECK(median > 100.0 * std::exp(1.1 * T * g));
}

TEST_CASE("bandit_step: safe is deterministic, degenerate loss probabilities") {
  BanditParams p;
  RngStream rng(5, 0);
  for (int i = 0; i < 20; ++i) {
    const auto out = bandit_step(100.0, BanditAction::Safe, p, rng);
    CHECK(out.factor == p.r_safe);
    CHECK(out.label == BanditOutcomeLabel::Safe);
  }
  p.p_loss = 0.0;
  for (int i = 0; i < 20; ++i) {
    CHECK(bandit_step(50.0, BanditAction::Risk, p, rng).factor == p.r_win);
  }
  p.p_loss = 1.0;
  for (int i = 0; i < 20; ++i) {
    CHECK(bandit_step(50.0, BanditAction::Risk, p, rng).factor == p.r_loss);
  }
}

TEST_CASE("bandit parameter ordering is enforced") {
  BanditParams bad;
  bad.r_safe = 1.6;  // violates r_safe < r_win
  CHECK_THROWS_AS(bad.validate(), ShapeError);
  bad = BanditParams{};
  bad.r_loss = 1.0;
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}

TEST_CASE("indifference points: fixture values and boundaries") {
  BanditParams p;
  CHECK(indifference_expected(p) == doctest::Approx(0.5 / 0.9).epsilon(1e-12));
  CHECK(indifference_growth(p) ==
        doctest::Approx(std::log(1.5) / std::log(2.5)).epsilon(1e-12));
  CHECK(indifference_growth(p) < indifference_expected(p));

  BanditParams no_gain = p;
  no_gain.r_win = 1.0 + 1e-15;
  // r_safe == r_win limit: risk is never strictly better.
  CHECK(indifference_expected(no_gain) == doctest::Approx(0.0).epsilon(1e-9));

  BanditParams near_safe = p;
  near_safe.r_loss = 0.999;
  CHECK(indifference_expected(near_safe) == doctest::Approx(0.5 / 0.501).epsilon(1e-12));
  // Near-additive regime: the two formulas converge.
  CHECK(std::abs(indifference_expected(near_safe) - indifference_growth(near_safe)) < 1e-3);
}

TEST_CASE("indifference identities hold to 1e-12") {
  BanditParams p;
  const double pe = indifference_expected(p);
  CHECK(pe * p.r_loss + (1.0 - pe) * p.r_win == doctest::Approx(p.r_safe).epsilon(1e-12));
  const double pt = indifference_growth(p);
  CHECK(pt * std::log(p.r_loss) + (1.0 - pt) * std::log(p.r_win) ==
        doctest::Approx(std::log(p.r_safe)).epsilon(1e-12));
}

TEST_CASE("delivery MDP: trip expectations are exactly 89 and 80") {
  const MdpSpec mdp = delivery_mdp();
  double direct = 0.0, safe = 0.0;
  for (int s2 = 0; s2 < 2; ++s2) {
    direct += mdp.p(kDeliveryOperational, kDeliveryDirect, s2) *
              mdp.g(kDeliveryOperational, kDeliveryDirect, s2);
    safe += mdp.p(kDeliveryOperational, kDeliverySafe, s2) *
            mdp.g(kDeliveryOperational, kDeliverySafe, s2);
  }
  CHECK(direct == doctest::Approx(89.0).epsilon(1e-12));
  CHECK(safe == doctest::Approx(80.0).epsilon(1e-12));
}

TEST_CASE("delivery MDP: rows are distributions and destroyed is absorbing") {
  const MdpSpec mdp = delivery_mdp();
  CHECK_NOTHROW(mdp.validate());
  for (int a = 0; a < 2; ++a) {
    CHECK(mdp.p(kDeliveryDestroyed, a, kDeliveryDestroyed) == 1.0);
    CHECK(mdp.g(kDeliveryDestroyed, a, kDeliveryDestroyed) == 0.0);
  }
}

TEST_CASE("additive gamble rollout keeps additive bookkeeping") {
  const auto rec = additive_gamble_rollout(AdditiveGambleParams{}, 0.5, 200, RngStream(33, 0));
  rec.validate();
  CHECK(rec.log_returns.empty());
  for (double r : rec.rewards) CHECK((r == 2.5 || r == -2.0));
}
