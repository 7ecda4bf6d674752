#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ergokit/chain.hpp"
#include "ergokit/environments.hpp"
#include "support/fixtures.hpp"

using namespace ergokit;
using namespace ergotest;

namespace {

std::set<std::set<int>> as_sets(const std::vector<std::vector<int>>& sccs) {
  std::set<std::set<int>> out;
  for (const auto& scc : sccs) out.insert(std::set<int>(scc.begin(), scc.end()));
  return out;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

std::vector<double> step_distribution(const TransitionMatrix& P, std::vector<double> mu) {
  std::vector<double> out(mu.size(), 0.0);
  for (int s = 0; s < P.n; ++s) {
    for (int s2 = 0; s2 < P.n; ++s2) out[s2] += mu[s] * P.p(s, s2);
  }
  return out;
}

}  // namespace

TEST_CASE("induced_chain: deterministic policy picks kernel rows") {
  MdpSpec mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.kernel = {0, 1, 1, 0, 1, 0, 0, 1};
  mdp.reward.assign(8, 0.0);
  mdp.initial_dist = {1, 0};
  mdp.validate();
  const auto P = induced_chain(mdp, PolicySpec::deterministic({0, 1}, 2));
  CHECK(P.p(0, 1) == 1.0);
  CHECK(P.p(1, 1) == 1.0);
}

TEST_CASE("induced_chain: uniform stochastic policy averages the kernels") {
  MdpSpec mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  mdp.kernel = {
      1.0, 0.0,  // K0 row s0
      0.0, 1.0,  // K1 row s0
      0.4, 0.6,  // K0 row s1
      0.8, 0.2,  // K1 row s1
  };
  mdp.reward.assign(8, 0.0);
  mdp.initial_dist = {1, 0};
  mdp.validate();
  const auto P = induced_chain(mdp, PolicySpec::stochastic({0.5, 0.5, 0.5, 0.5}, 2, 2));
  CHECK(P.p(0, 0) == doctest::Approx(0.5));
  CHECK(P.p(0, 1) == doctest::Approx(0.5));
  CHECK(P.p(1, 0) == doctest::Approx(0.6));
  CHECK(P.p(1, 1) == doctest::Approx(0.4));
}

TEST_CASE("induced_chain rejects parametric policies") {
  const MdpSpec mdp = delivery_mdp();
  CHECK_THROWS_AS(induced_chain(mdp, PolicySpec::parametric_fraction(0.3)), UnsupportedPolicy);
}

TEST_CASE("strongly_connected_components: identity, cycle, absorbing") {
  const auto singletons = strongly_connected_components(
      make_matrix({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  CHECK(singletons.size() == 3);

  const auto cycle = strongly_connected_components(two_cycle());
  REQUIRE(cycle.size() == 1);
  CHECK(cycle[0] == std::vector<int>{0, 1});

  const auto absorbing = strongly_connected_components(absorbing_three_state());
  CHECK(as_sets(absorbing) == std::set<std::set<int>>{{0}, {1}, {2}});
}

TEST_CASE("classify_chain: symmetric two-state chain is ergodic") {
  const auto rep = classify_chain(symmetric_two_state());
  CHECK(rep.classification == ChainClass::ErgodicChain);
  REQUIRE(rep.stationary.has_value());
  CHECK((*rep.stationary)[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK((*rep.stationary)[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(rep.periods == std::vector<int>{1});
}

TEST_CASE("classify_chain: 2-cycle is unichain periodic with period 2") {
  const auto rep = classify_chain(two_cycle());
  CHECK(rep.classification == ChainClass::UnichainPeriodic);
  CHECK(rep.periods == std::vector<int>{2});
  REQUIRE(rep.stationary.has_value());
  CHECK((*rep.stationary)[0] == doctest::Approx(0.5).epsilon(1e-10));

  // The stationary vector exists but time convergence fails: from a point mass
  // the distribution oscillates at TV distance 1/2 from stationary forever.
  std::vector<double> mu{1.0, 0.0};
  for (int t = 0; t < 50; ++t) {
    mu = step_distribution(two_cycle(), mu);
    CHECK(total_variation(mu, *rep.stationary) == doctest::Approx(0.5));
  }
}

TEST_CASE("classify_chain: absorbing three-state chain") {
  const auto rep = classify_chain(absorbing_three_state());
  CHECK(rep.classification == ChainClass::UnichainAperiodic);
  REQUIRE(rep.recurrent_sccs.size() == 1);
  CHECK(rep.sccs[rep.recurrent_sccs[0]] == std::vector<int>{2});
  CHECK(rep.transient_states == std::vector<int>{0, 1});
  REQUIRE(rep.stationary.has_value());
  CHECK((*rep.stationary)[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK((*rep.stationary)[2] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("classify_chain: disconnected self-loops are multichain") {
  const auto rep = classify_chain(make_matrix({{1, 0}, {0, 1}}));
  CHECK(rep.classification == ChainClass::Multichain);
  CHECK(rep.recurrent_sccs.size() == 2);
  CHECK_FALSE(rep.stationary.has_value());
}

TEST_CASE("classify_chain: sccs always partition the state set") {
  RngStream meta(55, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(meta.next_below(6));
    TransitionMatrix P;
    P.n = n;
    P.rows.assign(static_cast<std::size_t>(n) * n, 0.0);
    // Sparse random support to get interesting structure.
    for (int s = 0; s < n; ++s) {
      const int k = 1 + static_cast<int>(meta.next_below(2));
      std::vector<int> targets;
      for (int i = 0; i < k; ++i) targets.push_back(static_cast<int>(meta.next_below(n)));
      for (int t : targets) P.rows[static_cast<std::size_t>(s) * n + t] += 1.0 / k;
    }
    const auto rep = classify_chain(P);
    std::vector<int> seen;
    for (const auto& scc : rep.sccs) seen.insert(seen.end(), scc.begin(), scc.end());
    std::sort(seen.begin(), seen.end());
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    CHECK(seen == all);
  }
}

TEST_CASE("stationary_distribution: doubly stochastic gives uniform") {
  const auto pi = stationary_distribution(make_matrix(
      {{0.2, 0.5, 0.3}, {0.5, 0.3, 0.2}, {0.3, 0.2, 0.5}}));
  for (double v : pi) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("stationary_distribution: hand-solved two-state chain") {
  // 0.1 pi0 = 0.5 pi1 with pi0 + pi1 = 1 gives (5/6, 1/6).
  const auto pi = stationary_distribution(asymmetric_two_state());
  CHECK(pi[0] == doctest::Approx(5.0 / 6).epsilon(1e-10));
  CHECK(pi[1] == doctest::Approx(1.0 / 6).epsilon(1e-10));
}

TEST_CASE("stationary_distribution: absorbing chain concentrates on the absorber") {
  const auto pi = stationary_distribution(absorbing_three_state());
  CHECK(pi[0] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(pi[1] == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(pi[2] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("stationary_distribution: multichain input throws") {
  CHECK_THROWS_AS(stationary_distribution(make_matrix({{1, 0}, {0, 1}})), NonUniqueStationary);
}

TEST_CASE("stationary_distribution agrees with a brute-force powering oracle") {
  RngStream meta(202, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto P = random_dense_chain(3 + trial, meta);
    const auto pi = stationary_distribution(P);
    const auto oracle = stationary_by_brute_power(P, 20000);
    for (int s = 0; s < P.n; ++s) CHECK(pi[s] == doctest::Approx(oracle[s]).epsilon(1e-8));
    // pi^T P = pi^T within 1e-8 per entry.
    const auto stepped = step_distribution(P, pi);
    for (int s = 0; s < P.n; ++s) CHECK(std::abs(stepped[s] - pi[s]) < 1e-8);
  }
}

TEST_CASE("stationary_reward_rate: constant, diagonal, and row rewards") {
  const auto Psym = symmetric_two_state();
  const std::vector<double> pi{0.5, 0.5};
  CHECK(stationary_reward_rate(Psym, flatten({{3.0, 3.0}, {3.0, 3.0}}), pi) ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(stationary_reward_rate(Psym, flatten({{1.0, 0.0}, {0.0, 1.0}}), pi) ==
        doctest::Approx(0.5).epsilon(1e-12));

  const auto Pasym = asymmetric_two_state();
  const std::vector<double> pi2{5.0 / 6, 1.0 / 6};
  CHECK(stationary_reward_rate(Pasym, flatten({{1.0, 1.0}, {0.0, 0.0}}), pi2) ==
        doctest::Approx(5.0 / 6).epsilon(1e-12));

  CHECK_THROWS_AS(stationary_reward_rate(Pasym, std::vector<double>{1.0}, pi2), ShapeError);
}

TEST_CASE("is_ergodic_mdp: single irreducible policy, counterexample, cap") {
  // One action, irreducible chain.
  MdpSpec good;
  good.n_states = 2;
  good.n_actions = 1;
  good.kernel = {0.5, 0.5, 0.5, 0.5};
  good.reward.assign(4, 0.0);
  good.initial_dist = {1, 0};
  good.validate();
  CHECK(is_ergodic_mdp(good) == ErgodicMdpAnswer::Yes);

  // Delivery: the all-safe policy has two recurrent classes.
  CHECK(is_ergodic_mdp(delivery_mdp()) == ErgodicMdpAnswer::No);

  // 3 states x 4 actions = 64 policies; all-dense kernels are unichain under
  // every policy, so a cap of 10 hits Inconclusive without a counterexample.
  RngStream meta(8, 0);
  MdpSpec big;
  big.n_states = 3;
  big.n_actions = 4;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < 4; ++a) {
      const auto P = random_dense_chain(3, meta);
      for (int s2 = 0; s2 < 3; ++s2) big.kernel.push_back(P.p(0, s2));
    }
  }
  big.reward.assign(36, 0.0);
  big.initial_dist = {1, 0, 0};
  big.validate();
  CHECK(is_ergodic_mdp(big, 10) == ErgodicMdpAnswer::Inconclusive);
  CHECK(is_ergodic_mdp(big, 1000000) == ErgodicMdpAnswer::Yes);
}

TEST_CASE("power iteration converges to stationary for aperiodic unichains") {
  for (const auto& P : {symmetric_two_state(), asymmetric_two_state(), absorbing_three_state()}) {
    const auto rep = classify_chain(P);
    REQUIRE(rep.stationary.has_value());
    std::vector<double> mu(P.n, 0.0);
    mu[0] = 1.0;
    for (int t = 0; t < 2000; ++t) mu = step_distribution(P, mu);
    CHECK(total_variation(mu, *rep.stationary) < 1e-6);
  }
}

TEST_CASE("classification is invariant under state relabeling") {
  RngStream meta(991, 0);
  for (int trial = 0; trial < 10; ++trial) {
    // Mix of dense blocks and an absorbing state for structure.
    const int n = 4 + static_cast<int>(meta.next_below(3));
    TransitionMatrix P;
    P.n = n;
    P.rows.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int s = 0; s < n - 1; ++s) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n; ++s2) {
        const double v = meta.next_double() < 0.5 ? 0.0 : meta.next_double();
        P.rows[static_cast<std::size_t>(s) * n + s2] = v;
        sum += v;
      }
      if (sum == 0.0) {
        P.rows[static_cast<std::size_t>(s) * n + s] = 1.0;
      } else {
        for (int s2 = 0; s2 < n; ++s2) P.rows[static_cast<std::size_t>(s) * n + s2] /= sum;
      }
    }
    P.rows[static_cast<std::size_t>(n - 1) * n + (n - 1)] = 1.0;  // absorbing tail state

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(perm[i], perm[meta.next_below(static_cast<std::uint64_t>(i) + 1)]);
    }
    TransitionMatrix Q;
    Q.n = n;
    Q.rows.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int s = 0; s < n; ++s) {
      for (int s2 = 0; s2 < n; ++s2) {
        Q.rows[static_cast<std::size_t>(perm[s]) * n + perm[s2]] = P.p(s, s2);
      }
    }

    const auto rep_p = classify_chain(P);
    const auto rep_q = classify_chain(Q);
    CHECK(rep_p.classification == rep_q.classification);

    std::set<std::set<int>> mapped;
    for (const auto& scc : rep_p.sccs) {
      std::set<int> image;
      for (int s : scc) image.insert(perm[s]);
      mapped.insert(std::move(image));
    }
    CHECK(mapped == as_sets(rep_q.sccs));

    std::multiset<int> periods_p(rep_p.periods.begin(), rep_p.periods.end());
    std::multiset<int> periods_q(rep_q.periods.begin(), rep_q.periods.end());
    CHECK(periods_p == periods_q);

    if (rep_p.stationary && rep_q.stationary) {
      for (int s = 0; s < n; ++s) {
        CHECK((*rep_p.stationary)[s] ==
              doctest::Approx((*rep_q.stationary)[perm[s]]).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("delivery chain reports: direct absorbs, safe splits") {
  const MdpSpec mdp = delivery_mdp();
  const auto P_direct = induced_chain(mdp, PolicySpec::deterministic({0, 0}, 2));
  const auto rep_direct = classify_chain(P_direct);
  CHECK(rep_direct.classification == ChainClass::UnichainAperiodic);
  REQUIRE(rep_direct.recurrent_sccs.size() == 1);
  CHECK(rep_direct.sccs[rep_direct.recurrent_sccs[0]] ==
        std::vector<int>{kDeliveryDestroyed});
  CHECK(rep_direct.transient_states == std::vector<int>{kDeliveryOperational});

  const auto P_safe = induced_chain(mdp, PolicySpec::deterministic({1, 1}, 2));
  const auto rep_safe = classify_chain(P_safe);
  CHECK(rep_safe.classification == ChainClass::Multichain);
  bool operational_recurrent = false;
  for (std::size_t idx : rep_safe.recurrent_sccs) {
    if (rep_safe.sccs[idx] == std::vector<int>{kDeliveryOperational}) operational_recurrent = true;
  }
  CHECK(operational_recurrent);
}
