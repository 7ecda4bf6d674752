#pragma once

#include <functional>
#include <vector>

#include "ergokit/environments.hpp"
#include "ergokit/types.hpp"

namespace ergokit {

/// Softmax policy over a discretized stake-fraction grid.
struct DiscretizedFractionPolicy {
  std::vector<double> grid;    // strictly increasing, within [0,1]
  std::vector<double> logits;  // one per grid point
  double temperature = 1.0;

  /// 21 points {0, 0.05, ..., 1} with zero logits.
  static DiscretizedFractionPolicy uniform(std::size_t points = 21);

  std::vector<double> probabilities() const;
  int sample(RngStream& rng) const;
  double mean_alpha() const;
  double greedy_alpha() const;
  void validate() const;
};

/// Wealth-process dynamics in the log domain: step(log_return, alpha, rng)
/// returns (reward, next_log_return). Stateless given the rng.
struct WealthDynamics {
  double initial_return = 0.0;
  std::function<std::pair<double, double>(double log_return, double alpha, RngStream& rng)> step;
};

WealthDynamics make_coin_toss_dynamics(const CoinTossParams& params = {});
WealthDynamics make_additive_gamble_dynamics(const AdditiveGambleParams& params = {});

enum class RewardChannel { RawRewards, TransformedIncrements };
enum class BaselineKind { None, Mean };

struct LearningCurvePoint {
  std::size_t iteration = 0;
  double objective = 0.0;          // mean per-episode objective over the batch
  double mean_final_return = 0.0;  // NaN once the linear-domain return underflows
  double mean_alpha = 0.0;
  double growth_estimate = 0.0;    // growth-q only; 0 elsewhere
};
using LearningCurve = std::vector<LearningCurvePoint>;

struct ReinforceConfig {
  std::size_t episodes = 2000;
  std::size_t horizon = 50;
  double learning_rate = 0.05;
  std::size_t batch_size = 10;
  BaselineKind baseline = BaselineKind::Mean;
  double temperature = 1.0;
  std::size_t grid_points = 21;
  std::size_t curve_stride = 10;  // batches between learning-curve rows
};

struct ReinforceResult {
  DiscretizedFractionPolicy policy;
  LearningCurve curve;
};

class TransformationCurve;  // transform.hpp

/// Monte-Carlo policy gradient on the episode sum of the selected channel.
/// `transform` must be non-null for the TransformedIncrements channel. Throws
/// DivergenceError if the logits leave the finite range.
ReinforceResult reinforce_train(const WealthDynamics& env, RewardChannel channel,
                                const TransformationCurve* transform, const ReinforceConfig& config,
                                std::uint64_t seed);

struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(int ns, int na) : n_states(ns), n_actions(na), values(static_cast<std::size_t>(ns) * na, 0.0) {}
  double& at(int s, int a) { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  double at(int s, int a) const { return values[static_cast<std::size_t>(s) * n_actions + a]; }
  int greedy_action(int s) const;
  double max_value(int s) const;
};

struct EpsilonSchedule {
  double eps0 = 1.0;
  double eps_end = 0.05;
  std::size_t decay_steps = 0;  // 0 -> one tenth of total_steps

  double at(std::size_t step, std::size_t total_steps) const;
};

struct QLearningConfig {
  std::size_t steps = 200000;
  double learning_rate = 1.0;      // lr(s,a) = learning_rate / (1 + visit_decay * visits(s,a))
  double visit_decay = 1.0;        // 1.0 with learning_rate 1.0 gives sample averages
  double discount = 0.99;
  EpsilonSchedule epsilon;
  std::size_t episode_length = 100;  // initial state redrawn this often
};

struct QLearningResult {
  QTable q;
  PolicySpec greedy;
};

/// Single-step tabular Q-learning over a finite MDP with epsilon-greedy
/// behavior and per-(s,a) Robbins-Monro step sizes.
QLearningResult tabular_q_learning(const MdpSpec& mdp, const QLearningConfig& config,
                                   std::uint64_t seed);

}  // namespace ergokit
