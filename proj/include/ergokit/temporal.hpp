#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "ergokit/environments.hpp"
#include "ergokit/types.hpp"

namespace ergokit {

enum class UpdateRule { OneStepExpected, TemporalCompounded, MonteCarloTrajectory };

/// Two-action preference learner. OneStepExpected tracks the realized one-step
/// factor per action; TemporalCompounded tracks the log of the realized factor
/// (the growth-rate signal), whose fixed point is the growth-optimal action.
struct BanditAgent {
  UpdateRule rule = UpdateRule::OneStepExpected;
  std::optional<double> step_size;  // nullopt: 1/n sample average; 0.0: frozen
  double epsilon = 0.1;
  std::array<double, 2> preference{0.0, 0.0};
  std::array<std::uint64_t, 2> pulls{0, 0};

  int greedy(RngStream& rng) const;  // argmax, random tie-break
  int act(RngStream& rng) const;     // epsilon-greedy
  void update(int action, double factor);
};

struct TemporalEpisodeResult {
  double final_return = 0.0;
  std::vector<double> log_factors;  // one per step
};

/// Repeated play of the same selection problem within one episode with the
/// return compounding multiplicatively; the agent updates after every step.
TemporalEpisodeResult temporal_episode(BanditAgent& agent, const BanditParams& params,
                                       std::size_t steps, double initial_return, RngStream& rng);

struct BanditTrainConfig {
  UpdateRule rule = UpdateRule::OneStepExpected;
  std::optional<double> step_size;  // nullopt: sample average
  double epsilon_train = 0.1;
  std::size_t episodes = 400;
  std::size_t steps_per_episode = 20;
  std::size_t eval_steps = 200;
  double initial_return = 100.0;
};

struct TrainedPreference {
  BanditAgent agent;
  double safe_frequency = 0.0;  // greedy choice share over the frozen eval block
};

TrainedPreference train_preference(const BanditTrainConfig& config, const BanditParams& params,
                                   std::uint64_t seed, std::uint64_t stream = 0);

struct PreferenceCurve {
  std::vector<double> p_grid;
  std::vector<double> safe_preference;
  std::vector<double> ci;
  double empirical_indifference = 0.0;
  bool crossing_in_range = false;  // false: reported value is the boundary p
};

/// Safe-action preference as a function of the loss probability, averaged over
/// independently trained agents per grid point. The indifference point is the
/// first upward 0.5 crossing, linearly interpolated (exact 0.5 resolves to the
/// lower p).
PreferenceCurve preference_sweep(const BanditTrainConfig& config, BanditParams params,
                                 std::span<const double> p_grid, std::size_t agents_per_point,
                                 std::uint64_t seed);

/// Interpolated first upward 0.5 crossing of (p, preference) pairs.
std::pair<double, bool> indifference_from_curve(std::span<const double> p_grid,
                                                std::span<const double> preference);

struct TimeStateAgent {
  std::size_t horizon = 0;
  std::vector<std::array<double, 2>> preference;        // one row per time step
  std::vector<std::array<std::uint64_t, 2>> pulls;
};

struct McTrajectoryConfig {
  std::size_t episodes = 2000;
  std::optional<double> step_size;  // nullopt: sample average; 0.0: frozen
  double epsilon_train = 0.1;
};

/// Time-indexed-state formulation: one preference row per step, trained by
/// propagating the episode's final compounded return (initial return 1) to
/// every visited (time state, action) after the episode ends.
TimeStateAgent monte_carlo_trajectory_update(const BanditParams& params, std::size_t horizon,
                                             const McTrajectoryConfig& config, std::uint64_t seed,
                                             std::uint64_t stream = 0);

/// Greedy safe-choice share across the agent's time states.
double safe_frequency(const TimeStateAgent& agent, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Fig-7-style analog: a two-parameter stake policy over normalized log wealth,
// trained on whole-episode growth, then evaluated two ways.
// ---------------------------------------------------------------------------

struct ParametricTemporalPolicy {
  double theta0 = 0.0;
  double theta1 = 0.0;
  /// Stake fraction given log(w / w0); logistic in the features (1, log ratio).
  double fraction(double log_wealth_ratio) const;
};

struct ParametricTemporalConfig {
  CoinTossParams params;
  std::size_t iterations = 400;       // (1+1)-ES proposals
  std::size_t episodes_per_eval = 8;
  std::size_t horizon = 100;
  double perturb_scale = 0.4;
};

struct ParametricTemporalResult {
  ParametricTemporalPolicy policy;
  std::vector<double> objective_trace;  // accepted mean log growth per iteration
};

ParametricTemporalResult train_temporal_parametric(const ParametricTemporalConfig& config,
                                                   std::uint64_t seed);

/// Applies the trained stake at the training-scale wealth once and holds it
/// fixed for the whole evaluation run.
TrajectoryRecord evaluate_temporal_fixed(const ParametricTemporalPolicy& policy,
                                         const CoinTossParams& params, std::size_t horizon,
                                         RngStream rng);

/// Feeds the normalized running wealth back into the policy every step.
TrajectoryRecord evaluate_temporal_recursive(const ParametricTemporalPolicy& policy,
                                             const CoinTossParams& params, std::size_t horizon,
                                             RngStream rng);

}  // namespace ergokit
