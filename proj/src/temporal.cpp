#include "ergokit/temporal.hpp"

#include <algorithm>
#include <cmath>

namespace ergokit {

int BanditAgent::greedy(RngStream& rng) const {
  if (preference[0] == preference[1]) return static_cast<int>(rng.next_below(2));
  return preference[1] > preference[0] ? 1 : 0;
}

int BanditAgent::act(RngStream& rng) const {
  if (rng.next_bernoulli(epsilon)) return static_cast<int>(rng.next_below(2));
  return greedy(rng);
}

void BanditAgent::update(int action, double factor) {
  if (rule == UpdateRule::MonteCarloTrajectory) {
    throw UnsupportedPolicy("BanditAgent: Monte-Carlo rule updates via monte_carlo_trajectory_update");
  }
  const double signal = rule == UpdateRule::TemporalCompounded ? std::log(factor) : factor;
  ++pulls[action];
  const double step =
      step_size.has_value() ? *step_size : 1.0 / static_cast<double>(pulls[action]);
  preference[action] += step * (signal - preference[action]);
}

TemporalEpisodeResult temporal_episode(BanditAgent& agent, const BanditParams& params,
                                       std::size_t steps, double initial_return, RngStream& rng) {
  if (steps < 1) throw ShapeError("temporal_episode: steps must be >= 1");
  if (!(initial_return > 0.0)) throw ShapeError("temporal_episode: initial return must be positive");
  params.validate();

  TemporalEpisodeResult out;
  out.log_factors.reserve(steps);
  double ret = initial_return;
  for (std::size_t k = 0; k < steps; ++k) {
    const int action = agent.act(rng);
    const auto step = bandit_step(ret, action == 0 ? BanditAction::Safe : BanditAction::Risk,
                                  params, rng);
    agent.update(action, step.factor);
    ret = step.next_return;
    out.log_factors.push_back(std::log(step.factor));
  }
  out.final_return = ret;
  return out;
}

TrainedPreference train_preference(const BanditTrainConfig& config, const BanditParams& params,
                                   std::uint64_t seed, std::uint64_t stream) {
  TrainedPreference out;
  out.agent.rule = config.rule;
  out.agent.step_size = config.step_size;
  out.agent.epsilon = config.epsilon_train;

  RngStream rng(seed, stream);
  for (std::size_t e = 0; e < config.episodes; ++e) {
    temporal_episode(out.agent, params, config.steps_per_episode, config.initial_return, rng);
  }

  out.agent.epsilon = 0.0;
  std::size_t safe = 0;
  for (std::size_t k = 0; k < config.eval_steps; ++k) {
    if (out.agent.act(rng) == 0) ++safe;
  }
  out.safe_frequency = static_cast<double>(safe) / static_cast<double>(config.eval_steps);
  return out;
}

std::pair<double, bool> indifference_from_curve(std::span<const double> p_grid,
                                                std::span<const double> preference) {
  if (p_grid.size() != preference.size() || p_grid.empty()) {
    throw ShapeError("indifference_from_curve: grid/preference size mismatch");
  }
  if (preference.front() >= 0.5) return {p_grid.front(), preference.front() == 0.5};
  for (std::size_t i = 1; i < p_grid.size(); ++i) {
    if (preference[i] >= 0.5) {
      if (preference[i] == 0.5) return {p_grid[i], true};  // tie resolves to the lower p
      const double f0 = preference[i - 1];
      const double f1 = preference[i];
      const double t = (0.5 - f0) / (f1 - f0);
      return {p_grid[i - 1] + t * (p_grid[i] - p_grid[i - 1]), true};
    }
  }
  return {p_grid.back(), false};  // no crossing inside the grid
}

PreferenceCurve preference_sweep(const BanditTrainConfig& config, BanditParams params,
                                 std::span<const double> p_grid, std::size_t agents_per_point,
                                 std::uint64_t seed) {
  if (p_grid.empty()) throw EmptyInput("preference_sweep: empty p grid");
  if (agents_per_point < 1) throw ShapeError("preference_sweep: need at least one agent per point");

  PreferenceCurve curve;
  curve.p_grid.assign(p_grid.begin(), p_grid.end());
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    params.p_loss = p_grid[i];
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t a = 0; a < agents_per_point; ++a) {
      const auto trained =
          train_preference(config, params, seed, i * agents_per_point + a);
      sum += trained.safe_frequency;
      sumsq += trained.safe_frequency * trained.safe_frequency;
    }
    const double n = static_cast<double>(agents_per_point);
    const double mean = sum / n;
    curve.safe_preference.push_back(mean);
    double ci = 0.0;
    if (agents_per_point > 1) {
      const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
      ci = 1.959963984540054 * std::sqrt(var / n);
    }
    curve.ci.push_back(ci);
  }
  const auto [p_star, in_range] = indifference_from_curve(curve.p_grid, curve.safe_preference);
  curve.empirical_indifference = p_star;
  curve.crossing_in_range = in_range;
  return curve;
}

TimeStateAgent monte_carlo_trajectory_update(const BanditParams& params, std::size_t horizon,
                                             const McTrajectoryConfig& config, std::uint64_t seed,
                                             std::uint64_t stream) {
  if (horizon < 1) throw ShapeError("monte_carlo_trajectory_update: horizon must be >= 1");
  params.validate();

  TimeStateAgent agent;
  agent.horizon = horizon;
  agent.preference.assign(horizon, {0.0, 0.0});
  agent.pulls.assign(horizon, {0, 0});

  RngStream rng(seed, stream);
  std::vector<int> chosen(horizon);
  for (std::size_t e = 0; e < config.episodes; ++e) {
    double ret = 1.0;  // table signal is the compounded factor product
    for (std::size_t t = 0; t < horizon; ++t) {
      int action;
      if (rng.next_bernoulli(config.epsilon_train)) {
        action = static_cast<int>(rng.next_below(2));
      } else if (agent.preference[t][0] == agent.preference[t][1]) {
        action = static_cast<int>(rng.next_below(2));
      } else {
        action = agent.preference[t][1] > agent.preference[t][0] ? 1 : 0;
      }
      chosen[t] = action;
      const auto step = bandit_step(ret, action == 0 ? BanditAction::Safe : BanditAction::Risk,
                                    params, rng);
      ret = step.next_return;
    }
    for (std::size_t t = 0; t < horizon; ++t) {
      const int a = chosen[t];
      ++agent.pulls[t][a];
      const double step = config.step_size.has_value()
                              ? *config.step_size
                              : 1.0 / static_cast<double>(agent.pulls[t][a]);
      agent.preference[t][a] += step * (ret - agent.preference[t][a]);
    }
  }
  return agent;
}

double safe_frequency(const TimeStateAgent& agent, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::size_t safe = 0;
  for (std::size_t t = 0; t < agent.horizon; ++t) {
    int action;
    if (agent.preference[t][0] == agent.preference[t][1]) {
      action = static_cast<int>(rng.next_below(2));
    } else {
      action = agent.preference[t][1] > agent.preference[t][0] ? 1 : 0;
    }
    if (action == 0) ++safe;
  }
  return static_cast<double>(safe) / static_cast<double>(agent.horizon);
}

double ParametricTemporalPolicy::fraction(double log_wealth_ratio) const {
  const double z = theta0 + theta1 * log_wealth_ratio;
  return 1.0 / (1.0 + std::exp(-z));
}

namespace {

double mean_episode_log_growth(const ParametricTemporalPolicy& policy,
                               const ParametricTemporalConfig& config, RngStream& rng) {
  double total = 0.0;
  for (std::size_t e = 0; e < config.episodes_per_eval; ++e) {
    double log_ratio = 0.0;
    for (std::size_t k = 0; k < config.horizon; ++k) {
      const double alpha = policy.fraction(log_ratio);
      const auto step = coin_toss_log_step(alpha, rng, config.params);
      log_ratio += step.log_factor;
    }
    total += log_ratio / static_cast<double>(config.horizon);
  }
  return total / static_cast<double>(config.episodes_per_eval);
}

}  // namespace

ParametricTemporalResult train_temporal_parametric(const ParametricTemporalConfig& config,
                                                   std::uint64_t seed) {
  config.params.validate();
  ParametricTemporalResult out;
  RngStream rng(seed, 0);

  double best = mean_episode_log_growth(out.policy, config, rng);
  out.objective_trace.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    ParametricTemporalPolicy candidate = out.policy;
    candidate.theta0 += rng.next_uniform(-config.perturb_scale, config.perturb_scale);
    candidate.theta1 += rng.next_uniform(-config.perturb_scale, config.perturb_scale);
    const double score = mean_episode_log_growth(candidate, config, rng);
    if (score > best) {
      best = score;
      out.policy = candidate;
    }
    out.objective_trace.push_back(best);
  }
  return out;
}

TrajectoryRecord evaluate_temporal_fixed(const ParametricTemporalPolicy& policy,
                                         const CoinTossParams& params, std::size_t horizon,
                                         RngStream rng) {
  const double alpha = policy.fraction(0.0);
  return coin_toss_rollout(params, alpha, horizon, rng);
}

TrajectoryRecord evaluate_temporal_recursive(const ParametricTemporalPolicy& policy,
                                             const CoinTossParams& params, std::size_t horizon,
                                             RngStream rng) {
  if (horizon < 1) throw ShapeError("evaluate_temporal_recursive: horizon must be >= 1");
  TrajectoryRecord rec;
  rec.seed = rng.seed();
  rec.stream_id = rng.stream_id();
  rec.horizon = horizon;
  rec.initial_return = params.initial_return;
  rec.states.assign(horizon, 0);
  rec.actions.assign(horizon, 0);
  rec.rewards.reserve(horizon);
  rec.returns.reserve(horizon);
  rec.log_returns.reserve(horizon);

  const double log0 = std::log(params.initial_return);
  double log_ret = log0;
  double prev = params.initial_return;
  for (std::size_t k = 0; k < horizon; ++k) {
    const double alpha = policy.fraction(log_ret - log0);
    const auto step = coin_toss_log_step(alpha, rng, params);
    log_ret += step.log_factor;
    const double ret = std::exp(log_ret);
    rec.rewards.push_back(ret - prev);
    rec.returns.push_back(ret);
    rec.log_returns.push_back(log_ret);
    prev = ret;
  }
  return rec;
}

}  // namespace ergokit
