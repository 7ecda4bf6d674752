#include "ergokit/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ergokit/transform.hpp"

namespace ergokit {

DiscretizedFractionPolicy DiscretizedFractionPolicy::uniform(std::size_t points) {
  DiscretizedFractionPolicy p;
  p.grid.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    p.grid[i] = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
  }
  p.logits.assign(points, 0.0);
  p.validate();
  return p;
}

std::vector<double> DiscretizedFractionPolicy::probabilities() const {
  std::vector<double> probs(logits.size());
  double max_logit = logits.front();
  for (double l : logits) max_logit = std::max(max_logit, l);
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp((logits[i] - max_logit) / temperature);
    z += probs[i];
  }
  for (double& p : probs) p /= z;
  return probs;
}

int DiscretizedFractionPolicy::sample(RngStream& rng) const {
  const auto probs = probabilities();
  return rng.next_index(probs);
}

double DiscretizedFractionPolicy::mean_alpha() const {
  const auto probs = probabilities();
  double mean = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) mean += probs[i] * grid[i];
  return mean;
}

double DiscretizedFractionPolicy::greedy_alpha() const {
  const std::size_t best =
      std::distance(logits.begin(), std::max_element(logits.begin(), logits.end()));
  return grid[best];
}

void DiscretizedFractionPolicy::validate() const {
  if (grid.empty() || grid.size() != logits.size()) {
    throw ShapeError("DiscretizedFractionPolicy: grid/logits size mismatch");
  }
  if (!(temperature > 0.0)) throw ShapeError("DiscretizedFractionPolicy: temperature must be positive");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw ShapeError("DiscretizedFractionPolicy: grid outside [0,1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ShapeError("DiscretizedFractionPolicy: grid not increasing");
    if (!std::isfinite(logits[i])) throw ShapeError("DiscretizedFractionPolicy: non-finite logit");
  }
}

WealthDynamics make_coin_toss_dynamics(const CoinTossParams& params) {
  params.validate();
  WealthDynamics dyn;
  dyn.initial_return = params.initial_return;
  dyn.step = [params](double log_return, double alpha, RngStream& rng) {
    const auto s = coin_toss_log_step(alpha, rng, params);
    const double next_log = log_return + s.log_factor;
    const double reward = std::exp(next_log) - std::exp(log_return);
    return std::make_pair(reward, next_log);
  };
  return dyn;
}

WealthDynamics make_additive_gamble_dynamics(const AdditiveGambleParams& params) {
  WealthDynamics dyn;
  dyn.initial_return = params.initial_return;
  dyn.step = [params](double log_return, double alpha, RngStream& rng) {
    const bool win = rng.next_bernoulli(params.p_win);
    const double reward = win ? params.win_add * alpha : -params.loss_add * alpha;
    const double next = std::exp(log_return) + reward;
    // Additive dynamics can cross zero; surface that as -inf log return.
    return std::make_pair(reward, next > 0.0 ? std::log(next) : -HUGE_VAL);
  };
  return dyn;
}

ReinforceResult reinforce_train(const WealthDynamics& env, RewardChannel channel,
                                const TransformationCurve* transform, const ReinforceConfig& config,
                                std::uint64_t seed) {
  if (channel == RewardChannel::TransformedIncrements && transform == nullptr) {
    throw ShapeError("reinforce_train: transformed channel needs a transformation curve");
  }
  if (config.batch_size < 1 || config.horizon < 1) {
    throw ShapeError("reinforce_train: batch_size and horizon must be positive");
  }

  ReinforceResult result;
  result.policy = DiscretizedFractionPolicy::uniform(config.grid_points);
  result.policy.temperature = config.temperature;
  auto& policy = result.policy;
  const std::size_t n_arms = policy.grid.size();

  RngStream rng(seed, 0);
  const std::size_t n_batches = config.episodes / config.batch_size;
  std::vector<double> grad(n_arms);
  std::vector<double> episode_objectives(config.batch_size);
  std::vector<double> finals(config.batch_size);
  std::vector<std::vector<int>> chosen(config.batch_size);
  std::vector<std::vector<double>> to_go(config.batch_size);  // return-to-go per step
  std::vector<double> step_baseline(config.horizon);

  for (std::size_t b = 0; b < n_batches; ++b) {
    const auto probs = policy.probabilities();
    for (std::size_t e = 0; e < config.batch_size; ++e) {
      chosen[e].clear();
      to_go[e].assign(config.horizon, 0.0);
      double log_ret = std::log(env.initial_return);
      double objective = 0.0;
      for (std::size_t k = 0; k < config.horizon; ++k) {
        const int arm = rng.next_index(probs);
        chosen[e].push_back(arm);
        const double prev_return = std::exp(log_ret);
        auto [reward, next_log] = env.step(log_ret, policy.grid[arm], rng);
        double channel_reward;
        if (channel == RewardChannel::RawRewards) {
          channel_reward = reward;
        } else {
          channel_reward = (*transform)(std::exp(next_log)) - (*transform)(prev_return);
        }
        to_go[e][k] = channel_reward;  // suffix-summed below
        objective += channel_reward;
        log_ret = next_log;
      }
      for (std::size_t k = config.horizon - 1; k-- > 0;) to_go[e][k] += to_go[e][k + 1];
      episode_objectives[e] = objective;
      finals[e] = std::exp(log_ret);
    }

    // Causal (reward-to-go) estimator; the Mean baseline is the per-step
    // batch mean of the to-go returns.
    std::fill(step_baseline.begin(), step_baseline.end(), 0.0);
    if (config.baseline == BaselineKind::Mean) {
      for (std::size_t e = 0; e < config.batch_size; ++e) {
        for (std::size_t k = 0; k < config.horizon; ++k) step_baseline[k] += to_go[e][k];
      }
      for (double& v : step_baseline) v /= static_cast<double>(config.batch_size);
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t e = 0; e < config.batch_size; ++e) {
      for (std::size_t k = 0; k < config.horizon; ++k) {
        const int arm = chosen[e][k];
        const double advantage = to_go[e][k] - step_baseline[k];
        // d log softmax / d logit = (1[a=arm] - pi(a)) / temperature
        for (std::size_t a = 0; a < n_arms; ++a) {
          const double indicator = (static_cast<int>(a) == arm) ? 1.0 : 0.0;
          grad[a] += (indicator - probs[a]) / policy.temperature * advantage;
        }
      }
    }
    for (std::size_t a = 0; a < n_arms; ++a) {
      policy.logits[a] += config.learning_rate * grad[a] / static_cast<double>(config.batch_size);
      if (!std::isfinite(policy.logits[a])) {
        throw DivergenceError("reinforce_train: logits diverged at batch " + std::to_string(b));
      }
    }

    if (b % config.curve_stride == 0 || b + 1 == n_batches) {
      LearningCurvePoint pt;
      pt.iteration = (b + 1) * config.batch_size;
      double obj = 0.0, fin = 0.0;
      for (std::size_t e = 0; e < config.batch_size; ++e) {
        obj += episode_objectives[e];
        fin += finals[e];
      }
      pt.objective = obj / static_cast<double>(config.batch_size);
      pt.mean_final_return = fin / static_cast<double>(config.batch_size);
      pt.mean_alpha = policy.mean_alpha();
      result.curve.push_back(pt);
    }
  }
  return result;
}

int QTable::greedy_action(int s) const {
  int best = 0;
  for (int a = 1; a < n_actions; ++a) {
    if (at(s, a) > at(s, best)) best = a;
  }
  return best;
}

double QTable::max_value(int s) const { return at(s, greedy_action(s)); }

double EpsilonSchedule::at(std::size_t step, std::size_t total_steps) const {
  const std::size_t decay = decay_steps > 0 ? decay_steps : std::max<std::size_t>(1, total_steps / 10);
  if (step >= decay) return eps_end;
  const double frac = static_cast<double>(step) / static_cast<double>(decay);
  return eps0 + (eps_end - eps0) * frac;
}

QLearningResult tabular_q_learning(const MdpSpec& mdp, const QLearningConfig& config,
                                   std::uint64_t seed) {
  mdp.validate();
  QLearningResult result;
  result.q = QTable(mdp.n_states, mdp.n_actions);
  std::vector<std::uint64_t> visits(result.q.values.size(), 0);

  RngStream rng(seed, 0);
  int state = rng.next_index(mdp.initial_dist);
  for (std::size_t t = 0; t < config.steps; ++t) {
    if (config.episode_length > 0 && t > 0 && t % config.episode_length == 0) {
      state = rng.next_index(mdp.initial_dist);
    }
    const double eps = config.epsilon.at(t, config.steps);
    int action;
    if (rng.next_bernoulli(eps)) {
      action = static_cast<int>(rng.next_below(mdp.n_actions));
    } else {
      action = result.q.greedy_action(state);
    }
    const std::size_t base = static_cast<std::size_t>(state) * mdp.n_actions + action;
    std::span<const double> row(mdp.kernel.data() + base * mdp.n_states,
                                static_cast<std::size_t>(mdp.n_states));
    const int next = rng.next_index(row);
    const double reward = mdp.reward[base * mdp.n_states + next];

    const double lr = config.learning_rate /
                      (1.0 + config.visit_decay * static_cast<double>(visits[base]));
    ++visits[base];
    const double target = reward + config.discount * result.q.max_value(next);
    result.q.values[base] += lr * (target - result.q.values[base]);
    state = next;
  }

  std::vector<int> greedy(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) greedy[s] = result.q.greedy_action(s);
  result.greedy = PolicySpec::deterministic(std::move(greedy), mdp.n_actions);
  return result;
}

}  // namespace ergokit
