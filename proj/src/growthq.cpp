#include "ergokit/growthq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ergokit {

WindowBuffer::WindowBuffer(std::size_t window_n) : n_(window_n), ring_(window_n + 1, 0.0) {
  if (window_n < 1) throw ShapeError("WindowBuffer: window must be at least 1");
}

void WindowBuffer::reset() {
  head_ = 0;
  count_ = 0;
}

void WindowBuffer::push(double return_value) {
  ring_[head_] = return_value;
  head_ = (head_ + 1) % capacity();
  if (count_ < capacity()) ++count_;
}

double WindowBuffer::oldest() const {
  if (!full()) throw UndefinedGrowth("WindowBuffer: not full");
  return ring_[head_];  // next overwrite slot holds the oldest entry
}

double WindowBuffer::newest() const {
  if (count_ == 0) throw UndefinedGrowth("WindowBuffer: empty");
  return ring_[(head_ + capacity() - 1) % capacity()];
}

double geometric_mean_window(const WindowBuffer& buffer) {
  if (!buffer.full()) throw UndefinedGrowth("geometric_mean_window: buffer not full");
  const double oldest = buffer.oldest();
  const double newest = buffer.newest();
  if (!(oldest > 0.0) || !(newest > 0.0)) {
    throw UndefinedGrowth("geometric_mean_window: non-positive return in window");
  }
  return std::pow(newest / oldest, 1.0 / static_cast<double>(buffer.window()));
}

double regularized_backup(std::span<const double> q_next_row, double reward_sum,
                          double growth_estimate, std::size_t n_steps, bool terminal,
                          const GrowthQConfig& config) {
  double target = 0.0;
  if (config.lambda != 1.0) {
    double expected = reward_sum;
    if (!terminal) {
      double best = q_next_row.front();
      for (double q : q_next_row) best = std::max(best, q);
      expected += std::pow(config.gamma, static_cast<double>(n_steps)) * best;
    }
    target += config.lambda == 0.0 ? expected : (1.0 - config.lambda) * expected;
  }
  if (config.lambda != 0.0) {
    target += config.lambda * static_cast<double>(n_steps) * std::log(growth_estimate);
  }
  return target;
}

double GrowthQEnv::action_fraction(int) const {
  return std::numeric_limits<double>::quiet_NaN();
}

CoinTossGrowthEnv::CoinTossGrowthEnv(CoinTossParams params, std::vector<double> action_grid)
    : params_(params), grid_(std::move(action_grid)) {
  params_.validate();
  if (grid_.empty()) throw ShapeError("CoinTossGrowthEnv: empty action grid");
}

GrowthQEnv::StepOutcome CoinTossGrowthEnv::step(int, int action, double current_return,
                                                RngStream& rng) {
  const auto s = coin_toss_step(current_return, grid_.at(action), rng, params_);
  return {0, s.reward};
}

MdpGrowthEnv::MdpGrowthEnv(MdpSpec mdp, double initial_return)
    : mdp_(std::move(mdp)), initial_return_(initial_return) {
  mdp_.validate();
}

int MdpGrowthEnv::reset(RngStream& rng) { return rng.next_index(mdp_.initial_dist); }

GrowthQEnv::StepOutcome MdpGrowthEnv::step(int state, int action, double, RngStream& rng) {
  const std::size_t base =
      (static_cast<std::size_t>(state) * mdp_.n_actions + action) * mdp_.n_states;
  std::span<const double> row(mdp_.kernel.data() + base, static_cast<std::size_t>(mdp_.n_states));
  const int next = rng.next_index(row);
  return {next, mdp_.reward[base + next]};
}

GrowthQResult multi_step_growth_q(GrowthQEnv& env, const GrowthQConfig& config,
                                  std::uint64_t seed) {
  if (config.episode_length < 1) throw ShapeError("multi_step_growth_q: episode_length must be >= 1");
  if (config.window_n < 1) throw ShapeError("multi_step_growth_q: window must be >= 1");
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw ShapeError("multi_step_growth_q: lambda outside [0,1]");
  }

  const int n_states = env.n_states();
  const int n_actions = env.n_actions();
  const std::size_t window = config.window_n;

  GrowthQResult result;
  result.q = QTable(n_states, n_actions);
  std::vector<std::uint64_t> visits(result.q.values.size(), 0);

  std::vector<double> gamma_pow(window + 1, 1.0);
  for (std::size_t k = 1; k <= window; ++k) gamma_pow[k] = gamma_pow[k - 1] * config.gamma;

  RngStream rng(seed, 0);
  std::vector<int> states;     // length T+1, includes the landing state
  std::vector<int> actions;    // length T
  std::vector<double> rewards; // length T
  std::vector<double> returns; // length T+1, running return including R0

  std::size_t global_step = 0;
  std::size_t episode = 0;

  auto update = [&](int s, int a, double target) {
    const std::size_t idx = static_cast<std::size_t>(s) * n_actions + a;
    const double lr =
        config.learning_rate / (1.0 + config.visit_decay * static_cast<double>(visits[idx]));
    ++visits[idx];
    result.q.values[idx] += lr * (target - result.q.values[idx]);
  };

  double episode_target_sum = 0.0;
  std::size_t episode_target_count = 0;

  while (global_step < config.total_steps) {
    states.clear();
    actions.clear();
    rewards.clear();
    returns.clear();

    int state = env.reset(rng);
    states.push_back(state);
    returns.push_back(env.initial_return());
    bool ruined = false;

    while (actions.size() < config.episode_length && global_step < config.total_steps) {
      const double eps = config.epsilon.at(global_step, config.total_steps);
      int action;
      if (rng.next_bernoulli(eps)) {
        action = static_cast<int>(rng.next_below(n_actions));
      } else {
        action = result.q.greedy_action(state);
      }
      const auto out = env.step(state, action, returns.back(), rng);
      actions.push_back(action);
      rewards.push_back(out.reward);
      returns.push_back(returns.back() + out.reward);
      states.push_back(out.next_state);
      state = out.next_state;
      ++global_step;
      if (!(returns.back() > 0.0)) {
        ruined = true;  // ruin terminates the episode
        break;
      }
    }

    const std::size_t T = actions.size();
    episode_target_sum = 0.0;
    episode_target_count = 0;
    for (std::size_t t = 0; t < T; ++t) {
      double target;
      if (t + window <= T) {
        // Full forward window: blended target.
        double sum = 0.0;
        for (std::size_t k = 0; k < window; ++k) sum += gamma_pow[k] * rewards[t + k];
        const bool terminal = ruined && (t + window == T);
        double growth = 1.0;
        if (config.lambda != 0.0) {
          if (returns[t] > 0.0 && returns[t + window] > 0.0) {
            growth = std::pow(returns[t + window] / returns[t],
                              1.0 / static_cast<double>(window));
          } else {
            growth = std::exp(config.ruin_log_floor);
          }
        }
        std::span<const double> row(
            result.q.values.data() + static_cast<std::size_t>(states[t + window]) * n_actions,
            static_cast<std::size_t>(n_actions));
        target = regularized_backup(row, sum, growth, window, terminal, config);
      } else if (ruined) {
        // Window runs into ruin: truncated reward sum, no bootstrap, floored growth.
        double sum = 0.0;
        for (std::size_t k = 0; t + k < T; ++k) sum += gamma_pow[k] * rewards[t + k];
        target = 0.0;
        if (config.lambda != 1.0) {
          target += config.lambda == 0.0 ? sum : (1.0 - config.lambda) * sum;
        }
        if (config.lambda != 0.0) {
          target += config.lambda * static_cast<double>(window) * config.ruin_log_floor;
        }
      } else if (config.lambda == 0.0) {
        // Time-limit tail, plain truncated target with bootstrap at the cut.
        const std::size_t n = T - t;
        double sum = 0.0;
        for (std::size_t k = 0; k < n; ++k) sum += gamma_pow[k] * rewards[t + k];
        std::span<const double> row(
            result.q.values.data() + static_cast<std::size_t>(states[T]) * n_actions,
            static_cast<std::size_t>(n_actions));
        target = regularized_backup(row, sum, 1.0, n, false, config);
      } else {
        // Tail windows shorter than N carry no growth estimate at lambda > 0;
        // mixing a raw-scale fallback here would pollute growth-scale values.
        continue;
      }
      update(states[t], actions[t], target);
      episode_target_sum += target;
      ++episode_target_count;
    }

    if (episode % config.curve_stride == 0 || global_step >= config.total_steps) {
      LearningCurvePoint pt;
      pt.iteration = global_step;
      pt.objective =
          episode_target_count > 0 ? episode_target_sum / static_cast<double>(episode_target_count)
                                   : 0.0;
      pt.mean_final_return = returns.back();
      pt.mean_alpha = env.action_fraction(result.q.greedy_action(0));
      if (T > 0 && returns.back() > 0.0 && returns.front() > 0.0) {
        pt.growth_estimate =
            std::exp(std::log(returns.back() / returns.front()) / static_cast<double>(T));
      } else {
        pt.growth_estimate = std::numeric_limits<double>::quiet_NaN();
      }
      result.curve.push_back(pt);
    }
    ++episode;
  }

  std::vector<int> greedy(n_states);
  for (int s = 0; s < n_states; ++s) greedy[s] = result.q.greedy_action(s);
  result.greedy = PolicySpec::deterministic(std::move(greedy), n_actions);
  result.greedy_alpha = env.action_fraction(result.q.greedy_action(0));
  return result;
}

}  // namespace ergokit
