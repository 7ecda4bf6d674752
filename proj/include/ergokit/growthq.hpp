#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ergokit/optimizers.hpp"
#include "ergokit/types.hpp"

namespace ergokit {

struct GrowthQConfig {
  double lambda = 1.0;   // 0: plain multi-step Q target, 1: growth term only
  double gamma = 0.99;   // discount inside the expected-return component
  std::size_t window_n = 20;
  double learning_rate = 1.0;  // lr(s,a) = learning_rate / (1 + visit_decay * visits)
  double visit_decay = 1.0;
  EpsilonSchedule epsilon{1.0, 0.1, 0};
  std::size_t episode_length = 200;
  std::size_t total_steps = 100000;
  double ruin_log_floor = -50.0;  // per-step log growth charged when an episode ruins
  std::size_t curve_stride = 200;  // episodes between learning-curve rows
};

/// Ring of the last N+1 return values; the geometric-mean growth estimate is
/// defined only when the ring is full and every entry is positive.
class WindowBuffer {
 public:
  explicit WindowBuffer(std::size_t window_n);

  void reset();
  void push(double return_value);
  bool full() const { return count_ >= capacity(); }
  std::size_t window() const { return n_; }
  double oldest() const;
  double newest() const;

 private:
  std::size_t capacity() const { return n_ + 1; }
  std::size_t n_;
  std::size_t head_ = 0;   // next write position
  std::size_t count_ = 0;
  std::vector<double> ring_;
};

/// (R_k / R_{k-N})^{1/N}. Throws UndefinedGrowth when the buffer is not full
/// or holds a non-positive return.
double geometric_mean_window(const WindowBuffer& buffer);

/// Blended n-step backup target:
///   (1-lambda) * (reward_sum + gamma^n * max q_next)  +  lambda * n * log(growth_estimate)
/// The growth term scales with n so both components live on an n-step scale.
/// Each side is skipped outright at its zero weight, so lambda = 0 reproduces
/// the plain multi-step target bit for bit.
double regularized_backup(std::span<const double> q_next_row, double reward_sum,
                          double growth_estimate, std::size_t n_steps, bool terminal,
                          const GrowthQConfig& config);

/// Environment contract for the growth learner: finite states and actions,
/// per-step rewards, and a running return the growth window can track.
class GrowthQEnv {
 public:
  virtual ~GrowthQEnv() = default;
  virtual int n_states() const = 0;
  virtual int n_actions() const = 0;
  virtual double initial_return() const = 0;
  virtual int reset(RngStream& rng) = 0;

  struct StepOutcome {
    int next_state = 0;
    double reward = 0.0;
  };
  virtual StepOutcome step(int state, int action, double current_return, RngStream& rng) = 0;

  /// Stake fraction an action index stands for, when meaningful (NaN otherwise).
  virtual double action_fraction(int action) const;
};

/// Coin-toss wealth process over a discretized stake grid; single state.
class CoinTossGrowthEnv final : public GrowthQEnv {
 public:
  CoinTossGrowthEnv(CoinTossParams params, std::vector<double> action_grid);
  int n_states() const override { return 1; }
  int n_actions() const override { return static_cast<int>(grid_.size()); }
  double initial_return() const override { return params_.initial_return; }
  int reset(RngStream&) override { return 0; }
  StepOutcome step(int state, int action, double current_return, RngStream& rng) override;
  double action_fraction(int action) const override { return grid_.at(action); }

 private:
  CoinTossParams params_;
  std::vector<double> grid_;
};

/// Finite MDP with the running return seeded at initial_return so the growth
/// window is defined on additive-reward problems.
class MdpGrowthEnv final : public GrowthQEnv {
 public:
  MdpGrowthEnv(MdpSpec mdp, double initial_return = 100.0);
  int n_states() const override { return mdp_.n_states; }
  int n_actions() const override { return mdp_.n_actions; }
  double initial_return() const override { return initial_return_; }
  int reset(RngStream& rng) override;
  StepOutcome step(int state, int action, double current_return, RngStream& rng) override;

 private:
  MdpSpec mdp_;
  double initial_return_;
};

struct GrowthQResult {
  QTable q;
  PolicySpec greedy;
  double greedy_alpha = 0.0;  // NaN when actions are not stake fractions
  LearningCurve curve;
};

/// Multi-step Q-learning where the expected-return component uses forward-view
/// n-step targets and the growth component uses the same-width window
/// geometric mean. Episodes run for episode_length steps or until ruin
/// (return <= 0), which terminates the episode and charges ruin_log_floor per
/// remaining window step. The first updates of an episode fall back to plain
/// targets until the window fills, i.e. the lambda side needs a full window.
GrowthQResult multi_step_growth_q(GrowthQEnv& env, const GrowthQConfig& config,
                                  std::uint64_t seed);

}  // namespace ergokit
