#pragma once

#include <cstddef>

#include "ergokit/types.hpp"

namespace ergokit {

// ---------------------------------------------------------------------------
// Coin-toss wealth process: stake a fraction alpha of the running return,
// win +win_mult*stake with probability p_win, else lose loss_mult*stake.
// ---------------------------------------------------------------------------

struct CoinTossParams {
  double initial_return = 100.0;
  double win_mult = 0.5;
  double loss_mult = 0.4;
  double p_win = 0.5;
  void validate() const;
};

struct CoinTossStep {
  double reward = 0.0;
  double next_return = 0.0;
  bool win = false;
};

/// One round in the linear domain: reward = +win_mult*alpha*R on a win,
/// -loss_mult*alpha*R otherwise.
CoinTossStep coin_toss_step(double prev_return, double alpha, RngStream& rng,
                            const CoinTossParams& params = {});

/// Log-domain round used by long rollouts: returns (log multiplier, win flag).
struct CoinTossLogStep {
  double log_factor = 0.0;
  bool win = false;
};
CoinTossLogStep coin_toss_log_step(double alpha, RngStream& rng, const CoinTossParams& params = {});

/// Closed-form ensemble mean E[R_T] = R0 * (1 + (p*win - (1-p)*loss) * alpha)^T.
double coin_toss_expected_return(const CoinTossParams& params, double alpha, std::size_t t);

/// Per-step expected log growth E[log(R_k/R_{k-1})]
///   = p*log(1 + win_mult*alpha) + (1-p)*log(1 - loss_mult*alpha).
/// Throws DomainError when 1 - loss_mult*alpha <= 0.
double coin_toss_time_growth(const CoinTossParams& params, double alpha);
double coin_toss_time_growth(double alpha);

struct OptimalFraction {
  double alpha = 0.0;
  bool has_edge = false;  // false: no alpha with positive growth exists
};

/// Kelly-style maximizer of the per-step log growth, clamped to [0,1]:
///   alpha* = (p*win - (1-p)*loss) / (win*loss).
OptimalFraction coin_toss_optimal_fraction(const CoinTossParams& params = {});

/// Fixed-fraction realization. Returns are generated in the log domain and
/// exposed both as `returns` (exp, may underflow to 0 on very long runs) and
/// `log_returns`.
TrajectoryRecord coin_toss_rollout(const CoinTossParams& params, double alpha,
                                   std::size_t horizon, RngStream rng);

std::vector<TrajectoryRecord> coin_toss_ensemble(const CoinTossParams& params, double alpha,
                                                 std::size_t horizon, std::size_t n_trajectories,
                                                 std::uint64_t base_seed);

// ---------------------------------------------------------------------------
// Additive control variant: the stake scales a fixed amount, not the running
// return, so the reward dynamics are additive and already ergodic.
// ---------------------------------------------------------------------------

struct AdditiveGambleParams {
  double initial_return = 100.0;
  double win_add = 5.0;
  double loss_add = 4.0;
  double p_win = 0.5;
};

TrajectoryRecord additive_gamble_rollout(const AdditiveGambleParams& params, double alpha,
                                         std::size_t horizon, RngStream rng);

// ---------------------------------------------------------------------------
// Two-action multiplicative bandit (safe factor vs risky binomial factor).
// ---------------------------------------------------------------------------

struct BanditParams {
  double r_safe = 1.0;
  double r_win = 1.5;
  double r_loss = 0.6;
  double p_loss = 0.5;
  /// Enforces r_loss < 1 <= r_safe < r_win and p_loss in [0,1].
  void validate() const;
};

enum class BanditAction { Safe = 0, Risk = 1 };
enum class BanditOutcomeLabel { Safe = 0, RiskWin = 1, RiskLoss = 2 };

struct BanditOutcome {
  double factor = 1.0;
  double next_return = 0.0;
  BanditOutcomeLabel label = BanditOutcomeLabel::Safe;
};

BanditOutcome bandit_step(double prev_return, BanditAction action, const BanditParams& params,
                          RngStream& rng);

/// Loss probability at which the one-step expected factors tie:
///   p_E = (r_win - r_safe) / (r_win - r_loss).
double indifference_expected(const BanditParams& params);

/// Loss probability at which the expected log factors tie:
///   p_T = log(r_win/r_safe) / log(r_win/r_loss).
double indifference_growth(const BanditParams& params);

// ---------------------------------------------------------------------------
// Delivery-robot MDP at per-trip granularity. States {operational, destroyed},
// actions {direct, safe}. The destroyed state is absorbing with reward
// reward_floor. A destroyed direct trip pays -step_cost*direct_steps (the trip
// costs are sunk, nothing is delivered), which makes the expected direct-trip
// reward exactly delivery_points*(1-destroy_prob) - step_cost*direct_steps.
// ---------------------------------------------------------------------------

struct DeliveryParams {
  double delivery_points = 100.0;
  double step_cost = 1.0;
  int direct_steps = 10;
  int safe_steps = 20;
  double destroy_prob = 0.01;
  double reward_floor = 0.0;
  void validate() const;
};

inline constexpr int kDeliveryOperational = 0;
inline constexpr int kDeliveryDestroyed = 1;
inline constexpr int kDeliveryDirect = 0;
inline constexpr int kDeliverySafe = 1;

MdpSpec delivery_mdp(const DeliveryParams& params = {});

}  // namespace ergokit
