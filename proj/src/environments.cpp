#include "ergokit/environments.hpp"

#include <cmath>
#include <string>

namespace ergokit {

void CoinTossParams::validate() const {
  if (!(initial_return > 0.0)) throw ShapeError("CoinTossParams: initial_return must be positive");
  if (!(loss_mult > 0.0 && loss_mult < 1.0)) throw ShapeError("CoinTossParams: loss_mult must be in (0,1)");
  if (!(win_mult > 0.0)) throw ShapeError("CoinTossParams: win_mult must be positive");
  if (!(p_win > 0.0 && p_win < 1.0)) throw ShapeError("CoinTossParams: p_win must be in (0,1)");
}

CoinTossStep coin_toss_step(double prev_return, double alpha, RngStream& rng,
                            const CoinTossParams& params) {
  CoinTossStep out;
  out.win = rng.next_bernoulli(params.p_win);
  const double mult = out.win ? params.win_mult : -params.loss_mult;
  out.reward = mult * alpha * prev_return;
  out.next_return = prev_return + out.reward;
  return out;
}

CoinTossLogStep coin_toss_log_step(double alpha, RngStream& rng, const CoinTossParams& params) {
  CoinTossLogStep out;
  out.win = rng.next_bernoulli(params.p_win);
  const double factor = out.win ? 1.0 + params.win_mult * alpha : 1.0 - params.loss_mult * alpha;
  out.log_factor = std::log(factor);
  return out;
}

double coin_toss_expected_return(const CoinTossParams& params, double alpha, std::size_t t) {
  const double drift = params.p_win * params.win_mult - (1.0 - params.p_win) * params.loss_mult;
  return params.initial_return * std::pow(1.0 + drift * alpha, static_cast<double>(t));
}

double coin_toss_time_growth(const CoinTossParams& params, double alpha) {
  const double down = 1.0 - params.loss_mult * alpha;
  if (!(down > 0.0)) {
    throw DomainError("coin_toss_time_growth: ruinous stake, 1 - loss_mult*alpha <= 0");
  }
  return params.p_win * std::log(1.0 + params.win_mult * alpha) +
         (1.0 - params.p_win) * std::log(down);
}

double coin_toss_time_growth(double alpha) { return coin_toss_time_growth(CoinTossParams{}, alpha); }

OptimalFraction coin_toss_optimal_fraction(const CoinTossParams& params) {
  OptimalFraction out;
  const double edge = params.p_win * params.win_mult - (1.0 - params.p_win) * params.loss_mult;
  if (!(edge > 0.0)) {
    // d/d alpha of the log growth at 0 equals the edge; no stake grows.
    out.alpha = 0.0;
    out.has_edge = false;
    return out;
  }
  out.has_edge = true;
  out.alpha = edge / (params.win_mult * params.loss_mult);
  if (out.alpha > 1.0) out.alpha = 1.0;
  return out;
}

TrajectoryRecord coin_toss_rollout(const CoinTossParams& params, double alpha,
                                   std::size_t horizon, RngStream rng) {
  if (horizon < 1) throw ShapeError("coin_toss_rollout: horizon must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ShapeError("coin_toss_rollout: alpha outside [0,1]");

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

  double log_ret = std::log(params.initial_return);
  double prev = params.initial_return;
  for (std::size_t k = 0; k < horizon; ++k) {
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

std::vector<TrajectoryRecord> coin_toss_ensemble(const CoinTossParams& params, double alpha,
                                                 std::size_t horizon, std::size_t n_trajectories,
                                                 std::uint64_t base_seed) {
  if (n_trajectories < 1) throw ShapeError("coin_toss_ensemble: need at least one trajectory");
  std::vector<TrajectoryRecord> out;
  out.reserve(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    out.push_back(coin_toss_rollout(params, alpha, horizon, RngStream(base_seed, i)));
  }
  return out;
}

TrajectoryRecord additive_gamble_rollout(const AdditiveGambleParams& params, double alpha,
                                         std::size_t horizon, RngStream rng) {
  if (horizon < 1) throw ShapeError("additive_gamble_rollout: horizon must be at least 1");
  TrajectoryRecord rec;
  rec.seed = rng.seed();
  rec.stream_id = rng.stream_id();
  rec.horizon = horizon;
  rec.initial_return = params.initial_return;
  rec.states.assign(horizon, 0);
  rec.actions.assign(horizon, 0);
  double ret = params.initial_return;
  for (std::size_t k = 0; k < horizon; ++k) {
    const bool win = rng.next_bernoulli(params.p_win);
    const double reward = win ? params.win_add * alpha : -params.loss_add * alpha;
    ret += reward;
    rec.rewards.push_back(reward);
    rec.returns.push_back(ret);
  }
  return rec;
}

void BanditParams::validate() const {
  if (!(r_loss < 1.0 && 1.0 <= r_safe && r_safe < r_win)) {
    throw ShapeError("BanditParams: need r_loss < 1 <= r_safe < r_win");
  }
  if (!(r_loss > 0.0)) throw ShapeError("BanditParams: r_loss must be positive");
  if (!(p_loss >= 0.0 && p_loss <= 1.0)) throw ShapeError("BanditParams: p_loss outside [0,1]");
}

BanditOutcome bandit_step(double prev_return, BanditAction action, const BanditParams& params,
                          RngStream& rng) {
  if (!(prev_return > 0.0)) throw ShapeError("bandit_step: running return must be positive");
  BanditOutcome out;
  if (action == BanditAction::Safe) {
    out.factor = params.r_safe;
    out.label = BanditOutcomeLabel::Safe;
  } else if (rng.next_bernoulli(params.p_loss)) {
    out.factor = params.r_loss;
    out.label = BanditOutcomeLabel::RiskLoss;
  } else {
    out.factor = params.r_win;
    out.label = BanditOutcomeLabel::RiskWin;
  }
  out.next_return = prev_return * out.factor;
  return out;
}

double indifference_expected(const BanditParams& params) {
  return (params.r_win - params.r_safe) / (params.r_win - params.r_loss);
}

double indifference_growth(const BanditParams& params) {
  return std::log(params.r_win / params.r_safe) / std::log(params.r_win / params.r_loss);
}

void DeliveryParams::validate() const {
  if (direct_steps < 1 || safe_steps < 1) throw ShapeError("DeliveryParams: trip lengths must be >= 1");
  if (!(destroy_prob >= 0.0 && destroy_prob <= 1.0)) {
    throw ShapeError("DeliveryParams: destroy_prob outside [0,1]");
  }
}

MdpSpec delivery_mdp(const DeliveryParams& params) {
  params.validate();
  MdpSpec mdp;
  mdp.n_states = 2;
  mdp.n_actions = 2;
  const std::size_t entries = 2 * 2 * 2;
  mdp.kernel.assign(entries, 0.0);
  mdp.reward.assign(entries, 0.0);
  mdp.initial_dist = {1.0, 0.0};

  auto idx = [](int s, int a, int s2) { return (static_cast<std::size_t>(s) * 2 + a) * 2 + s2; };

  const double direct_net = params.delivery_points - params.step_cost * params.direct_steps;
  const double safe_net = params.delivery_points - params.step_cost * params.safe_steps;
  const double destroyed_trip = -params.step_cost * params.direct_steps;

  // operational, direct: survive with 1-q, else destroyed mid-trip.
  mdp.kernel[idx(kDeliveryOperational, kDeliveryDirect, kDeliveryOperational)] = 1.0 - params.destroy_prob;
  mdp.kernel[idx(kDeliveryOperational, kDeliveryDirect, kDeliveryDestroyed)] = params.destroy_prob;
  mdp.reward[idx(kDeliveryOperational, kDeliveryDirect, kDeliveryOperational)] = direct_net;
  mdp.reward[idx(kDeliveryOperational, kDeliveryDirect, kDeliveryDestroyed)] = destroyed_trip;

  // operational, safe: deterministic slow trip.
  mdp.kernel[idx(kDeliveryOperational, kDeliverySafe, kDeliveryOperational)] = 1.0;
  mdp.reward[idx(kDeliveryOperational, kDeliverySafe, kDeliveryOperational)] = safe_net;

  // destroyed: absorbing under both actions.
  for (int a = 0; a < 2; ++a) {
    mdp.kernel[idx(kDeliveryDestroyed, a, kDeliveryDestroyed)] = 1.0;
    mdp.reward[idx(kDeliveryDestroyed, a, kDeliveryDestroyed)] = params.reward_floor;
  }

  mdp.validate();
  return mdp;
}

}  // namespace ergokit
