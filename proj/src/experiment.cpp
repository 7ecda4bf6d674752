#include "ergokit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "ergokit/chain.hpp"
#include "ergokit/csvio.hpp"
#include "ergokit/diagnostics.hpp"
#include "ergokit/environments.hpp"
#include "ergokit/growthq.hpp"
#include "ergokit/optimizers.hpp"
#include "ergokit/rollout.hpp"
#include "ergokit/svgplot.hpp"
#include "ergokit/temporal.hpp"
#include "ergokit/transform.hpp"

namespace ergokit {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T def) {
  if (j.is_object() && j.contains(key)) return j.at(key).get<T>();
  return def;
}

const json& sub_or_empty(const json& j, const char* key) {
  static const json empty = json::object();
  if (j.is_object() && j.contains(key)) return j.at(key);
  return empty;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
  return out;
}

CoinTossParams coin_params_from(const json& params) {
  CoinTossParams p;
  p.initial_return = get_or(params, "initial_return", p.initial_return);
  p.win_mult = get_or(params, "win_mult", p.win_mult);
  p.loss_mult = get_or(params, "loss_mult", p.loss_mult);
  p.p_win = get_or(params, "p_win", p.p_win);
  p.validate();
  return p;
}

AdditiveGambleParams additive_params_from(const json& params) {
  AdditiveGambleParams p;
  p.initial_return = get_or(params, "initial_return", p.initial_return);
  p.win_add = get_or(params, "win_add", p.win_add);
  p.loss_add = get_or(params, "loss_add", p.loss_add);
  p.p_win = get_or(params, "p_win", p.p_win);
  return p;
}

BanditParams bandit_params_from(const json& params) {
  BanditParams p;
  p.r_safe = get_or(params, "r_safe", p.r_safe);
  p.r_win = get_or(params, "r_win", p.r_win);
  p.r_loss = get_or(params, "r_loss", p.r_loss);
  p.p_loss = get_or(params, "p_loss", p.p_loss);
  p.validate();
  return p;
}

DeliveryParams delivery_params_from(const json& params) {
  DeliveryParams p;
  p.delivery_points = get_or(params, "delivery_points", p.delivery_points);
  p.step_cost = get_or(params, "step_cost", p.step_cost);
  p.direct_steps = get_or(params, "direct_steps", p.direct_steps);
  p.safe_steps = get_or(params, "safe_steps", p.safe_steps);
  p.destroy_prob = get_or(params, "destroy_prob", p.destroy_prob);
  p.reward_floor = get_or(params, "reward_floor", p.reward_floor);
  p.validate();
  return p;
}

std::string env_name(const json& environment) {
  if (!environment.is_object() || !environment.contains("name")) {
    throw ConfigError("environment.name missing");
  }
  return environment.at("name").get<std::string>();
}

PolicySpec delivery_policy_from(const json& params) {
  const std::string which = get_or<std::string>(params, "policy", "direct");
  if (which == "direct") return PolicySpec::deterministic({kDeliveryDirect, kDeliveryDirect}, 2);
  if (which == "safe") return PolicySpec::deterministic({kDeliverySafe, kDeliverySafe}, 2);
  throw ConfigError("delivery policy must be 'direct' or 'safe', got '" + which + "'");
}

/// (MdpSpec, tabular policy) for MDP-backed environments.
std::pair<MdpSpec, PolicySpec> mdp_env_from(const json& environment) {
  const std::string name = env_name(environment);
  const json& params = sub_or_empty(environment, "params");
  if (name == "delivery") {
    return {delivery_mdp(delivery_params_from(params)), delivery_policy_from(params)};
  }
  if (name == "mdp_file") {
    const MdpSpec mdp = load_mdp_spec(params.at("path").get<std::string>());
    PolicySpec policy = params.contains("policy_path")
                            ? load_policy_spec(params.at("policy_path").get<std::string>())
                            : PolicySpec::deterministic(std::vector<int>(mdp.n_states, 0),
                                                        mdp.n_actions);
    return {mdp, policy};
  }
  throw UnknownComponent("environment '" + name + "' is not MDP-backed; candidates: delivery, mdp_file");
}

WealthDynamics wealth_env_from(const json& environment) {
  const std::string name = env_name(environment);
  const json& params = sub_or_empty(environment, "params");
  if (name == "coin_toss") return make_coin_toss_dynamics(coin_params_from(params));
  if (name == "additive_gamble") return make_additive_gamble_dynamics(additive_params_from(params));
  throw UnknownComponent("environment '" + name +
                         "' is not a wealth process; candidates: coin_toss, additive_gamble");
}

ReinforceConfig reinforce_config_from(const json& cfg) {
  ReinforceConfig rc;
  rc.episodes = get_or<std::size_t>(cfg, "episodes", rc.episodes);
  rc.horizon = get_or<std::size_t>(cfg, "horizon", rc.horizon);
  rc.learning_rate = get_or(cfg, "learning_rate", rc.learning_rate);
  rc.batch_size = get_or<std::size_t>(cfg, "batch_size", rc.batch_size);
  rc.temperature = get_or(cfg, "temperature", rc.temperature);
  rc.grid_points = get_or<std::size_t>(cfg, "grid_points", rc.grid_points);
  rc.curve_stride = get_or<std::size_t>(cfg, "curve_stride", rc.curve_stride);
  const std::string baseline = get_or<std::string>(cfg, "baseline", "mean");
  if (baseline == "mean") {
    rc.baseline = BaselineKind::Mean;
  } else if (baseline == "none") {
    rc.baseline = BaselineKind::None;
  } else {
    throw ConfigError("baseline must be 'mean' or 'none'");
  }
  return rc;
}

struct EvalGrowth {
  std::vector<double> per_step_log_growth;  // per trajectory
  std::vector<double> final_returns;
  double median_log_growth = 0.0;
  double median_final_return = 0.0;
};

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

EvalGrowth evaluate_policy_growth(const WealthDynamics& env, const DiscretizedFractionPolicy& policy,
                                  std::size_t horizon, std::size_t n, std::uint64_t seed) {
  EvalGrowth out;
  const auto probs = policy.probabilities();
  for (std::size_t i = 0; i < n; ++i) {
    RngStream rng(seed, i);
    double log_ret = std::log(env.initial_return);
    const double log0 = log_ret;
    for (std::size_t k = 0; k < horizon; ++k) {
      const int arm = rng.next_index(probs);
      log_ret = env.step(log_ret, policy.grid[arm], rng).second;
      if (!std::isfinite(log_ret)) break;
    }
    out.per_step_log_growth.push_back((log_ret - log0) / static_cast<double>(horizon));
    out.final_returns.push_back(std::exp(log_ret));
  }
  out.median_log_growth = median_of(out.per_step_log_growth);
  out.median_final_return = median_of(out.final_returns);
  return out;
}

void write_eval_growth_csv(const fs::path& path, const EvalGrowth& eval) {
  CsvTable t;
  t.header = {"trajectory", "per_step_log_growth", "final_return"};
  for (std::size_t i = 0; i < eval.per_step_log_growth.size(); ++i) {
    t.rows.push_back({std::to_string(i), format_double(eval.per_step_log_growth[i]),
                      format_double(eval.final_returns[i])});
  }
  write_csv(path, t);
}

using MetricSink = std::vector<MetricRow>;
using FileSink = std::vector<std::string>;

struct RunContext {
  const json& environment;
  const json& cfg;
  std::uint64_t seed;
  fs::path out_dir;
  FileSink& files;
  MetricSink& metrics;
};

void push_metric(RunContext& ctx, const std::string& name, double value) {
  ctx.metrics.push_back({ctx.seed, name, value});
}

std::string seed_tag(std::uint64_t seed) { return "_s" + std::to_string(seed); }

void note_file(RunContext& ctx, const fs::path& rel) { ctx.files.push_back(rel.string()); }

// --- algorithm: trajectories ------------------------------------------------

void run_trajectories(RunContext& ctx) {
  const std::size_t horizon = get_or<std::size_t>(ctx.cfg, "horizon", 1000);
  const std::string name = env_name(ctx.environment);
  TrajectoryRecord rec;
  if (name == "coin_toss") {
    const json& params = sub_or_empty(ctx.environment, "params");
    rec = coin_toss_rollout(coin_params_from(params), get_or(params, "alpha", 1.0), horizon,
                            RngStream(ctx.seed, 0));
  } else if (name == "additive_gamble") {
    const json& params = sub_or_empty(ctx.environment, "params");
    rec = additive_gamble_rollout(additive_params_from(params), get_or(params, "alpha", 1.0),
                                  horizon, RngStream(ctx.seed, 0));
  } else {
    auto [mdp, policy] = mdp_env_from(ctx.environment);
    rec = rollout(mdp, policy, horizon, RngStream(ctx.seed, 0));
  }
  const fs::path rel = fs::path("traj" + seed_tag(ctx.seed) + ".csv");
  write_trajectory_csv(ctx.out_dir / rel, rec);
  note_file(ctx, rel);
  push_metric(ctx, "final_return", rec.final_return());
}

// --- algorithm: expectation_check -------------------------------------------

void run_expectation_check(RunContext& ctx) {
  const json& params = sub_or_empty(ctx.environment, "params");
  const CoinTossParams p = coin_params_from(params);
  const double alpha = get_or(params, "alpha", 1.0);
  const std::size_t n = get_or<std::size_t>(ctx.cfg, "n_trajectories", 100000);
  const std::vector<std::size_t> horizons =
      get_or(ctx.cfg, "horizons", std::vector<std::size_t>{1, 2});

  CsvTable t;
  t.header = {"T", "mc_mean", "ci", "closed_form"};
  for (std::size_t T : horizons) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto rec = coin_toss_rollout(p, alpha, T, RngStream(ctx.seed, i));
      sum += rec.final_return();
      sumsq += rec.final_return() * rec.final_return();
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, (sumsq - static_cast<double>(n) * mean * mean) /
                                         static_cast<double>(n - 1));
    const double ci = 1.959963984540054 * std::sqrt(var / static_cast<double>(n));
    const double closed = coin_toss_expected_return(p, alpha, T);
    t.rows.push_back({std::to_string(T), format_double(mean), format_double(ci),
                      format_double(closed)});
    push_metric(ctx, "mc_mean_T" + std::to_string(T), mean);
    push_metric(ctx, "abs_err_T" + std::to_string(T), std::abs(mean - closed));
  }
  const fs::path rel = fs::path("expectation" + seed_tag(ctx.seed) + ".csv");
  write_csv(ctx.out_dir / rel, t);
  note_file(ctx, rel);
}

// --- algorithm: ergodicity_gap ----------------------------------------------

void run_ergodicity_gap(RunContext& ctx) {
  const std::size_t horizon = get_or<std::size_t>(ctx.cfg, "horizon", 1000);
  const std::size_t n = get_or<std::size_t>(ctx.cfg, "n_trajectories", 1000);
  std::vector<std::size_t> probes =
      get_or(ctx.cfg, "probe_times", std::vector<std::size_t>{0, horizon / 2, horizon - 1});

  EnsembleSource source;
  const std::string name = env_name(ctx.environment);
  if (name == "coin_toss") {
    const json& params = sub_or_empty(ctx.environment, "params");
    source = make_coin_toss_source(coin_params_from(params), get_or(params, "alpha", 1.0));
  } else {
    auto [mdp, policy] = mdp_env_from(ctx.environment);
    std::optional<int> start;
    const json& params = sub_or_empty(ctx.environment, "params");
    if (params.contains("initial_state")) start = params.at("initial_state").get<int>();
    source = make_mdp_source(std::move(mdp), std::move(policy), start);
  }
  const auto rep = ergodicity_gap(source, horizon, n, probes, ctx.seed);

  const fs::path rel_e = fs::path("gap_ensemble" + seed_tag(ctx.seed) + ".csv");
  const fs::path rel_t = fs::path("gap_time" + seed_tag(ctx.seed) + ".csv");
  write_gap_ensemble_csv(ctx.out_dir / rel_e, rep);
  write_gap_time_csv(ctx.out_dir / rel_t, rep);
  note_file(ctx, rel_e);
  note_file(ctx, rel_t);
  push_metric(ctx, "gap", rep.gap);
  push_metric(ctx, "time_mean_avg", rep.time_mean_avg);
  push_metric(ctx, "ensemble_mean_last", rep.ensemble_mean_at.back());
}

// --- algorithm: reinforce (raw channel) -------------------------------------

void run_reinforce(RunContext& ctx) {
  const WealthDynamics env = wealth_env_from(ctx.environment);
  const ReinforceConfig rc = reinforce_config_from(ctx.cfg);
  const auto result = reinforce_train(env, RewardChannel::RawRewards, nullptr, rc, ctx.seed);

  const fs::path rel_c = fs::path("curve" + seed_tag(ctx.seed) + ".csv");
  write_learning_curve_csv(ctx.out_dir / rel_c, result.curve, false);
  note_file(ctx, rel_c);

  const std::size_t eval_n = get_or<std::size_t>(ctx.cfg, "eval_trajectories", 100);
  const std::size_t eval_h = get_or<std::size_t>(ctx.cfg, "eval_horizon", 1000);
  const auto eval = evaluate_policy_growth(env, result.policy, eval_h, eval_n, ctx.seed + 1);
  const fs::path rel_e = fs::path("eval_growth" + seed_tag(ctx.seed) + ".csv");
  write_eval_growth_csv(ctx.out_dir / rel_e, eval);
  note_file(ctx, rel_e);

  push_metric(ctx, "mean_alpha", result.policy.mean_alpha());
  push_metric(ctx, "median_log_growth", eval.median_log_growth);
  push_metric(ctx, "median_final_return", eval.median_final_return);
}

// --- algorithm: transform_pipeline ------------------------------------------

void run_transform_pipeline(RunContext& ctx) {
  const WealthDynamics env = wealth_env_from(ctx.environment);
  LearnTransformConfig cfg;
  cfg.probe_alpha = get_or(ctx.cfg, "probe_alpha", cfg.probe_alpha);
  cfg.probe_horizon = get_or<std::size_t>(ctx.cfg, "probe_horizon", cfg.probe_horizon);
  const json& loess = sub_or_empty(ctx.cfg, "loess");
  cfg.loess.span = get_or(loess, "span", cfg.loess.span);
  cfg.loess.grid_points = get_or<std::size_t>(loess, "grid_points", cfg.loess.grid_points);
  cfg.loess.robustness_iterations =
      get_or(loess, "robustness_iterations", cfg.loess.robustness_iterations);
  cfg.reinforce = reinforce_config_from(sub_or_empty(ctx.cfg, "reinforce"));

  const auto result = learn_and_train(env, cfg, ctx.seed);

  const fs::path rel_h = fs::path("transformation" + seed_tag(ctx.seed) + ".csv");
  write_transformation_csv(ctx.out_dir / rel_h, result.curve);
  note_file(ctx, rel_h);
  const fs::path rel_c = fs::path("curve" + seed_tag(ctx.seed) + ".csv");
  write_learning_curve_csv(ctx.out_dir / rel_c, result.training.curve, false);
  note_file(ctx, rel_c);

  // Affine-invariant agreement between the learned map and log over the probe.
  double corr = 0.0;
  {
    std::vector<double> hx, lx;
    for (std::size_t k = 0; k < result.probe.horizon; ++k) {
      const double r = result.probe.returns[k];
      if (!(r > 0.0)) continue;
      hx.push_back(result.curve(r));
      lx.push_back(std::log(r));
    }
    const double n = static_cast<double>(hx.size());
    double mh = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < hx.size(); ++i) {
      mh += hx[i];
      ml += lx[i];
    }
    mh /= n;
    ml /= n;
    double cov = 0.0, vh = 0.0, vl = 0.0;
    for (std::size_t i = 0; i < hx.size(); ++i) {
      cov += (hx[i] - mh) * (lx[i] - ml);
      vh += (hx[i] - mh) * (hx[i] - mh);
      vl += (lx[i] - ml) * (lx[i] - ml);
    }
    corr = cov / std::sqrt(vh * vl);
  }

  const std::size_t eval_n = get_or<std::size_t>(ctx.cfg, "eval_trajectories", 100);
  const std::size_t eval_h = get_or<std::size_t>(ctx.cfg, "eval_horizon", 1000);
  const auto eval = evaluate_policy_growth(env, result.training.policy, eval_h, eval_n, ctx.seed + 1);
  const fs::path rel_e = fs::path("eval_growth" + seed_tag(ctx.seed) + ".csv");
  write_eval_growth_csv(ctx.out_dir / rel_e, eval);
  note_file(ctx, rel_e);

  push_metric(ctx, "corr_log", corr);
  push_metric(ctx, "mean_alpha", result.training.policy.mean_alpha());
  push_metric(ctx, "median_log_growth", eval.median_log_growth);
}

// --- algorithm: growth_q ------------------------------------------------------

GrowthQConfig growthq_config_from(const json& cfg) {
  GrowthQConfig gc;
  gc.lambda = get_or(cfg, "lambda", gc.lambda);
  gc.gamma = get_or(cfg, "gamma", gc.gamma);
  gc.window_n = get_or<std::size_t>(cfg, "window_n", gc.window_n);
  gc.learning_rate = get_or(cfg, "lr0", gc.learning_rate);
  gc.visit_decay = get_or(cfg, "lr_decay", gc.visit_decay);
  gc.epsilon.eps0 = get_or(cfg, "eps0", gc.epsilon.eps0);
  gc.epsilon.eps_end = get_or(cfg, "eps_decay", gc.epsilon.eps_end);
  gc.episode_length = get_or<std::size_t>(cfg, "episode_length", gc.episode_length);
  gc.total_steps = get_or<std::size_t>(cfg, "total_steps", gc.total_steps);
  gc.ruin_log_floor = get_or(cfg, "ruin_log_floor", gc.ruin_log_floor);
  gc.curve_stride = get_or<std::size_t>(cfg, "curve_stride", gc.curve_stride);
  return gc;
}

void run_growth_q(RunContext& ctx) {
  const GrowthQConfig gc = growthq_config_from(ctx.cfg);
  const std::string name = env_name(ctx.environment);
  std::unique_ptr<GrowthQEnv> env;
  if (name == "coin_toss") {
    const json& params = sub_or_empty(ctx.environment, "params");
    const std::size_t grid_points = get_or<std::size_t>(ctx.cfg, "grid_points", 21);
    env = std::make_unique<CoinTossGrowthEnv>(coin_params_from(params),
                                              DiscretizedFractionPolicy::uniform(grid_points).grid);
  } else {
    auto [mdp, policy] = mdp_env_from(ctx.environment);
    (void)policy;  // the learner picks its own actions
    env = std::make_unique<MdpGrowthEnv>(std::move(mdp),
                                         get_or(ctx.cfg, "initial_return", 100.0));
  }
  const auto result = multi_step_growth_q(*env, gc, ctx.seed);

  const fs::path rel_c = fs::path("growth_curve" + seed_tag(ctx.seed) + ".csv");
  write_learning_curve_csv(ctx.out_dir / rel_c, result.curve, true);
  note_file(ctx, rel_c);
  if (std::isfinite(result.greedy_alpha)) push_metric(ctx, "greedy_alpha", result.greedy_alpha);
  push_metric(ctx, "greedy_action_0", result.greedy.actions.at(0));
}

// --- algorithm: tabular_q ------------------------------------------------------

void run_tabular_q(RunContext& ctx) {
  auto [mdp, policy] = mdp_env_from(ctx.environment);
  (void)policy;
  QLearningConfig qc;
  qc.steps = get_or<std::size_t>(ctx.cfg, "steps", qc.steps);
  qc.learning_rate = get_or(ctx.cfg, "lr0", qc.learning_rate);
  qc.visit_decay = get_or(ctx.cfg, "lr_decay", qc.visit_decay);
  qc.discount = get_or(ctx.cfg, "discount", qc.discount);
  qc.epsilon.eps0 = get_or(ctx.cfg, "eps0", qc.epsilon.eps0);
  qc.epsilon.eps_end = get_or(ctx.cfg, "eps_decay", qc.epsilon.eps_end);
  qc.episode_length = get_or<std::size_t>(ctx.cfg, "episode_length", qc.episode_length);
  const auto result = tabular_q_learning(mdp, qc, ctx.seed);

  CsvTable t;
  t.header = {"state", "action", "q"};
  for (int s = 0; s < result.q.n_states; ++s) {
    for (int a = 0; a < result.q.n_actions; ++a) {
      t.rows.push_back({std::to_string(s), std::to_string(a), format_double(result.q.at(s, a))});
    }
  }
  const fs::path rel = fs::path("qtable" + seed_tag(ctx.seed) + ".csv");
  write_csv(ctx.out_dir / rel, t);
  note_file(ctx, rel);
  push_metric(ctx, "greedy_action_0", result.greedy.actions.at(0));
}

// --- algorithm: preference_sweep ----------------------------------------------

std::vector<double> p_grid_from(const json& cfg) {
  if (cfg.contains("p_grid")) return cfg.at("p_grid").get<std::vector<double>>();
  const double from = get_or(cfg, "p_from", 0.0);
  const double to = get_or(cfg, "p_to", 1.0);
  const double step = get_or(cfg, "p_step", 0.05);
  std::vector<double> grid;
  for (double p = from; p <= to + 1e-12; p += step) grid.push_back(std::min(p, 1.0));
  return grid;
}

void run_preference_sweep(RunContext& ctx) {
  BanditParams params = bandit_params_from(sub_or_empty(ctx.environment, "params"));
  const std::string rule = get_or<std::string>(ctx.cfg, "rule", "one_step_expected");
  const std::vector<double> grid = p_grid_from(ctx.cfg);
  const std::size_t agents = get_or<std::size_t>(ctx.cfg, "agents_per_point", 16);

  PreferenceCurve curve;
  if (rule == "monte_carlo_trajectory") {
    McTrajectoryConfig mc;
    mc.episodes = get_or<std::size_t>(ctx.cfg, "episodes", mc.episodes);
    mc.epsilon_train = get_or(ctx.cfg, "epsilon", mc.epsilon_train);
    const std::size_t horizon = get_or<std::size_t>(ctx.cfg, "steps_per_episode", 20);
    curve.p_grid = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      params.p_loss = grid[i];
      double sum = 0.0, sumsq = 0.0;
      for (std::size_t a = 0; a < agents; ++a) {
        const auto agent =
            monte_carlo_trajectory_update(params, horizon, mc, ctx.seed, i * agents + a);
        const double f = safe_frequency(agent, ctx.seed + 17);
        sum += f;
        sumsq += f * f;
      }
      const double n = static_cast<double>(agents);
      const double mean = sum / n;
      curve.safe_preference.push_back(mean);
      double ci = 0.0;
      if (agents > 1) {
        const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
        ci = 1.959963984540054 * std::sqrt(var / n);
      }
      curve.ci.push_back(ci);
    }
    const auto [p_star, in_range] = indifference_from_curve(curve.p_grid, curve.safe_preference);
    curve.empirical_indifference = p_star;
    curve.crossing_in_range = in_range;
  } else {
    BanditTrainConfig tc;
    if (rule == "one_step_expected") {
      tc.rule = UpdateRule::OneStepExpected;
    } else if (rule == "temporal_compounded") {
      tc.rule = UpdateRule::TemporalCompounded;
    } else {
      throw UnknownComponent("rule '" + rule +
                             "'; candidates: one_step_expected, temporal_compounded, "
                             "monte_carlo_trajectory");
    }
    tc.episodes = get_or<std::size_t>(ctx.cfg, "episodes", tc.episodes);
    tc.steps_per_episode = get_or<std::size_t>(ctx.cfg, "steps_per_episode", tc.steps_per_episode);
    tc.eval_steps = get_or<std::size_t>(ctx.cfg, "eval_steps", tc.eval_steps);
    tc.epsilon_train = get_or(ctx.cfg, "epsilon", tc.epsilon_train);
    curve = preference_sweep(tc, params, grid, agents, ctx.seed);
  }

  const fs::path rel_p = fs::path("preference" + seed_tag(ctx.seed) + ".csv");
  write_preference_csv(ctx.out_dir / rel_p, curve);
  note_file(ctx, rel_p);
  const fs::path rel_i = fs::path("indifference" + seed_tag(ctx.seed) + ".csv");
  write_indifference_csv(ctx.out_dir / rel_i, rule, curve.empirical_indifference,
                         indifference_expected(params), indifference_growth(params));
  note_file(ctx, rel_i);
  push_metric(ctx, "empirical_indifference", curve.empirical_indifference);
  push_metric(ctx, "crossing_in_range", curve.crossing_in_range ? 1.0 : 0.0);
}

// --- algorithm: temporal_parametric ---------------------------------------------

void run_temporal_parametric(RunContext& ctx) {
  ParametricTemporalConfig cfg;
  cfg.params = coin_params_from(sub_or_empty(ctx.environment, "params"));
  cfg.iterations = get_or<std::size_t>(ctx.cfg, "iterations", cfg.iterations);
  cfg.episodes_per_eval = get_or<std::size_t>(ctx.cfg, "episodes_per_eval", cfg.episodes_per_eval);
  cfg.horizon = get_or<std::size_t>(ctx.cfg, "horizon", cfg.horizon);
  cfg.perturb_scale = get_or(ctx.cfg, "perturb_scale", cfg.perturb_scale);
  const auto result = train_temporal_parametric(cfg, ctx.seed);

  CsvTable trace;
  trace.header = {"iteration", "best_log_growth"};
  for (std::size_t i = 0; i < result.objective_trace.size(); ++i) {
    trace.rows.push_back({std::to_string(i), format_double(result.objective_trace[i])});
  }
  const fs::path rel_tr = fs::path("trace" + seed_tag(ctx.seed) + ".csv");
  write_csv(ctx.out_dir / rel_tr, trace);
  note_file(ctx, rel_tr);

  const std::size_t eval_n = get_or<std::size_t>(ctx.cfg, "eval_trajectories", 5);
  const std::size_t eval_h = get_or<std::size_t>(ctx.cfg, "eval_horizon", 1000);
  std::vector<double> growth_fixed, growth_recursive;
  for (std::size_t i = 0; i < eval_n; ++i) {
    const auto fixed =
        evaluate_temporal_fixed(result.policy, cfg.params, eval_h, RngStream(ctx.seed + 1, i));
    const auto recur =
        evaluate_temporal_recursive(result.policy, cfg.params, eval_h, RngStream(ctx.seed + 2, i));
    growth_fixed.push_back(growth_rate_estimate(fixed).per_step_log_growth);
    growth_recursive.push_back(growth_rate_estimate(recur).per_step_log_growth);
    const fs::path rel_f =
        fs::path("eval_fixed" + seed_tag(ctx.seed) + "_" + std::to_string(i) + ".csv");
    const fs::path rel_r =
        fs::path("eval_recursive" + seed_tag(ctx.seed) + "_" + std::to_string(i) + ".csv");
    write_trajectory_csv(ctx.out_dir / rel_f, fixed);
    write_trajectory_csv(ctx.out_dir / rel_r, recur);
    note_file(ctx, rel_f);
    note_file(ctx, rel_r);
  }
  push_metric(ctx, "fraction_at_w0", result.policy.fraction(0.0));
  push_metric(ctx, "growth_fixed_median", median_of(growth_fixed));
  push_metric(ctx, "growth_recursive_median", median_of(growth_recursive));
}

using AlgorithmFn = void (*)(RunContext&);

const std::vector<std::pair<std::string, AlgorithmFn>>& algorithm_registry() {
  static const std::vector<std::pair<std::string, AlgorithmFn>> reg = {
      {"trajectories", run_trajectories},
      {"expectation_check", run_expectation_check},
      {"ergodicity_gap", run_ergodicity_gap},
      {"reinforce", run_reinforce},
      {"transform_pipeline", run_transform_pipeline},
      {"growth_q", run_growth_q},
      {"tabular_q", run_tabular_q},
      {"preference_sweep", run_preference_sweep},
      {"temporal_parametric", run_temporal_parametric},
  };
  return reg;
}

void emit_default_plots(const std::string& algorithm, const fs::path& out_dir, FileSink& files) {
  // Second pass over already-written CSVs; rendering never feeds the metrics.
  std::vector<std::string> written = files;
  auto plot_trajectory_like = [&](const std::string& prefix, const std::string& out_name) {
    PlotRequest req;
    for (const auto& f : written) {
      if (f.rfind(prefix, 0) == 0 && f.size() >= 4 && f.substr(f.size() - 4) == ".csv") {
        req.inputs.push_back(out_dir / f);
      }
    }
    if (req.inputs.empty()) return;
    req.kind = "trajectories";
    req.output = out_dir / out_name;
    render_plot(req);
    files.push_back(out_name);
  };
  if (algorithm == "trajectories" || algorithm == "temporal_parametric") {
    plot_trajectory_like("traj", "trajectories.svg");
    plot_trajectory_like("eval_fixed", "eval_fixed.svg");
    plot_trajectory_like("eval_recursive", "eval_recursive.svg");
  } else if (algorithm == "preference_sweep") {
    PlotRequest req;
    for (const auto& f : written) {
      if (f.rfind("preference", 0) == 0) req.inputs.push_back(out_dir / f);
      if (f.rfind("indifference", 0) == 0) req.inputs.push_back(out_dir / f);
    }
    req.kind = "preference";
    req.output = out_dir / "preference.svg";
    render_plot(req);
    files.push_back("preference.svg");
  } else if (algorithm == "transform_pipeline") {
    PlotRequest req;
    for (const auto& f : written) {
      if (f.rfind("transformation", 0) == 0) req.inputs.push_back(out_dir / f);
    }
    req.kind = "transformation";
    req.output = out_dir / "transformation.svg";
    render_plot(req);
    files.push_back("transformation.svg");
  } else if (algorithm == "growth_q" || algorithm == "reinforce") {
    PlotRequest req;
    for (const auto& f : written) {
      if (f.rfind("curve", 0) == 0 || f.rfind("growth_curve", 0) == 0) {
        req.inputs.push_back(out_dir / f);
      }
    }
    if (req.inputs.empty()) return;
    req.kind = "curve";
    req.y_column = "mean_alpha";
    req.output = out_dir / "curve.svg";
    render_plot(req);
    files.push_back("curve.svg");
  } else if (algorithm == "ergodicity_gap") {
    PlotRequest req;
    for (const auto& f : written) {
      if (f.rfind("gap_ensemble", 0) == 0) req.inputs.push_back(out_dir / f);
    }
    req.kind = "gap";
    req.output = out_dir / "gap.svg";
    render_plot(req);
    files.push_back("gap.svg");
  }
}

void write_metrics_csv(const fs::path& out_dir, const std::vector<MetricRow>& metrics,
                       FileSink& files) {
  CsvTable t;
  t.header = {"seed", "metric", "value"};
  for (const auto& m : metrics) {
    t.rows.push_back({std::to_string(m.seed), m.name, format_double(m.value)});
  }
  write_csv(out_dir / "metrics.csv", t);
  files.push_back("metrics.csv");
}

void write_manifest(const fs::path& out_dir, const ExperimentConfig& config, FileSink& files,
                    const std::map<std::uint64_t, double>& wall_clock_ms) {
  files.push_back("manifest.json");
  json m;
  m["experiment"] = config.experiment;
  m["config_hash"] = config_hash(config.raw);
  m["version"] = kArtifactVersion;
  m["files"] = files;
  json wc = json::object();
  for (const auto& [seed, ms] : wall_clock_ms) wc["seed_" + std::to_string(seed)] = ms;
  m["wall_clock_ms"] = wc;
  std::ofstream out(out_dir / "manifest.json");
  out << m.dump(2) << "\n";
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, path.string());
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& origin) {
  ExperimentConfig cfg;
  cfg.raw = j;
  try {
    cfg.experiment = j.at("experiment").get<std::string>();
    cfg.environment = j.at("environment");
    cfg.algorithm = j.at("algorithm");
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    cfg.output_dir = j.at("output_dir").get<std::string>();
    cfg.emit_plots = get_or(j, "emit_plots", false);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (cfg.seeds.empty()) throw ConfigError(origin + ": seeds must be non-empty");
  if (cfg.experiment.empty()) throw ConfigError(origin + ": experiment name must be non-empty");
  if (!cfg.environment.is_object() || !cfg.environment.contains("name")) {
    throw ConfigError(origin + ": environment.name missing");
  }
  if (!cfg.algorithm.is_object() || !cfg.algorithm.contains("name")) {
    throw ConfigError(origin + ": algorithm.name missing");
  }
  return cfg;
}

std::string config_hash(const json& j) {
  const std::string dump = j.dump();  // objects dump with sorted keys
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

std::vector<std::string> registered_environments() {
  return {"coin_toss", "additive_gamble", "multiplicative_bandit", "delivery", "mdp_file"};
}

std::vector<std::string> registered_algorithms() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : algorithm_registry()) names.push_back(name);
  return names;
}

fs::path resolve_output_dir(const fs::path& configured) {
  const char* root = std::getenv("ERGOKIT_OUTPUT_ROOT");
  if (root != nullptr && *root != '\0' && configured.is_relative()) {
    return fs::path(root) / configured;
  }
  return configured;
}

RunResult run_experiment(const ExperimentConfig& config) {
  const std::string alg_name = config.algorithm.at("name").get<std::string>();
  AlgorithmFn fn = nullptr;
  for (const auto& [name, candidate] : algorithm_registry()) {
    if (name == alg_name) fn = candidate;
  }
  if (fn == nullptr) {
    throw UnknownComponent("unknown algorithm '" + alg_name +
                           "'; candidates: " + join(registered_algorithms()));
  }
  const std::string environment = env_name(config.environment);
  const auto envs = registered_environments();
  if (std::find(envs.begin(), envs.end(), environment) == envs.end()) {
    throw UnknownComponent("unknown environment '" + environment +
                           "'; candidates: " + join(envs));
  }

  RunResult result;
  result.output_dir = resolve_output_dir(config.output_dir);
  fs::create_directories(result.output_dir);

  const json& cfg = sub_or_empty(config.algorithm, "config");
  std::map<std::uint64_t, double> wall_clock;
  for (std::uint64_t seed : config.seeds) {
    const auto start = std::chrono::steady_clock::now();
    RunContext ctx{config.environment, cfg, seed, result.output_dir, result.files, result.metrics};
    fn(ctx);
    wall_clock[seed] = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  }
  if (config.emit_plots) emit_default_plots(alg_name, result.output_dir, result.files);
  write_metrics_csv(result.output_dir, result.metrics, result.files);
  write_manifest(result.output_dir, config, result.files, wall_clock);
  return result;
}

RunResult sweep_experiment(const ExperimentConfig& config) {
  if (!config.raw.contains("sweep")) throw ConfigError("sweep config needs a 'sweep' block");
  const json& sweep = config.raw.at("sweep");
  if (!sweep.contains("parameter") || !sweep.contains("values")) {
    throw ConfigError("sweep block needs 'parameter' and 'values'");
  }
  const std::string parameter = sweep.at("parameter").get<std::string>();
  const json values = sweep.at("values");
  if (!values.is_array() || values.empty()) throw ConfigError("sweep values must be non-empty");

  RunResult total;
  total.output_dir = resolve_output_dir(config.output_dir);
  fs::create_directories(total.output_dir);

  CsvTable long_table;
  long_table.header = {"parameter", "value", "seed", "metric", "metric_value"};

  for (std::size_t i = 0; i < values.size(); ++i) {
    json point = config.raw;
    point.erase("sweep");
    // Dotted path into the config json.
    json* node = &point;
    std::string rest = parameter;
    while (true) {
      const auto dot = rest.find('.');
      const std::string key = rest.substr(0, dot);
      if (dot == std::string::npos) {
        (*node)[key] = values[i];
        break;
      }
      if (!node->contains(key)) (*node)[key] = json::object();
      node = &(*node)[key];
      rest = rest.substr(dot + 1);
    }
    point["output_dir"] = (config.output_dir / ("point_" + std::to_string(i))).string();
    const ExperimentConfig point_cfg = ExperimentConfig::from_json(point, "sweep point " + std::to_string(i));
    const RunResult r = run_experiment(point_cfg);
    const std::string value_str =
        values[i].is_string() ? values[i].get<std::string>() : values[i].dump();
    for (const auto& f : r.files) {
      total.files.push_back(("point_" + std::to_string(i) + "/") + f);
    }
    for (const auto& m : r.metrics) {
      long_table.rows.push_back({parameter, value_str, std::to_string(m.seed), m.name,
                                 format_double(m.value)});
      total.metrics.push_back(m);
    }
  }
  write_csv(total.output_dir / "sweep.csv", long_table);
  total.files.push_back("sweep.csv");
  std::map<std::uint64_t, double> wall_clock;
  write_manifest(total.output_dir, config, total.files, wall_clock);
  return total;
}

void render_plot(const PlotRequest& request) {
  if (request.inputs.empty()) throw SchemaError("render_plot: no input CSVs");
  static const std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                   "#bcbd22", "#17becf"};
  PlotSpec spec;
  if (request.kind == "trajectories") {
    spec.title = "return vs step";
    spec.x_label = "step";
    spec.y_label = "return";
    spec.log_y = true;
    double initial = 0.0;
    bool have_initial = false;
    std::size_t idx = 0;
    for (const auto& input : request.inputs) {
      const CsvTable t = read_csv(input);
      if (t.rows.empty()) throw SchemaError(input.string() + ": empty CSV");
      PlotSeries s;
      s.x = t.numeric_column("step");
      s.y = t.numeric_column("return");
      if (!have_initial) {
        const auto rewards = t.numeric_column("reward");
        initial = s.y.front() - rewards.front();
        have_initial = true;
      }
      s.color = palette[idx++ % palette.size()];
      spec.series.push_back(std::move(s));
    }
    if (have_initial && initial > 0.0) spec.h_lines.push_back({initial, "#d62728"});
  } else if (request.kind == "preference") {
    spec.title = "safe preference vs loss probability";
    spec.x_label = "p";
    spec.y_label = "safe preference";
    std::size_t idx = 0;
    for (const auto& input : request.inputs) {
      const CsvTable t = read_csv(input);
      if (t.rows.empty()) throw SchemaError(input.string() + ": empty CSV");
      if (t.column("analytic_pE") >= 0) {
        spec.v_lines.push_back({t.numeric_column("analytic_pE").front(), "#d62728"});
        spec.v_lines.push_back({t.numeric_column("analytic_pT").front(), "#2ca02c"});
        continue;
      }
      PlotSeries s;
      s.x = t.numeric_column("p");
      s.y = t.numeric_column("safe_preference");
      s.color = palette[idx++ % palette.size()];
      spec.series.push_back(std::move(s));
    }
    spec.h_lines.push_back({0.5, "#7f7f7f"});
  } else if (request.kind == "curve") {
    spec.title = "learning curve";
    spec.x_label = "iteration";
    const std::string column = request.y_column.empty() ? "objective" : request.y_column;
    spec.y_label = column;
    std::size_t idx = 0;
    for (const auto& input : request.inputs) {
      const CsvTable t = read_csv(input);
      if (t.rows.empty()) throw SchemaError(input.string() + ": empty CSV");
      PlotSeries s;
      s.x = t.numeric_column("iteration");
      s.y = t.numeric_column(column);
      s.color = palette[idx++ % palette.size()];
      spec.series.push_back(std::move(s));
    }
  } else if (request.kind == "transformation") {
    spec.title = "learned transformation";
    spec.x_label = "R";
    spec.y_label = "h(R)";
    std::size_t idx = 0;
    for (const auto& input : request.inputs) {
      const CsvTable t = read_csv(input);
      if (t.rows.empty()) throw SchemaError(input.string() + ": empty CSV");
      PlotSeries s;
      s.x = t.numeric_column("R");
      s.y = t.numeric_column("h");
      s.color = palette[idx++ % palette.size()];
      spec.series.push_back(std::move(s));
    }
  } else if (request.kind == "gap") {
    spec.title = "ensemble average vs probe time";
    spec.x_label = "t";
    spec.y_label = "ensemble mean";
    std::size_t idx = 0;
    for (const auto& input : request.inputs) {
      const CsvTable t = read_csv(input);
      if (t.rows.empty()) throw SchemaError(input.string() + ": empty CSV");
      PlotSeries s;
      s.x = t.numeric_column("t");
      s.y = t.numeric_column("ensemble_mean");
      s.color = palette[idx++ % palette.size()];
      spec.series.push_back(std::move(s));
    }
  } else {
    throw SchemaError("unknown plot kind '" + request.kind +
                      "'; candidates: trajectories, preference, curve, transformation, gap");
  }
  write_svg_plot(request.output, spec);
}

AnalyzeChainResult analyze_chain_files(const fs::path& mdp_path,
                                       const std::optional<fs::path>& policy_path, bool want_dot) {
  const MdpSpec mdp = load_mdp_spec(mdp_path);
  PolicySpec policy;
  if (policy_path) {
    policy = load_policy_spec(*policy_path);
  } else if (mdp.n_actions == 1) {
    policy = PolicySpec::deterministic(std::vector<int>(mdp.n_states, 0), 1);
  } else {
    throw ConfigError(mdp_path.string() + ": MDP has " + std::to_string(mdp.n_actions) +
                      " actions, a policy file is required");
  }
  const TransitionMatrix P = induced_chain(mdp, policy);
  const std::vector<double> gbar = induced_rewards(mdp, policy);
  const ChainReport rep = classify_chain(P, &gbar);
  AnalyzeChainResult out;
  out.report_text = render_chain_report(rep);
  if (want_dot) out.dot_text = chain_report_dot(P, rep);
  return out;
}

}  // namespace ergokit
