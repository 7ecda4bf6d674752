#include "ergokit/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "ergokit/rollout.hpp"

namespace ergokit {

namespace {

constexpr double kZ95 = 1.959963984540054;

// Kahan-compensated mean; diagnostics reduce long series.
double compensated_mean(std::span<const double> xs) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(xs.size());
}

MeanCi mean_ci(std::span<const double> xs) {
  MeanCi out;
  out.n = xs.size();
  out.mean = compensated_mean(xs);
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.ci_halfwidth = kZ95 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace

MeanCi ensemble_average_at(std::span<const TrajectoryRecord> trajs, std::size_t t) {
  if (trajs.empty()) throw EmptyInput("ensemble_average_at: empty ensemble");
  std::vector<double> vals;
  vals.reserve(trajs.size());
  for (const auto& traj : trajs) {
    if (traj.horizon <= t) throw ShapeError("ensemble_average_at: probe time beyond horizon");
    vals.push_back(traj.rewards[t]);
  }
  return mean_ci(vals);
}

double time_average(const TrajectoryRecord& traj) {
  if (traj.horizon < 1) throw ShapeError("time_average: empty trajectory");
  return compensated_mean(traj.rewards);
}

double time_average_se(const TrajectoryRecord& traj, std::size_t n_batches) {
  if (n_batches < 2) throw ShapeError("time_average_se: need at least two batches");
  if (traj.horizon < 2 * n_batches) n_batches = std::max<std::size_t>(2, traj.horizon / 2);
  const std::size_t batch = traj.horizon / n_batches;
  std::vector<double> means;
  means.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    std::span<const double> chunk(traj.rewards.data() + b * batch, batch);
    means.push_back(compensated_mean(chunk));
  }
  const double m = compensated_mean(means);
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(means.size() - 1));
  return sd / std::sqrt(static_cast<double>(means.size()));
}

EnsembleSource make_mdp_source(MdpSpec mdp, PolicySpec policy, std::optional<int> initial_state) {
  return [mdp = std::move(mdp), policy = std::move(policy), initial_state](
             std::uint64_t base_seed, std::uint64_t stream, std::size_t horizon) {
    return rollout(mdp, policy, horizon, RngStream(base_seed, stream), initial_state);
  };
}

EnsembleSource make_coin_toss_source(CoinTossParams params, double alpha) {
  return [params, alpha](std::uint64_t base_seed, std::uint64_t stream, std::size_t horizon) {
    return coin_toss_rollout(params, alpha, horizon, RngStream(base_seed, stream));
  };
}

ErgodicityGapReport ergodicity_gap(const EnsembleSource& source, std::size_t horizon,
                                   std::size_t n_trajectories,
                                   std::span<const std::size_t> probe_times, std::uint64_t seed) {
  if (n_trajectories < 1) throw EmptyInput("ergodicity_gap: need at least one trajectory");
  if (probe_times.empty()) throw EmptyInput("ergodicity_gap: need at least one probe time");
  for (std::size_t t : probe_times) {
    if (t >= horizon) throw ShapeError("ergodicity_gap: probe time beyond horizon");
  }

  ErgodicityGapReport rep;
  rep.probe_times.assign(probe_times.begin(), probe_times.end());
  rep.n_trajectories = n_trajectories;
  rep.horizon = horizon;

  std::vector<TrajectoryRecord> trajs;
  trajs.reserve(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) trajs.push_back(source(seed, i, horizon));

  for (std::size_t t : rep.probe_times) {
    const MeanCi mc = ensemble_average_at(trajs, t);
    rep.ensemble_mean_at.push_back(mc.mean);
    rep.ensemble_ci.push_back(mc.ci_halfwidth);
  }
  rep.time_mean_per_traj.reserve(n_trajectories);
  for (const auto& traj : trajs) rep.time_mean_per_traj.push_back(time_average(traj));
  const MeanCi tm = mean_ci(rep.time_mean_per_traj);
  rep.time_mean_avg = tm.mean;
  rep.time_mean_ci = tm.ci_halfwidth;
  rep.gap = std::abs(rep.time_mean_avg - rep.ensemble_mean_at.back());
  return rep;
}

GrowthEstimate growth_rate_estimate(std::span<const double> returns) {
  if (returns.size() < 2) throw ShapeError("growth_rate_estimate: need at least two returns");
  GrowthEstimate est;
  est.window = returns.size() - 1;
  double sum = 0.0;
  for (std::size_t k = 1; k < returns.size(); ++k) {
    const double ratio = returns[k] / returns[k - 1];
    if (!(ratio > 0.0) || !std::isfinite(ratio)) {
      ++est.non_positive_ratios;
      continue;
    }
    sum += std::log(ratio);
    ++est.valid_steps;
  }
  est.per_step_log_growth = est.valid_steps > 0 ? sum / static_cast<double>(est.valid_steps) : 0.0;
  return est;
}

GrowthEstimate growth_rate_estimate(const TrajectoryRecord& traj) {
  if (!traj.log_returns.empty()) {
    GrowthEstimate est;
    est.window = traj.log_returns.size();
    double prev = std::log(traj.initial_return);
    double sum = 0.0;
    for (double lr : traj.log_returns) {
      if (!std::isfinite(lr) || !std::isfinite(prev)) {
        ++est.non_positive_ratios;
      } else {
        sum += lr - prev;
        ++est.valid_steps;
      }
      prev = lr;
    }
    est.per_step_log_growth = est.valid_steps > 0 ? sum / static_cast<double>(est.valid_steps) : 0.0;
    return est;
  }
  std::vector<double> series;
  series.reserve(traj.returns.size() + 1);
  series.push_back(traj.initial_return);
  series.insert(series.end(), traj.returns.begin(), traj.returns.end());
  return growth_rate_estimate(series);
}

}  // namespace ergokit
