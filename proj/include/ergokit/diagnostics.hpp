#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ergokit/environments.hpp"
#include "ergokit/types.hpp"

namespace ergokit {

struct MeanCi {
  double mean = 0.0;
  double ci_halfwidth = 0.0;  // 95%, normal approximation
  std::size_t n = 0;
};

/// Sample mean and 95% CI of the step-t reward across trajectories.
/// Throws EmptyInput on an empty ensemble, ShapeError if any horizon <= t.
MeanCi ensemble_average_at(std::span<const TrajectoryRecord> trajs, std::size_t t);

/// Mean reward over the steps of one trajectory.
double time_average(const TrajectoryRecord& traj);

/// Standard error of the time average by batch means (the naive iid formula
/// understates the error on autocorrelated series).
double time_average_se(const TrajectoryRecord& traj, std::size_t n_batches = 100);

struct ErgodicityGapReport {
  std::vector<std::size_t> probe_times;
  std::vector<double> ensemble_mean_at;  // per probe time
  std::vector<double> ensemble_ci;       // per probe time
  std::vector<double> time_mean_per_traj;
  double time_mean_avg = 0.0;
  double time_mean_ci = 0.0;
  double gap = 0.0;  // |avg of time means - ensemble mean at last probe|
  std::size_t n_trajectories = 0;
  std::size_t horizon = 0;
};

/// Produces the trajectory for (base_seed, stream, horizon).
using EnsembleSource =
    std::function<TrajectoryRecord(std::uint64_t base_seed, std::uint64_t stream, std::size_t horizon)>;

EnsembleSource make_mdp_source(MdpSpec mdp, PolicySpec policy,
                               std::optional<int> initial_state = std::nullopt);
EnsembleSource make_coin_toss_source(CoinTossParams params, double alpha);

ErgodicityGapReport ergodicity_gap(const EnsembleSource& source, std::size_t horizon,
                                   std::size_t n_trajectories,
                                   std::span<const std::size_t> probe_times, std::uint64_t seed);

struct GrowthEstimate {
  double per_step_log_growth = 0.0;  // mean log(R_k / R_{k-1}) over usable increments
  std::size_t window = 0;            // increments considered
  std::size_t valid_steps = 0;       // usable increments
  std::size_t non_positive_ratios = 0;
  bool flagged() const { return non_positive_ratios > 0; }
};

/// Mean log ratio of successive entries of a return series. Non-positive
/// ratios are counted into the flag, never silently dropped from the report.
GrowthEstimate growth_rate_estimate(std::span<const double> returns);

/// Trajectory overload; prefers the log-domain series when the environment
/// provided one.
GrowthEstimate growth_rate_estimate(const TrajectoryRecord& traj);

}  // namespace ergokit
