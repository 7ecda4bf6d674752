#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ergokit/optimizers.hpp"
#include "ergokit/types.hpp"

namespace ergokit {

/// Scatter of (pre-step return, log of the squared step reward), the raw
/// material for the ergodicity transformation. Zero-reward steps have no
/// defined log and are excluded but counted.
struct ScatterSet {
  std::vector<double> x;  // return before the step
  std::vector<double> y;  // 2*log|reward|
  std::size_t source_horizon = 0;
  std::size_t excluded_zero_rewards = 0;
};

/// Throws InsufficientData when fewer than 10 usable points remain.
ScatterSet build_scatter(const TrajectoryRecord& traj);

enum class LoessScale { Auto, Linear, Log };

struct LoessConfig {
  double span = 0.3;                    // fraction of points per local window
  int degree = 1;                       // local polynomial degree (1 supported)
  int robustness_iterations = 0;        // bisquare reweighting passes
  std::size_t grid_points = 256;        // query grid size
  // Abscissa for the local windows. Auto switches to log(R) when every x is
  // positive and the range spans more than two decades: multiplicative
  // processes visit returns across hundreds of orders of magnitude, where
  // linear-distance windows degenerate.
  LoessScale scale = LoessScale::Auto;
};

struct LoessFit {
  std::vector<double> grid;   // strictly increasing query points
  std::vector<double> y_hat;  // smoothed values
  bool log_scale = false;     // windows were taken in log(x)
};

/// Local linear regression with tricube weights over the span-nearest
/// neighbors, evaluated on a quantile grid of the scatter x values (a uniform
/// grid would starve the low-return end of multiplicative processes where the
/// visited returns span many orders of magnitude). Degenerate windows (all x
/// identical) fall back to the weighted mean.
LoessFit loess_fit(const ScatterSet& scatter, const LoessConfig& config = {});

/// Smoothed values at caller-chosen query points (same algorithm).
std::vector<double> loess_at(const ScatterSet& scatter, std::span<const double> queries,
                             const LoessConfig& config = {});

/// Monotone transformation h on a grid, piecewise linear in the coordinate
/// the smoother ran in (R, or log R for multiplicative fits), extrapolated
/// with clamped end slopes in that same coordinate, normalized to
/// h(grid[0]) = 0. Log-coordinate interpolation matters: multiplicative grids
/// have cells spanning decades, where linear-in-R interpolation would degrade
/// h back into a raw-return map inside a cell.
enum class CurveCoordinate { LinearR, LogR };

class TransformationCurve {
 public:
  TransformationCurve() = default;
  TransformationCurve(std::vector<double> grid, std::vector<double> h_values,
                      CurveCoordinate coordinate = CurveCoordinate::LinearR);

  double operator()(double r) const;
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& h_values() const { return h_; }
  CurveCoordinate coordinate() const { return coordinate_; }
  void validate() const;

 private:
  double axis(double r) const;
  std::vector<double> grid_;
  std::vector<double> h_;
  CurveCoordinate coordinate_ = CurveCoordinate::LinearR;
};

/// Builds h from the smoothed scatter: h'(R) = exp(-y_hat(R)/2), the
/// variance-stabilizing reciprocal of the local reward scale, integrated by
/// the trapezoid rule. h is strictly increasing because h' > 0. Throws
/// FitError on non-finite smoothed values.
TransformationCurve integrate_transformation(const LoessFit& fit);

/// Increments h(R_k) - h(R_{k-1}) along a trajectory; same length as the
/// reward series and telescopes to h(R_T) - h(R_0) exactly.
std::vector<double> transform_increments(const TransformationCurve& h,
                                         const TrajectoryRecord& traj);

struct LearnTransformConfig {
  double probe_alpha = 1.0;
  std::size_t probe_horizon = 5000;
  std::size_t probe_retries = 5;  // fresh seeds on non-positive probe returns
  LoessConfig loess;
  ReinforceConfig reinforce;
};

struct LearnAndTrainResult {
  TransformationCurve curve;
  ScatterSet scatter;
  ReinforceResult training;
  TrajectoryRecord probe;
};

/// Stage 1 collects one long probe trajectory with the given stake and fits h;
/// stage 2 trains REINFORCE on the transformed-increment channel.
LearnAndTrainResult learn_and_train(const WealthDynamics& env, const LearnTransformConfig& config,
                                    std::uint64_t seed);

}  // namespace ergokit
