#include "ergokit/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ergokit {

ScatterSet build_scatter(const TrajectoryRecord& traj) {
  ScatterSet scatter;
  scatter.source_horizon = traj.horizon;
  double prev_return = traj.initial_return;
  for (std::size_t k = 0; k < traj.horizon; ++k) {
    const double r = traj.rewards[k];
    if (r == 0.0) {
      ++scatter.excluded_zero_rewards;
    } else {
      scatter.x.push_back(prev_return);
      scatter.y.push_back(2.0 * std::log(std::abs(r)));  // log(r^2) without squaring underflow
    }
    prev_return = traj.returns[k];
  }
  if (scatter.x.size() < 10) {
    throw InsufficientData("build_scatter: only " + std::to_string(scatter.x.size()) +
                           " usable points, need 10");
  }
  return scatter;
}

namespace {

struct SortedScatter {
  std::vector<double> x, y;
};

SortedScatter sort_scatter(const ScatterSet& scatter) {
  std::vector<std::size_t> order(scatter.x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scatter.x[a] < scatter.x[b]; });
  SortedScatter out;
  out.x.reserve(order.size());
  out.y.reserve(order.size());
  for (std::size_t i : order) {
    out.x.push_back(scatter.x[i]);
    out.y.push_back(scatter.y[i]);
  }
  return out;
}

double tricube(double u) {
  const double t = 1.0 - u * u * u;
  return t > 0.0 ? t * t * t : 0.0;
}

// Local linear fit at q over the k nearest neighbors (contiguous in sorted x),
// with optional per-point robustness weights.
double loess_point(const SortedScatter& data, double q, std::size_t k,
                   const std::vector<double>* robust) {
  const std::size_t n = data.x.size();
  std::size_t lo = std::lower_bound(data.x.begin(), data.x.end(), q) - data.x.begin();
  std::size_t hi = lo;  // window is [lo, hi)
  while (hi - lo < k) {
    if (lo == 0) {
      ++hi;
    } else if (hi == n) {
      --lo;
    } else if (q - data.x[lo - 1] <= data.x[hi] - q) {
      --lo;
    } else {
      ++hi;
    }
  }
  double d = 0.0;
  for (std::size_t i = lo; i < hi; ++i) d = std::max(d, std::abs(data.x[i] - q));

  double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    double w = d > 0.0 ? tricube(std::abs(data.x[i] - q) / d) : 1.0;
    if (robust != nullptr) w *= (*robust)[i];
    if (w <= 0.0) continue;
    const double dx = data.x[i] - q;
    sw += w;
    swx += w * dx;
    swxx += w * dx * dx;
    swy += w * data.y[i];
    swxy += w * dx * data.y[i];
  }
  if (sw <= 0.0) {
    // All weights vanished (can only happen under robustness); plain mean.
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += data.y[i];
    return acc / static_cast<double>(hi - lo);
  }
  const double det = sw * swxx - swx * swx;
  const double scale = sw * (swxx >= 0.0 ? swxx : 0.0);
  if (det <= 1e-12 * std::max(scale, 1e-300)) {
    return swy / sw;  // degenerate window: weighted mean
  }
  return (swxx * swy - swx * swxy) / det;
}

std::vector<double> quantile_grid(const std::vector<double>& sorted_x, std::size_t points) {
  std::vector<double> grid;
  const std::size_t n = sorted_x.size();
  points = std::max<std::size_t>(points, 2);
  grid.reserve(points);
  // Near-ties are collapsed with a relative gap so that downstream trapezoid
  // increments stay above one ulp of the accumulated integral.
  auto well_separated = [](double prev, double v) {
    return v - prev > 1e-9 * std::max({std::abs(prev), std::abs(v), 1e-300});
  };
  for (std::size_t j = 0; j < points; ++j) {
    const double pos = static_cast<double>(j) * static_cast<double>(n - 1) /
                       static_cast<double>(points - 1);
    const double v = sorted_x[static_cast<std::size_t>(std::llround(pos))];
    if (grid.empty() || well_separated(grid.back(), v)) grid.push_back(v);
  }
  return grid;
}

}  // namespace

namespace {

bool use_log_scale(const ScatterSet& scatter, const LoessConfig& config) {
  if (config.scale == LoessScale::Linear) return false;
  double lo = scatter.x.front(), hi = scatter.x.front();
  for (double x : scatter.x) {
    if (!(x > 0.0)) {
      if (config.scale == LoessScale::Log) {
        throw ShapeError("loess_at: log scale requires positive x values");
      }
      return false;
    }
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return config.scale == LoessScale::Log || hi / lo > 100.0;
}

}  // namespace

std::vector<double> loess_at(const ScatterSet& scatter, std::span<const double> queries,
                             const LoessConfig& config) {
  if (config.degree != 1) throw ShapeError("loess_at: only degree 1 is supported");
  if (!(config.span > 0.0 && config.span <= 1.0)) throw ShapeError("loess_at: span outside (0,1]");
  if (scatter.x.empty()) throw InsufficientData("loess_at: empty scatter");

  if (use_log_scale(scatter, config)) {
    ScatterSet logged = scatter;
    for (double& x : logged.x) x = std::log(x);
    std::vector<double> log_queries(queries.begin(), queries.end());
    for (double& q : log_queries) {
      if (!(q > 0.0)) throw ShapeError("loess_at: negative query under log scale");
      q = std::log(q);
    }
    LoessConfig linear_cfg = config;
    linear_cfg.scale = LoessScale::Linear;
    return loess_at(logged, log_queries, linear_cfg);
  }

  const SortedScatter data = sort_scatter(scatter);
  const std::size_t n = data.x.size();
  const std::size_t k =
      std::min(n, std::max<std::size_t>(static_cast<std::size_t>(std::ceil(config.span * n)),
                                        static_cast<std::size_t>(config.degree) + 2));

  std::vector<double> robust;
  const std::vector<double>* robust_ptr = nullptr;
  for (int it = 0; it < config.robustness_iterations; ++it) {
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
      resid[i] = std::abs(data.y[i] - loess_point(data, data.x[i], k, robust_ptr));
    }
    std::vector<double> tmp = resid;
    std::nth_element(tmp.begin(), tmp.begin() + n / 2, tmp.end());
    const double s = tmp[n / 2];
    robust.assign(n, 1.0);
    if (s > 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double u = resid[i] / (6.0 * s);
        robust[i] = u < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
      }
    }
    robust_ptr = &robust;
  }

  std::vector<double> out;
  out.reserve(queries.size());
  for (double q : queries) out.push_back(loess_point(data, q, k, robust_ptr));
  return out;
}

LoessFit loess_fit(const ScatterSet& scatter, const LoessConfig& config) {
  std::vector<double> xs = scatter.x;
  std::sort(xs.begin(), xs.end());
  LoessFit fit;
  fit.grid = quantile_grid(xs, config.grid_points);
  fit.y_hat = loess_at(scatter, fit.grid, config);
  fit.log_scale = use_log_scale(scatter, config);
  return fit;
}

TransformationCurve::TransformationCurve(std::vector<double> grid, std::vector<double> h_values,
                                         CurveCoordinate coordinate)
    : grid_(std::move(grid)), h_(std::move(h_values)), coordinate_(coordinate) {
  validate();
}

double TransformationCurve::axis(double r) const {
  return coordinate_ == CurveCoordinate::LogR ? std::log(r) : r;
}

void TransformationCurve::validate() const {
  if (grid_.size() < 2 || grid_.size() != h_.size()) {
    throw ShapeError("TransformationCurve: need matching grid/h with at least 2 points");
  }
  if (h_.front() != 0.0) throw ShapeError("TransformationCurve: h(grid[0]) must be 0");
  if (coordinate_ == CurveCoordinate::LogR && !(grid_.front() > 0.0)) {
    throw ShapeError("TransformationCurve: log coordinate needs a positive grid");
  }
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw ShapeError("TransformationCurve: grid not increasing");
    if (!(h_[i] > h_[i - 1])) throw ShapeError("TransformationCurve: h not strictly increasing");
  }
}

double TransformationCurve::operator()(double r) const {
  const std::size_t m = grid_.size();
  if (coordinate_ == CurveCoordinate::LogR && !(r > 0.0)) {
    // Monotone continuation below zero wealth: finite slope off the bottom node.
    const double slope = (h_[1] - h_[0]) / (grid_[1] - grid_[0]);
    return h_.front() + slope * (r - grid_.front());
  }
  const double x = axis(r);
  if (r <= grid_.front()) {
    const double slope = (h_[1] - h_[0]) / (axis(grid_[1]) - axis(grid_[0]));
    return h_.front() + slope * (x - axis(grid_.front()));
  }
  if (r >= grid_.back()) {
    const double slope = (h_[m - 1] - h_[m - 2]) / (axis(grid_[m - 1]) - axis(grid_[m - 2]));
    return h_.back() + slope * (x - axis(grid_.back()));
  }
  const std::size_t hi = std::upper_bound(grid_.begin(), grid_.end(), r) - grid_.begin();
  const std::size_t lo = hi - 1;
  const double t = (x - axis(grid_[lo])) / (axis(grid_[hi]) - axis(grid_[lo]));
  return h_[lo] + t * (h_[hi] - h_[lo]);
}

namespace {

// Integral of h' over one grid cell. Plain trapezoid is fine for narrow cells
// but badly overestimates integrals of ~1/R across cells spanning decades
// (quantile grids of multiplicative processes do that), so wide-ratio cells
// interpolate h' as a power law between the endpoint slopes instead. Both
// rules are exact for constant h'; the power-law rule is also exact for
// h' = c/R.
double segment_integral(double a, double b, double slope_a, double slope_b) {
  if (a > 0.0 && b > a * (1.0 + 1e-6)) {
    const double log_ratio = std::log(b / a);
    const double theta = std::log(slope_b / slope_a) / log_ratio;
    const double tp1 = theta + 1.0;
    if (std::abs(tp1) < 1e-8) return slope_a * a * log_ratio;
    return slope_a * a * (std::pow(b / a, tp1) - 1.0) / tp1;
  }
  return 0.5 * (slope_a + slope_b) * (b - a);
}

}  // namespace

TransformationCurve integrate_transformation(const LoessFit& fit) {
  if (fit.grid.size() < 2) throw ShapeError("integrate_transformation: need at least 2 grid points");
  std::vector<double> slope(fit.grid.size());
  for (std::size_t i = 0; i < fit.grid.size(); ++i) {
    if (!std::isfinite(fit.y_hat[i])) {
      throw FitError("integrate_transformation: non-finite smoothed value");
    }
    slope[i] = std::exp(-0.5 * fit.y_hat[i]);
    if (!std::isfinite(slope[i]) || !(slope[i] > 0.0)) {
      throw FitError("integrate_transformation: derivative out of range");
    }
  }
  std::vector<double> h(fit.grid.size(), 0.0);
  for (std::size_t i = 1; i < fit.grid.size(); ++i) {
    h[i] = h[i - 1] + segment_integral(fit.grid[i - 1], fit.grid[i], slope[i - 1], slope[i]);
    if (!std::isfinite(h[i])) throw FitError("integrate_transformation: integral overflowed");
  }
  return TransformationCurve(fit.grid, std::move(h),
                             fit.log_scale ? CurveCoordinate::LogR : CurveCoordinate::LinearR);
}

std::vector<double> transform_increments(const TransformationCurve& h,
                                         const TrajectoryRecord& traj) {
  std::vector<double> increments;
  increments.reserve(traj.horizon);
  double prev = h(traj.initial_return);
  for (std::size_t k = 0; k < traj.horizon; ++k) {
    const double cur = h(traj.returns[k]);
    increments.push_back(cur - prev);
    prev = cur;
  }
  return increments;
}

namespace {

TrajectoryRecord probe_rollout(const WealthDynamics& env, double alpha, std::size_t horizon,
                               RngStream rng, bool* positive) {
  TrajectoryRecord rec;
  rec.seed = rng.seed();
  rec.stream_id = rng.stream_id();
  rec.horizon = horizon;
  rec.initial_return = env.initial_return;
  rec.states.assign(horizon, 0);
  rec.actions.assign(horizon, 0);
  rec.rewards.reserve(horizon);
  rec.returns.reserve(horizon);
  rec.log_returns.reserve(horizon);
  *positive = true;
  double log_ret = std::log(env.initial_return);
  double prev = env.initial_return;
  for (std::size_t k = 0; k < horizon; ++k) {
    auto [reward, next_log] = env.step(log_ret, alpha, rng);
    if (!std::isfinite(next_log)) *positive = false;
    const double ret = std::exp(next_log);
    rec.rewards.push_back(ret - prev);
    rec.returns.push_back(ret);
    rec.log_returns.push_back(next_log);
    log_ret = next_log;
    prev = ret;
  }
  return rec;
}

}  // namespace

LearnAndTrainResult learn_and_train(const WealthDynamics& env, const LearnTransformConfig& config,
                                    std::uint64_t seed) {
  LearnAndTrainResult out;
  bool positive = false;
  for (std::size_t attempt = 0; attempt <= config.probe_retries; ++attempt) {
    out.probe = probe_rollout(env, config.probe_alpha, config.probe_horizon,
                              RngStream(seed, 1 + attempt), &positive);
    if (positive) break;
  }
  if (!positive) {
    throw InsufficientData("learn_and_train: probe kept hitting non-positive returns");
  }
  out.scatter = build_scatter(out.probe);
  out.curve = integrate_transformation(loess_fit(out.scatter, config.loess));
  out.training = reinforce_train(env, RewardChannel::TransformedIncrements, &out.curve,
                                 config.reinforce, seed);
  return out;
}

}  // namespace ergokit
