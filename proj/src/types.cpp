#include "ergokit/types.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace ergokit {

namespace {

void check_distribution(const std::vector<double>& v, std::size_t offset, std::size_t len,
                        const std::string& what) {
  double sum = 0.0;
  for (std::size_t i = offset; i < offset + len; ++i) {
    const double x = v[i];
    if (!(x >= 0.0 && x <= 1.0)) {
      throw ShapeError(what + ": entry " + std::to_string(i - offset) + " outside [0,1]");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kDistTol) {
    throw ShapeError(what + ": sums to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace

void MdpSpec::validate() const {
  if (n_states <= 0 || n_actions <= 0) throw ShapeError("MdpSpec: state/action counts must be positive");
  const std::size_t entries =
      static_cast<std::size_t>(n_states) * n_actions * n_states;
  if (kernel.size() != entries) throw ShapeError("MdpSpec: kernel has wrong size");
  if (reward.size() != entries) throw ShapeError("MdpSpec: reward has wrong size");
  if (initial_dist.size() != static_cast<std::size_t>(n_states)) {
    throw ShapeError("MdpSpec: initial_dist has wrong size");
  }
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      check_distribution(kernel, (static_cast<std::size_t>(s) * n_actions + a) * n_states,
                         n_states,
                         "MdpSpec kernel row (s=" + std::to_string(s) + ",a=" + std::to_string(a) + ")");
    }
  }
  check_distribution(initial_dist, 0, initial_dist.size(), "MdpSpec initial_dist");
  for (double r : reward) {
    if (!std::isfinite(r)) throw ShapeError("MdpSpec: non-finite reward entry");
  }
}

PolicySpec PolicySpec::deterministic(std::vector<int> actions, int n_actions) {
  PolicySpec p;
  p.kind = PolicyKind::DeterministicTabular;
  p.actions = std::move(actions);
  p.n_actions = n_actions;
  p.validate();
  return p;
}

PolicySpec PolicySpec::stochastic(std::vector<double> probs, int n_states, int n_actions) {
  PolicySpec p;
  p.kind = PolicyKind::StochasticTabular;
  p.action_probs = std::move(probs);
  p.n_actions = n_actions;
  if (p.action_probs.size() != static_cast<std::size_t>(n_states) * n_actions) {
    throw ShapeError("PolicySpec: stochastic table has wrong size");
  }
  p.validate();
  return p;
}

PolicySpec PolicySpec::parametric_fraction(double alpha) {
  PolicySpec p;
  p.kind = PolicyKind::ParametricFraction;
  p.fraction = alpha;
  p.validate();
  return p;
}

int PolicySpec::n_states() const {
  switch (kind) {
    case PolicyKind::DeterministicTabular:
      return static_cast<int>(actions.size());
    case PolicyKind::StochasticTabular:
      return static_cast<int>(action_probs.size()) / n_actions;
    default:
      throw UnsupportedPolicy("parametric policy has no state table");
  }
}

double PolicySpec::prob(int s, int a) const {
  switch (kind) {
    case PolicyKind::DeterministicTabular:
      return actions.at(s) == a ? 1.0 : 0.0;
    case PolicyKind::StochasticTabular:
      return action_probs.at(static_cast<std::size_t>(s) * n_actions + a);
    default:
      throw UnsupportedPolicy("parametric policy has no action distribution over a finite set");
  }
}

int PolicySpec::sample_action(int s, RngStream& rng) const {
  switch (kind) {
    case PolicyKind::DeterministicTabular:
      return actions.at(s);
    case PolicyKind::StochasticTabular: {
      std::span<const double> row(action_probs.data() + static_cast<std::size_t>(s) * n_actions,
                                  static_cast<std::size_t>(n_actions));
      return rng.next_index(row);
    }
    default:
      throw UnsupportedPolicy("parametric policy cannot act on a finite MDP");
  }
}

void PolicySpec::validate() const {
  switch (kind) {
    case PolicyKind::DeterministicTabular:
      if (n_actions <= 0) throw ShapeError("PolicySpec: n_actions must be positive");
      for (int a : actions) {
        if (a < 0 || a >= n_actions) throw ShapeError("PolicySpec: action index out of range");
      }
      break;
    case PolicyKind::StochasticTabular: {
      if (n_actions <= 0) throw ShapeError("PolicySpec: n_actions must be positive");
      if (action_probs.size() % n_actions != 0) throw ShapeError("PolicySpec: ragged stochastic table");
      const int ns = static_cast<int>(action_probs.size()) / n_actions;
      for (int s = 0; s < ns; ++s) {
        double sum = 0.0;
        for (int a = 0; a < n_actions; ++a) {
          const double x = action_probs[static_cast<std::size_t>(s) * n_actions + a];
          if (!(x >= 0.0 && x <= 1.0)) throw ShapeError("PolicySpec: probability outside [0,1]");
          sum += x;
        }
        if (std::abs(sum - 1.0) > kDistTol) throw ShapeError("PolicySpec: stochastic row does not sum to 1");
      }
      break;
    }
    case PolicyKind::ParametricFraction:
      if (!(fraction >= 0.0 && fraction <= 1.0)) throw ShapeError("PolicySpec: fraction outside [0,1]");
      break;
  }
}

void TrajectoryRecord::validate() const {
  if (states.size() != horizon || actions.size() != horizon || rewards.size() != horizon ||
      returns.size() != horizon) {
    throw ShapeError("TrajectoryRecord: series lengths disagree with horizon");
  }
  if (!log_returns.empty() && log_returns.size() != horizon) {
    throw ShapeError("TrajectoryRecord: log_returns length disagrees with horizon");
  }
  double prev = initial_return;
  for (std::size_t k = 0; k < horizon; ++k) {
    const double expect = prev + rewards[k];
    const double scale = std::max({1.0, std::abs(prev), std::abs(returns[k])});
    if (std::abs(returns[k] - expect) > kReturnTol * scale) {
      throw ShapeError("TrajectoryRecord: return bookkeeping broken at step " + std::to_string(k));
    }
    prev = returns[k];
  }
}

}  // namespace ergokit
