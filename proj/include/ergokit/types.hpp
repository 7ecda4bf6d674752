#pragma once

#include <cstdint>
#include <vector>

#include "ergokit/errors.hpp"
#include "ergokit/rng.hpp"

namespace ergokit {

inline constexpr double kDistTol = 1e-12;   // probability rows / vectors
inline constexpr double kReturnTol = 1e-9;  // relative, return bookkeeping

/// Finite MDP with a transition-based reward g(s, a, s').
/// kernel and reward are dense, laid out (s * n_actions + a) * n_states + s2.
struct MdpSpec {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> kernel;
  std::vector<double> reward;
  std::vector<double> initial_dist;

  double p(int s, int a, int s2) const {
    return kernel[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double g(int s, int a, int s2) const {
    return reward[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }

  /// Throws ShapeError if sizes disagree, a kernel row does not sum to 1
  /// within 1e-12, an entry leaves [0,1], or a reward is non-finite.
  void validate() const;
};

enum class PolicyKind { DeterministicTabular, StochasticTabular, ParametricFraction };

/// Either a tabular policy over a finite MDP or the single-fraction
/// parametric policy used by the wealth-process environments.
struct PolicySpec {
  PolicyKind kind = PolicyKind::DeterministicTabular;
  std::vector<int> actions;          // deterministic: action per state
  std::vector<double> action_probs;  // stochastic: s * n_actions + a
  int n_actions = 0;                 // tabular kinds
  double fraction = 0.0;             // parametric kind

  static PolicySpec deterministic(std::vector<int> actions, int n_actions);
  static PolicySpec stochastic(std::vector<double> probs, int n_states, int n_actions);
  static PolicySpec parametric_fraction(double alpha);

  bool tabular() const { return kind != PolicyKind::ParametricFraction; }
  int n_states() const;
  /// π(a|s) for tabular kinds; throws UnsupportedPolicy otherwise.
  double prob(int s, int a) const;
  int sample_action(int s, RngStream& rng) const;
  void validate() const;
};

/// One realization of a reward process. `states[k]`/`actions[k]` are the
/// state occupied and action taken at step k; `returns[k]` is the cumulative
/// return after step k, starting from `initial_return`.
///
/// Multiplicative environments additionally fill `log_returns` (same
/// indexing, natural log of the return): on long runs the linear-domain
/// return underflows double precision while the log stays well scaled, and
/// the growth diagnostics read the log series when it is present.
struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::size_t horizon = 0;
  double initial_return = 0.0;
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> returns;
  std::vector<double> log_returns;
  int final_state = 0;

  double final_return() const { return returns.empty() ? initial_return : returns.back(); }

  /// Throws ShapeError if lengths disagree with horizon or the additive
  /// bookkeeping returns[k] = returns[k-1] + rewards[k] breaks 1e-9 relative.
  void validate() const;
};

}  // namespace ergokit
