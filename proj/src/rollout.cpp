#include "ergokit/rollout.hpp"

#include <span>
#include <stdexcept>
#include <string>

namespace ergokit {

std::pair<int, double> sample_transition(const MdpSpec& mdp, int state, int action,
                                         RngStream& rng) {
  if (state < 0 || state >= mdp.n_states) {
    throw std::out_of_range("sample_transition: state " + std::to_string(state) + " out of range");
  }
  if (action < 0 || action >= mdp.n_actions) {
    throw std::out_of_range("sample_transition: action " + std::to_string(action) + " out of range");
  }
  const std::size_t base = (static_cast<std::size_t>(state) * mdp.n_actions + action) *
                           static_cast<std::size_t>(mdp.n_states);
  std::span<const double> row(mdp.kernel.data() + base, static_cast<std::size_t>(mdp.n_states));
  const int next = rng.next_index(row);
  return {next, mdp.reward[base + next]};
}

TrajectoryRecord rollout(const MdpSpec& mdp, const PolicySpec& policy, std::size_t horizon,
                         RngStream rng, std::optional<int> initial_state) {
  if (horizon < 1) throw ShapeError("rollout: horizon must be at least 1");
  if (!policy.tabular()) throw UnsupportedPolicy("rollout: finite MDPs need a tabular policy");

  TrajectoryRecord rec;
  rec.seed = rng.seed();
  rec.stream_id = rng.stream_id();
  rec.horizon = horizon;
  rec.states.reserve(horizon);
  rec.actions.reserve(horizon);
  rec.rewards.reserve(horizon);
  rec.returns.reserve(horizon);

  int state;
  if (initial_state) {
    state = *initial_state;
    if (state < 0 || state >= mdp.n_states) throw std::out_of_range("rollout: initial state out of range");
  } else {
    state = rng.next_index(mdp.initial_dist);
  }

  double ret = 0.0;
  for (std::size_t k = 0; k < horizon; ++k) {
    const int action = policy.sample_action(state, rng);
    auto [next, reward] = sample_transition(mdp, state, action, rng);
    rec.states.push_back(state);
    rec.actions.push_back(action);
    rec.rewards.push_back(reward);
    ret += reward;
    rec.returns.push_back(ret);
    state = next;
  }
  rec.final_state = state;
  return rec;
}

std::vector<TrajectoryRecord> ensemble_rollout(const MdpSpec& mdp, const PolicySpec& policy,
                                               std::size_t horizon, std::size_t n_trajectories,
                                               std::uint64_t base_seed,
                                               std::optional<int> initial_state) {
  if (n_trajectories < 1) throw ShapeError("ensemble_rollout: need at least one trajectory");
  std::vector<TrajectoryRecord> out;
  out.reserve(n_trajectories);
  for (std::size_t i = 0; i < n_trajectories; ++i) {
    out.push_back(rollout(mdp, policy, horizon, RngStream(base_seed, i), initial_state));
  }
  return out;
}

}  // namespace ergokit
