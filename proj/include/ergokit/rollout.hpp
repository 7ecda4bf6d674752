#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ergokit/types.hpp"

namespace ergokit {

/// Draws a successor state from the kernel row and looks up the transition
/// reward. Throws std::out_of_range on bad indices.
std::pair<int, double> sample_transition(const MdpSpec& mdp, int state, int action,
                                         RngStream& rng);

/// One finite-horizon realization under a tabular policy. The initial state
/// is drawn from initial_dist unless `initial_state` pins it. Draw order per
/// step: action (stochastic policies only), then successor state.
TrajectoryRecord rollout(const MdpSpec& mdp, const PolicySpec& policy, std::size_t horizon,
                         RngStream rng, std::optional<int> initial_state = std::nullopt);

/// Independent realizations; trajectory i uses RngStream(base_seed, i).
std::vector<TrajectoryRecord> ensemble_rollout(const MdpSpec& mdp, const PolicySpec& policy,
                                               std::size_t horizon, std::size_t n_trajectories,
                                               std::uint64_t base_seed,
                                               std::optional<int> initial_state = std::nullopt);

}  // namespace ergokit
