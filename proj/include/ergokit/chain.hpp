#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ergokit/types.hpp"

namespace ergokit {

/// Row-stochastic matrix; rows laid out s * n + s2.
struct TransitionMatrix {
  int n = 0;
  std::vector<double> rows;

  double p(int s, int s2) const { return rows[static_cast<std::size_t>(s) * n + s2]; }
  void validate() const;
};

enum class ChainClass { ErgodicChain, UnichainAperiodic, UnichainPeriodic, Multichain };

const char* to_string(ChainClass c);

struct ChainReport {
  std::vector<std::vector<int>> sccs;        // partition of the state set, each sorted
  std::vector<std::size_t> recurrent_sccs;   // indices into sccs of the closed classes
  std::vector<int> transient_states;         // sorted
  std::vector<int> periods;                  // per recurrent class, parallel to recurrent_sccs
  ChainClass classification = ChainClass::Multichain;
  std::optional<std::vector<double>> stationary;  // present iff unichain
  std::optional<double> rho;                      // present iff unichain and rewards supplied
};

/// Markov chain of the MRP obtained by fixing a tabular policy:
/// row s = sum_a pi(a|s) * kernel(s, a, .). Parametric policies are rejected
/// with UnsupportedPolicy.
TransitionMatrix induced_chain(const MdpSpec& mdp, const PolicySpec& policy);

/// Expected transition reward of the induced MRP, conditional on the
/// transition being taken: gbar(s,s') = sum_a pi(a|s) P(s,a,s') g(s,a,s') / Pbar(s,s').
/// Zero where the induced transition has probability 0. Layout s * n + s2.
std::vector<double> induced_rewards(const MdpSpec& mdp, const PolicySpec& policy);

/// Partition of the support graph (edge iff P(s,s') > 0, exact) into strongly
/// connected components. Components are listed in reverse topological order of
/// the condensation (successors first), each sorted by state index.
std::vector<std::vector<int>> strongly_connected_components(const TransitionMatrix& P);

/// Full structural report. Periods are computed per recurrent class via BFS
/// level sets (gcd of depth(u)+1-depth(v) over in-class edges). `rewards`, when
/// given, is a dense n*n transition reward table used for rho.
ChainReport classify_chain(const TransitionMatrix& P,
                           const std::vector<double>* rewards = nullptr);

/// Unique stationary distribution of a unichain matrix (dense solve for
/// n <= 2000, lazy-chain power iteration above, tolerance 1e-12, at most 1e6
/// iterations). Throws NonUniqueStationary on multichain input.
std::vector<double> stationary_distribution(const TransitionMatrix& P);

/// rho = sum_{s,s'} pi(s) P(s,s') g(s,s'). Throws ShapeError on size mismatch.
double stationary_reward_rate(const TransitionMatrix& P, std::span<const double> rewards,
                              std::span<const double> pi);

enum class ErgodicMdpAnswer { No, Yes, Inconclusive };

const char* to_string(ErgodicMdpAnswer a);

/// Checks whether every deterministic stationary policy induces a single
/// recurrent class. Enumerates policies in lexicographic order of the action
/// tuple (state 0 most significant) up to max_policies; returns No on the
/// first counterexample, Inconclusive when the cap is hit first.
ErgodicMdpAnswer is_ergodic_mdp(const MdpSpec& mdp, std::uint64_t max_policies = 1'000'000);

}  // namespace ergokit
