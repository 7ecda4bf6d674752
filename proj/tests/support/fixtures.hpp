#pragma once

// Shared fixtures and independent oracles for the test suites. Everything in
// here is deliberately written from first principles (no reuse of the library
// paths under test) so the checks stay two-sided.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ergokit/chain.hpp"
#include "ergokit/rng.hpp"
#include "ergokit/types.hpp"

namespace ergotest {

using ergokit::MdpSpec;
using ergokit::PolicySpec;
using ergokit::TransitionMatrix;

inline MdpSpec make_mrp(const std::vector<std::vector<double>>& rows,
                        const std::vector<std::vector<double>>& rewards,
                        std::vector<double> initial) {
  const int n = static_cast<int>(rows.size());
  MdpSpec mdp;
  mdp.n_states = n;
  mdp.n_actions = 1;
  mdp.kernel.reserve(static_cast<std::size_t>(n) * n);
  mdp.reward.reserve(static_cast<std::size_t>(n) * n);
  for (int s = 0; s < n; ++s) {
    for (int s2 = 0; s2 < n; ++s2) {
      mdp.kernel.push_back(rows[s][s2]);
      mdp.reward.push_back(rewards[s][s2]);
    }
  }
  mdp.initial_dist = std::move(initial);
  mdp.validate();
  return mdp;
}

inline TransitionMatrix make_matrix(const std::vector<std::vector<double>>& rows) {
  TransitionMatrix P;
  P.n = static_cast<int>(rows.size());
  for (const auto& row : rows) {
    for (double v : row) P.rows.push_back(v);
  }
  P.validate();
  return P;
}

inline std::vector<double> flatten(const std::vector<std::vector<double>>& rows) {
  std::vector<double> out;
  for (const auto& row : rows) out.insert(out.end(), row.begin(), row.end());
  return out;
}

/// Random row-stochastic matrix with a dense support (ergodic w.h.p.).
inline TransitionMatrix random_dense_chain(int n, ergokit::RngStream& rng) {
  TransitionMatrix P;
  P.n = n;
  P.rows.resize(static_cast<std::size_t>(n) * n);
  for (int s = 0; s < n; ++s) {
    double sum = 0.0;
    for (int s2 = 0; s2 < n; ++s2) {
      const double v = 0.05 + rng.next_double();
      P.rows[static_cast<std::size_t>(s) * n + s2] = v;
      sum += v;
    }
    for (int s2 = 0; s2 < n; ++s2) P.rows[static_cast<std::size_t>(s) * n + s2] /= sum;
  }
  return P;
}

/// Plain value iteration, the oracle for every Q-learning check.
struct ValueIterationResult {
  std::vector<double> q;  // s * n_actions + a
  std::vector<int> greedy;
};

inline ValueIterationResult value_iteration(const MdpSpec& mdp, double discount,
                                            int iterations = 100000, double tol = 1e-12) {
  const int ns = mdp.n_states, na = mdp.n_actions;
  std::vector<double> v(ns, 0.0);
  std::vector<double> q(static_cast<std::size_t>(ns) * na, 0.0);
  for (int it = 0; it < iterations; ++it) {
    double delta = 0.0;
    for (int s = 0; s < ns; ++s) {
      double best = -1e300;
      for (int a = 0; a < na; ++a) {
        double acc = 0.0;
        for (int s2 = 0; s2 < ns; ++s2) {
          acc += mdp.p(s, a, s2) * (mdp.g(s, a, s2) + discount * v[s2]);
        }
        q[static_cast<std::size_t>(s) * na + a] = acc;
        best = std::max(best, acc);
      }
      delta = std::max(delta, std::abs(best - v[s]));
      v[s] = best;
    }
    if (delta < tol) break;
  }
  ValueIterationResult out;
  out.q = std::move(q);
  out.greedy.resize(ns);
  for (int s = 0; s < ns; ++s) {
    int best = 0;
    for (int a = 1; a < na; ++a) {
      if (out.q[static_cast<std::size_t>(s) * na + a] >
          out.q[static_cast<std::size_t>(s) * na + best]) {
        best = a;
      }
    }
    out.greedy[s] = best;
  }
  return out;
}

/// Brute-force stationary vector by long matrix powering of the lazy chain,
/// independent of the linear-solve path under test.
inline std::vector<double> stationary_by_brute_power(const TransitionMatrix& P, int iters = 200000) {
  const int n = P.n;
  std::vector<double> x(n, 1.0 / n), y(n);
  for (int it = 0; it < iters; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      y[s] += 0.5 * x[s];
      for (int s2 = 0; s2 < n; ++s2) y[s2] += 0.5 * x[s] * P.p(s, s2);
    }
    x.swap(y);
  }
  return x;
}

inline double analytic_coin_growth(double alpha, double win = 0.5, double loss = 0.4,
                                   double p = 0.5) {
  return p * std::log(1.0 + win * alpha) + (1.0 - p) * std::log(1.0 - loss * alpha);
}

// --- named chain fixtures ---------------------------------------------------

inline TransitionMatrix symmetric_two_state() {
  return make_matrix({{0.5, 0.5}, {0.5, 0.5}});
}

inline TransitionMatrix asymmetric_two_state() {
  return make_matrix({{0.9, 0.1}, {0.5, 0.5}});
}

inline TransitionMatrix two_cycle() { return make_matrix({{0.0, 1.0}, {1.0, 0.0}}); }

inline TransitionMatrix absorbing_three_state() {
  return make_matrix({{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0}});
}

}  // namespace ergotest
