#include "ergokit/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

namespace ergokit {

void TransitionMatrix::validate() const {
  if (n <= 0) throw ShapeError("TransitionMatrix: n must be positive");
  if (rows.size() != static_cast<std::size_t>(n) * n) throw ShapeError("TransitionMatrix: wrong size");
  for (int s = 0; s < n; ++s) {
    double sum = 0.0;
    for (int s2 = 0; s2 < n; ++s2) {
      const double x = p(s, s2);
      if (!(x >= 0.0 && x <= 1.0)) throw ShapeError("TransitionMatrix: entry outside [0,1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kDistTol) {
      throw ShapeError("TransitionMatrix: row " + std::to_string(s) + " does not sum to 1");
    }
  }
}

const char* to_string(ChainClass c) {
  switch (c) {
    case ChainClass::ErgodicChain: return "ErgodicChain";
    case ChainClass::UnichainAperiodic: return "UnichainAperiodic";
    case ChainClass::UnichainPeriodic: return "UnichainPeriodic";
    case ChainClass::Multichain: return "Multichain";
  }
  return "?";
}

const char* to_string(ErgodicMdpAnswer a) {
  switch (a) {
    case ErgodicMdpAnswer::No: return "false";
    case ErgodicMdpAnswer::Yes: return "true";
    case ErgodicMdpAnswer::Inconclusive: return "Inconclusive";
  }
  return "?";
}

TransitionMatrix induced_chain(const MdpSpec& mdp, const PolicySpec& policy) {
  if (!policy.tabular()) throw UnsupportedPolicy("induced_chain: tabular policy required");
  TransitionMatrix P;
  P.n = mdp.n_states;
  P.rows.assign(static_cast<std::size_t>(mdp.n_states) * mdp.n_states, 0.0);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        P.rows[static_cast<std::size_t>(s) * mdp.n_states + s2] += w * mdp.p(s, a, s2);
      }
    }
  }
  return P;
}

std::vector<double> induced_rewards(const MdpSpec& mdp, const PolicySpec& policy) {
  if (!policy.tabular()) throw UnsupportedPolicy("induced_rewards: tabular policy required");
  const int n = mdp.n_states;
  std::vector<double> num(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> den(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = policy.prob(s, a);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < n; ++s2) {
        const double mass = w * mdp.p(s, a, s2);
        num[static_cast<std::size_t>(s) * n + s2] += mass * mdp.g(s, a, s2);
        den[static_cast<std::size_t>(s) * n + s2] += mass;
      }
    }
  }
  std::vector<double> gbar(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t i = 0; i < gbar.size(); ++i) {
    if (den[i] > 0.0) gbar[i] = num[i] / den[i];
  }
  return gbar;
}

namespace {

// Iterative Tarjan on the support graph.
std::vector<std::vector<int>> tarjan_sccs(const TransitionMatrix& P) {
  const int n = P.n;
  std::vector<int> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  std::vector<std::vector<int>> sccs;
  int next_index = 0;

  struct Frame {
    int v;
    int next_succ;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call_stack{{root, 0}};
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call_stack.empty()) {
      Frame& fr = call_stack.back();
      const int v = fr.v;
      bool descended = false;
      while (fr.next_succ < n) {
        const int w = fr.next_succ++;
        if (P.p(v, w) <= 0.0) continue;
        if (index[w] == -1) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call_stack.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
      }
      if (descended) continue;
      if (lowlink[v] == index[v]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        sccs.push_back(std::move(comp));
      }
      call_stack.pop_back();
      if (!call_stack.empty()) {
        lowlink[call_stack.back().v] = std::min(lowlink[call_stack.back().v], lowlink[v]);
      }
    }
  }
  return sccs;
}

bool scc_is_closed(const TransitionMatrix& P, const std::vector<int>& comp,
                   const std::vector<int>& comp_of) {
  const int id = comp_of[comp.front()];
  for (int s : comp) {
    for (int s2 = 0; s2 < P.n; ++s2) {
      if (P.p(s, s2) > 0.0 && comp_of[s2] != id) return false;
    }
  }
  return true;
}

// gcd of (depth(u) + 1 - depth(v)) over edges u->v inside the class.
int class_period(const TransitionMatrix& P, const std::vector<int>& comp) {
  std::vector<int> depth(P.n, -1);
  std::vector<int> queue{comp.front()};
  depth[comp.front()] = 0;
  std::vector<bool> in_class(P.n, false);
  for (int s : comp) in_class[s] = true;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v = 0; v < P.n; ++v) {
      if (P.p(u, v) <= 0.0 || !in_class[v]) continue;
      if (depth[v] == -1) {
        depth[v] = depth[u] + 1;
        queue.push_back(v);
      }
    }
  }
  int g = 0;
  for (int u : comp) {
    for (int v = 0; v < P.n; ++v) {
      if (P.p(u, v) <= 0.0 || !in_class[v]) continue;
      g = std::gcd(g, std::abs(depth[u] + 1 - depth[v]));
    }
  }
  return g == 0 ? 1 : g;
}

constexpr int kDenseSolveLimit = 2000;
constexpr double kPowerTol = 1e-12;
constexpr std::size_t kPowerMaxIter = 1'000'000;

// Power iteration on the lazy chain (P+I)/2, which shares P's stationary
// distribution and is aperiodic by construction.
std::vector<double> stationary_by_power_iteration(const TransitionMatrix& P) {
  const int n = P.n;
  std::vector<double> x(n, 1.0 / n), y(n);
  for (std::size_t it = 0; it < kPowerMaxIter; ++it) {
    std::fill(y.begin(), y.end(), 0.0);
    for (int s = 0; s < n; ++s) {
      const double xs = x[s];
      if (xs == 0.0) continue;
      y[s] += 0.5 * xs;
      const double* row = P.rows.data() + static_cast<std::size_t>(s) * n;
      for (int s2 = 0; s2 < n; ++s2) y[s2] += 0.5 * xs * row[s2];
    }
    double diff = 0.0;
    for (int s = 0; s < n; ++s) diff += std::abs(y[s] - x[s]);
    x.swap(y);
    if (diff < kPowerTol) break;
  }
  return x;
}

// Solve pi^T (P - I) = 0 with sum(pi)=1 by Gaussian elimination with partial
// pivoting on A = (P - I)^T with the last row replaced by ones.
std::vector<double> stationary_by_dense_solve(const TransitionMatrix& P) {
  const int n = P.n;
  std::vector<double> A(static_cast<std::size_t>(n) * n);
  std::vector<double> b(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      A[static_cast<std::size_t>(i) * n + j] = P.p(j, i) - (i == j ? 1.0 : 0.0);
    }
  }
  for (int j = 0; j < n; ++j) A[static_cast<std::size_t>(n - 1) * n + j] = 1.0;
  b[n - 1] = 1.0;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(A[static_cast<std::size_t>(perm[col]) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double cand = std::abs(A[static_cast<std::size_t>(perm[r]) * n + col]);
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best == 0.0) return {};  // singular; caller falls back
    std::swap(perm[col], perm[piv]);
    const std::size_t prow = static_cast<std::size_t>(perm[col]) * n;
    for (int r = col + 1; r < n; ++r) {
      const std::size_t row = static_cast<std::size_t>(perm[r]) * n;
      const double f = A[row + col] / A[prow + col];
      if (f == 0.0) continue;
      A[row + col] = 0.0;
      for (int j = col + 1; j < n; ++j) A[row + j] -= f * A[prow + j];
      b[perm[r]] -= f * b[perm[col]];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int col = n - 1; col >= 0; --col) {
    const std::size_t row = static_cast<std::size_t>(perm[col]) * n;
    double acc = b[perm[col]];
    for (int j = col + 1; j < n; ++j) acc -= A[row + j] * x[j];
    x[col] = acc / A[row + col];
  }
  return x;
}

std::vector<double> normalize_clamped(std::vector<double> pi) {
  double sum = 0.0;
  for (double& v : pi) {
    if (v < 0.0 && v > -1e-9) v = 0.0;  // solver noise on transient states
    sum += v;
  }
  if (!(sum > 0.0)) return {};
  for (double& v : pi) v /= sum;
  return pi;
}

double stationarity_residual(const TransitionMatrix& P, const std::vector<double>& pi) {
  double worst = 0.0;
  for (int s2 = 0; s2 < P.n; ++s2) {
    double acc = 0.0;
    for (int s = 0; s < P.n; ++s) acc += pi[s] * P.p(s, s2);
    worst = std::max(worst, std::abs(acc - pi[s2]));
  }
  return worst;
}

std::size_t count_recurrent_classes(const TransitionMatrix& P) {
  const auto sccs = tarjan_sccs(P);
  std::vector<int> comp_of(P.n, -1);
  for (std::size_t i = 0; i < sccs.size(); ++i) {
    for (int s : sccs[i]) comp_of[s] = static_cast<int>(i);
  }
  std::size_t closed = 0;
  for (const auto& comp : sccs) {
    if (scc_is_closed(P, comp, comp_of)) ++closed;
  }
  return closed;
}

}  // namespace

std::vector<std::vector<int>> strongly_connected_components(const TransitionMatrix& P) {
  P.validate();
  return tarjan_sccs(P);
}

std::vector<double> stationary_distribution(const TransitionMatrix& P) {
  P.validate();
  if (count_recurrent_classes(P) != 1) {
    throw NonUniqueStationary("stationary_distribution: matrix is multichain");
  }
  if (P.n <= kDenseSolveLimit) {
    auto pi = normalize_clamped(stationary_by_dense_solve(P));
    if (!pi.empty() && stationarity_residual(P, pi) <= 1e-10) return pi;
  }
  auto pi = normalize_clamped(stationary_by_power_iteration(P));
  if (pi.empty()) throw NonUniqueStationary("stationary_distribution: iteration failed to normalize");
  return pi;
}

double stationary_reward_rate(const TransitionMatrix& P, std::span<const double> rewards,
                              std::span<const double> pi) {
  const std::size_t n = static_cast<std::size_t>(P.n);
  if (rewards.size() != n * n) throw ShapeError("stationary_reward_rate: reward table size mismatch");
  if (pi.size() != n) throw ShapeError("stationary_reward_rate: pi size mismatch");
  double rho = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      rho += pi[s] * P.rows[s * n + s2] * rewards[s * n + s2];
    }
  }
  return rho;
}

ChainReport classify_chain(const TransitionMatrix& P, const std::vector<double>* rewards) {
  P.validate();
  ChainReport rep;
  rep.sccs = tarjan_sccs(P);

  std::vector<int> comp_of(P.n, -1);
  for (std::size_t i = 0; i < rep.sccs.size(); ++i) {
    for (int s : rep.sccs[i]) comp_of[s] = static_cast<int>(i);
  }
  for (std::size_t i = 0; i < rep.sccs.size(); ++i) {
    if (scc_is_closed(P, rep.sccs[i], comp_of)) {
      rep.recurrent_sccs.push_back(i);
    } else {
      for (int s : rep.sccs[i]) rep.transient_states.push_back(s);
    }
  }
  std::sort(rep.transient_states.begin(), rep.transient_states.end());
  for (std::size_t idx : rep.recurrent_sccs) {
    rep.periods.push_back(class_period(P, rep.sccs[idx]));
  }

  if (rep.recurrent_sccs.size() != 1) {
    rep.classification = ChainClass::Multichain;
    return rep;
  }
  const int period = rep.periods.front();
  if (period > 1) {
    rep.classification = ChainClass::UnichainPeriodic;
  } else if (rep.transient_states.empty()) {
    rep.classification = ChainClass::ErgodicChain;
  } else {
    rep.classification = ChainClass::UnichainAperiodic;
  }

  rep.stationary = stationary_distribution(P);
  if (rewards != nullptr) {
    rep.rho = stationary_reward_rate(P, *rewards, *rep.stationary);
  }
  return rep;
}

ErgodicMdpAnswer is_ergodic_mdp(const MdpSpec& mdp, std::uint64_t max_policies) {
  mdp.validate();
  const int n = mdp.n_states;
  const int m = mdp.n_actions;

  // Total policy count n_actions^n_states, saturating.
  long double total_ld = 1.0L;
  for (int s = 0; s < n; ++s) total_ld *= m;
  const bool capped = total_ld > static_cast<long double>(max_policies);

  std::vector<int> actions(n, 0);
  TransitionMatrix P;
  P.n = n;
  P.rows.assign(static_cast<std::size_t>(n) * n, 0.0);

  std::uint64_t examined = 0;
  while (true) {
    for (int s = 0; s < n; ++s) {
      const std::size_t base =
          (static_cast<std::size_t>(s) * m + actions[s]) * static_cast<std::size_t>(n);
      std::copy(mdp.kernel.begin() + base, mdp.kernel.begin() + base + n,
                P.rows.begin() + static_cast<std::size_t>(s) * n);
    }
    if (count_recurrent_classes(P) != 1) return ErgodicMdpAnswer::No;
    if (++examined >= max_policies && capped) return ErgodicMdpAnswer::Inconclusive;

    // Lexicographic odometer, state 0 most significant.
    int pos = n - 1;
    while (pos >= 0 && ++actions[pos] == m) actions[pos--] = 0;
    if (pos < 0) return ErgodicMdpAnswer::Yes;
  }
}

}  // namespace ergokit
