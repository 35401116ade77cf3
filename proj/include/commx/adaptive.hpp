#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "commx/model.hpp"
#include "commx/nonadaptive.hpp"

namespace commx {

// Non-decreasing reward shaping over the distinct-member count. The plain
// exploration problem uses the identity.
using RewardShape = std::function<double(int)>;

inline RewardShape identity_reward() {
  return [](int j) { return static_cast<double>(j); };
}

// Transition probabilities (p_0, ..., p_D) of the status chain: p_j is the
// chance of meeting a new member at the status reached after j transitions.
// Zero-terminated; once a zero appears all later entries are zero.
struct TransitionList {
  std::vector<double> probs;

  int horizon() const { return static_cast<int>(probs.size()) - 1; }
};

namespace detail {

// Status-based community choice shared by the greedy policy, the learner's
// policy, and transition-list construction. The ranking key is the perceived
// unmet fraction 1 - c_i * rate_i; ties prefer the smaller met count, then
// the lower index.
inline int choose_community(const std::vector<int>& counts, const std::vector<double>& rates) {
  int best = 0;
  double best_key = 1.0 - counts[0] * rates[0];
  for (int i = 1; i < static_cast<int>(counts.size()); ++i) {
    const double key = 1.0 - counts[i] * rates[i];
    if (key > best_key + kTieTolerance) {
      best = i;
      best_key = key;
    } else if (key > best_key - kTieTolerance && counts[i] < counts[best]) {
      best = i;
      best_key = std::max(best_key, key);
    }
  }
  return best;
}

// Walks the deterministic status path of the policy that ranks communities by
// perceived_rates while transitions happen with the true rates. If the policy
// gets stuck on an exhausted community (perceived fraction still positive but
// no unmet members), the remaining entries are zero.
inline TransitionList transition_list_for_rates(const CommunityInstance& instance,
                                                std::vector<int> counts,
                                                const std::vector<double>& perceived_rates) {
  const int m = instance.community_count();
  long long unmet = 0;
  for (int i = 0; i < m; ++i) unmet += instance.size(i) - counts[i];
  TransitionList tl;
  tl.probs.assign(static_cast<std::size_t>(unmet) + 1, 0.0);
  for (long long j = 0; j < unmet; ++j) {
    const int pick = choose_community(counts, perceived_rates);
    const double p = 1.0 - counts[pick] * instance.rate(pick);
    if (p <= 0.0) break;  // stuck; zeros already in place
    tl.probs[j] = p;
    ++counts[pick];
  }
  return tl;
}

}  // namespace detail

// Greedy-policy transition list from an exploration state: the descending
// sort of U_i {s_i, s_i - mu_i, ..., mu_i} U {0}.
inline TransitionList transition_list_greedy(const CommunityInstance& instance,
                                             const ExplorationState& state) {
  return detail::transition_list_for_rates(instance, state.counts(), instance.rates());
}

inline TransitionList transition_list_greedy(const CommunityInstance& instance) {
  return detail::transition_list_for_rates(
      instance, std::vector<int>(instance.community_count(), 0), instance.rates());
}

// L(Q, t): sum over all size-t multisets drawn from qs of the product of
// elements. L(Q, 0) = 1. Dynamic programming over (prefix, steps).
inline double loop_probability(const std::vector<double>& qs, int t) {
  if (t < 0) throw std::invalid_argument("steps must be non-negative");
  if (qs.empty()) return t == 0 ? 1.0 : 0.0;
  std::vector<double> layer(t + 1);  // prefix {q_0}
  for (int s = 0; s <= t; ++s) layer[s] = pow_int(qs[0], s);
  for (std::size_t j = 1; j < qs.size(); ++j)
    for (int s = 1; s <= t; ++s) layer[s] += qs[j] * layer[s - 1];
  return layer[t];
}

// Probability of ending at each status after t steps:
//   reach[j] = p_0 ... p_{j-1} * L({q_0..q_j}, t - j),  j = 0..min(t, D).
// The entries sum to 1.
inline std::vector<double> reach_probabilities(const TransitionList& tl, int t) {
  if (t < 0) throw std::invalid_argument("steps must be non-negative");
  const int D = tl.horizon();
  const int M = std::min(t, D);
  // L[s] for the growing prefix {q_0..q_j}; loop[j] snapshots L at t - j.
  std::vector<double> L(t + 1);
  const double q0 = 1.0 - tl.probs[0];
  for (int s = 0; s <= t; ++s) L[s] = pow_int(q0, s);
  std::vector<double> reach(M + 1, 0.0);
  double prefix = 1.0;
  for (int j = 0; j <= M; ++j) {
    if (j > 0) {
      prefix *= tl.probs[j - 1];
      const double qj = 1.0 - tl.probs[j];
      for (int s = 1; s <= t; ++s) L[s] += qj * L[s - 1];
    }
    reach[j] = prefix * L[t - j];
    if (prefix == 0.0) break;  // zero tail of the list
  }
  return reach;
}

// Expected shaped reward of a transition list explored for t steps from a
// state that has already met `met` members: sum_j (f(j+met)-f(met)) reach[j].
inline double expected_reward_from_list(const TransitionList& tl, int t, const RewardShape& f,
                                        int met = 0) {
  const auto reach = reach_probabilities(tl, t);
  double total = 0.0;
  const double base = f(met);
  for (std::size_t j = 1; j < reach.size(); ++j)
    total += (f(static_cast<int>(j) + met) - base) * reach[j];
  return total;
}

// Exact expected reward of the greedy policy with budget K (the optimal
// adaptive value), via the transition-list DP: O(K * min{K, D}^2) overall.
inline double expected_reward_greedy(const CommunityInstance& instance, int K,
                                     const RewardShape& f) {
  if (K < 0) throw std::invalid_argument("budget must be non-negative");
  if (K == 0) return 0.0;
  return expected_reward_from_list(transition_list_greedy(instance), K, f);
}

inline double expected_reward_greedy(const CommunityInstance& instance, int K) {
  return expected_reward_greedy(instance, K, identity_reward());
}

namespace detail {

// K adaptive steps ranking communities by perceived_rates, sampling members
// with the true rates. Feedback keeps exploration order per community.
inline std::pair<RoundFeedback, int> simulate_policy(const CommunityInstance& instance, int K,
                                                     const std::vector<double>& perceived_rates,
                                                     RngHandle& rng) {
  RoundFeedback feedback(instance.community_count());
  ExplorationState state(instance);
  for (int step = 0; step < K; ++step) {
    const int pick = choose_community(state.counts(), perceived_rates);
    const MemberId member = sample_member(instance, pick, rng);
    feedback.met[pick].push_back(member);
    state.record(member);
  }
  return {std::move(feedback), state.total_count()};
}

}  // namespace detail

inline std::pair<RoundFeedback, int> simulate_greedy_policy(const CommunityInstance& instance,
                                                            int K, RngHandle& rng) {
  return detail::simulate_policy(instance, K, instance.rates(), rng);
}

// Value iteration over the full count lattice:
//   V(c, 0) = 0
//   V(c, t) = max_i [ c_i mu_i V(c, t-1) + (1 - c_i mu_i)(1 + V(c+e_i, t-1)) ].
// Exhaustive value-iteration oracle for the adaptive optimum; guarded by prod(d_i + 1) * K <= 1e7.
inline double optimal_policy_value_oracle(const CommunityInstance& instance, int K) {
  const int m = instance.community_count();
  long long states = 1;
  for (int i = 0; i < m; ++i) states *= instance.size(i) + 1;
  if (states * std::max(K, 1) > 10'000'000LL)
    throw size_guard_error("count lattice exceeds guard (prod(d_i+1) * K > 1e7)");

  std::vector<long long> stride(m);
  long long acc = 1;
  for (int i = 0; i < m; ++i) {
    stride[i] = acc;
    acc *= instance.size(i) + 1;
  }
  std::vector<double> prev(states, 0.0), cur(states, 0.0);
  std::vector<int> c(m, 0);
  for (int t = 1; t <= K; ++t) {
    std::fill(c.begin(), c.end(), 0);
    for (long long idx = 0; idx < states; ++idx) {
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        const double stay = c[i] * instance.rate(i);
        double value = stay * prev[idx];
        if (c[i] < instance.size(i)) value += (1.0 - stay) * (1.0 + prev[idx + stride[i]]);
        best = std::max(best, value);
      }
      cur[idx] = best;
      for (int i = 0; i < m; ++i) {
        if (++c[i] <= instance.size(i)) break;
        c[i] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return prev[0];
}

namespace detail {

struct TaggedProb {
  double value;
  int community;
};

// Descending community-tagged residual fractions, ties by lowest index.
inline std::vector<TaggedProb> tagged_greedy_list(const CommunityInstance& instance,
                                                  const std::vector<int>& counts) {
  std::vector<TaggedProb> list;
  for (int i = 0; i < instance.community_count(); ++i)
    for (int n = counts[i]; n < instance.size(i); ++n)
      list.push_back({1.0 - n * instance.rate(i), i});
  std::stable_sort(list.begin(), list.end(), [](const TaggedProb& a, const TaggedProb& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.community < b.community;
  });
  return list;
}

}  // namespace detail

// Exact loss of exploring community i once and then running greedy for t
// steps, versus running greedy for t+1 steps:
//   sum_{j<k} (f'(j+1) - f'(j)) (p_j - p_k) Prob_{s,t}(j),
// where k is the first position of community i in the tagged greedy list.
inline double reward_gap_first_step(const CommunityInstance& instance,
                                    const ExplorationState& state, int i, int t,
                                    const RewardShape& f) {
  const int m = instance.community_count();
  if (i < 0 || i >= m) throw std::out_of_range("community index out of range");
  if (detail::choose_community(state.counts(), instance.rates()) == i) return 0.0;
  if (state.count(i) == instance.size(i))
    throw std::invalid_argument("probed community has no unmet members");
  const auto tagged = detail::tagged_greedy_list(instance, state.counts());
  int k = 0;
  while (tagged[k].community != i) ++k;

  TransitionList tl;
  tl.probs.reserve(tagged.size() + 1);
  for (const auto& entry : tagged) tl.probs.push_back(entry.value);
  tl.probs.push_back(0.0);
  const auto reach = reach_probabilities(tl, t);
  const int met = state.total_count();
  double gap = 0.0;
  for (int j = 0; j < k && j < static_cast<int>(reach.size()); ++j)
    gap += (f(met + j + 1) - f(met + j)) * (tl.probs[j] - tl.probs[k]) * reach[j];
  return gap;
}

// U[i][k]: occurrences of community i in the first k positions of the sorted
// pair list of the full instance; satisfies p_k = max_i (1 - U[i][k] mu_i).
class UTable {
 public:
  explicit UTable(const CommunityInstance& instance) {
    const auto tagged =
        detail::tagged_greedy_list(instance, std::vector<int>(instance.community_count(), 0));
    const int m = instance.community_count();
    counts_.assign(m, std::vector<int>(tagged.size() + 1, 0));
    for (std::size_t pos = 0; pos < tagged.size(); ++pos)
      for (int i = 0; i < m; ++i)
        counts_[i][pos + 1] = counts_[i][pos] + (tagged[pos].community == i ? 1 : 0);
  }

  int at(int community, int k) const { return counts_.at(community).at(k); }
  int list_length() const { return static_cast<int>(counts_.front().size()) - 1; }

 private:
  std::vector<std::vector<int>> counts_;
};

inline UTable u_table(const CommunityInstance& instance) { return UTable(instance); }

// Per-(i, k) gap constants of the adaptive regret bounds, k = m+1..min(K, D):
//   delta_min[i] = (mu_i U_{i,k} - min_j mu_j U_{j,k}) / U_{i,k}   (inf at the min)
//   epsilon[i]   = (mu_i U_{i,k} - mu_* U_{*,k}) / (U_{i,k} + U_{*,k})  (inf at i = i*)
//   delta_max_upper = sum_{j>=k} f(j) * reach_K[j]  (an upper bound, not exact).
struct AdaptiveGapRow {
  int k = 0;
  std::vector<double> delta_min;
  std::vector<double> epsilon;
  double delta_max_upper = 0.0;
};

inline std::vector<AdaptiveGapRow> adaptive_gap_constants(const CommunityInstance& instance,
                                                          int K, const RewardShape& f) {
  const int m = instance.community_count();
  const long long D = instance.total_members();
  const int k_max = static_cast<int>(std::min<long long>(K, D));
  if (k_max <= m) throw std::invalid_argument("budget leaves no k in (m, min(K, D)]");
  const UTable U = u_table(instance);
  const auto reach = reach_probabilities(transition_list_greedy(instance), K);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<AdaptiveGapRow> rows;
  for (int k = m + 1; k <= k_max; ++k) {
    AdaptiveGapRow row;
    row.k = k;
    row.delta_min.assign(m, inf);
    row.epsilon.assign(m, inf);
    int istar = 0;
    double min_product = inf;
    for (int j = 0; j < m; ++j) {
      const double product = instance.rate(j) * U.at(j, k);
      if (product < min_product - kTieTolerance) {
        min_product = product;
        istar = j;
      }
    }
    for (int i = 0; i < m; ++i) {
      const double product = instance.rate(i) * U.at(i, k);
      if (product > min_product + kTieTolerance) {
        row.delta_min[i] = (product - min_product) / U.at(i, k);
        if (i != istar)
          row.epsilon[i] = (product - instance.rate(istar) * U.at(istar, k)) /
                           (U.at(i, k) + U.at(istar, k));
      }
    }
    for (int j = k; j < static_cast<int>(reach.size()); ++j) row.delta_max_upper += f(j) * reach[j];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace commx
