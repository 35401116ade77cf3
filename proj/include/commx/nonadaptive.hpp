#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "commx/model.hpp"

namespace commx {

using Allocation = std::vector<int>;

// Thrown when an exhaustive computation would exceed its tractability guard.
class size_guard_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kTieTolerance = 1e-12;

// Expected distinct members when community i is visited k_i times:
// sum_i d_i * (1 - (1 - 1/d_i)^{k_i}).
inline double expected_reward(const CommunityInstance& instance, const Allocation& alloc) {
  const int m = instance.community_count();
  if (static_cast<int>(alloc.size()) != m)
    throw std::invalid_argument("allocation length must match community count");
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    if (alloc[i] < 0) throw std::invalid_argument("allocation entries must be non-negative");
    total += static_cast<double>(instance.size(i)) *
             (1.0 - pow_int(1.0 - instance.rate(i), alloc[i]));
  }
  return total;
}

namespace detail {

// One greedy step on arbitrary rates in [0,1]. gains[i] holds the current
// marginal gain (1 - mu_i)^{k_i}. Ties within kTieTolerance prefer the
// smaller k_i, then the lower index, which yields a round-robin spread when
// all rates are equal (the cold-start case of the online learner).
inline int greedy_pick(const std::vector<double>& gains, const std::vector<int>& k) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(gains.size()); ++i) {
    const double diff = gains[i] - gains[best];
    if (diff > kTieTolerance) {
      best = i;
    } else if (diff >= -kTieTolerance && k[i] < k[best]) {
      best = i;
    }
  }
  return best;
}

}  // namespace detail

// Greedy budget allocation on an arbitrary rate vector (the form the online
// learner calls with confidence-bound rates). When K <= m the budget is
// spread one unit per community over the lowest indices.
inline Allocation greedy_allocation_rates(const std::vector<double>& rates, int K) {
  const int m = static_cast<int>(rates.size());
  if (m == 0) throw std::invalid_argument("empty rate vector");
  if (K < 1) throw std::invalid_argument("budget must be at least 1");
  Allocation k(m, 0);
  if (K <= m) {
    for (int i = 0; i < K; ++i) k[i] = 1;
    return k;
  }
  std::vector<double> gains(m, 1.0);  // (1 - mu_i)^0
  for (int step = 0; step < K; ++step) {
    const int i = detail::greedy_pick(gains, k);
    ++k[i];
    gains[i] *= 1.0 - rates[i];
  }
  return k;
}

inline Allocation greedy_allocation(const CommunityInstance& instance, int K) {
  return greedy_allocation_rates(instance.rates(), K);
}

// Analytic sandwich around the optimal allocation:
//   k-_i = ((K - m) / ln(1 - mu_i)) / sum_j 1/ln(1 - mu_j)
//   k+_i = (K / ln(1 - mu_i)) / sum_j 1/ln(1 - mu_j) + 1.
// Size-1 communities have ln(1 - mu) = -inf; their share is 0 and the sums
// run over the remaining communities.
inline std::pair<std::vector<double>, std::vector<double>> allocation_bounds(
    const CommunityInstance& instance, int K) {
  const int m = instance.community_count();
  if (K <= m) throw std::invalid_argument("allocation bounds require K > m");
  double denom = 0.0;
  for (int i = 0; i < m; ++i)
    if (instance.size(i) >= 2) denom += 1.0 / std::log(1.0 - instance.rate(i));
  std::vector<double> lower(m, 0.0), upper(m, 1.0);
  for (int i = 0; i < m; ++i) {
    if (instance.size(i) < 2 || denom == 0.0) continue;
    const double inv_log = 1.0 / std::log(1.0 - instance.rate(i));
    lower[i] = static_cast<double>(K - m) * inv_log / denom;
    upper[i] = static_cast<double>(K) * inv_log / denom + 1.0;
  }
  return {lower, upper};
}

struct FastAllocationResult {
  Allocation alloc;
  int greedy_steps = 0;  // increments performed after the initial assignment
};

// O(m log m) allocation: start from ceil(k-) and finish with greedy steps.
inline FastAllocationResult fast_allocation_detail(const CommunityInstance& instance, int K) {
  const int m = instance.community_count();
  auto [lower, upper] = allocation_bounds(instance, K);
  (void)upper;
  Allocation k(m, 0);
  int used = 0;
  for (int i = 0; i < m; ++i) {
    k[i] = static_cast<int>(std::ceil(lower[i]));
    used += k[i];
  }
  std::vector<double> gains(m);
  for (int i = 0; i < m; ++i) gains[i] = pow_int(1.0 - instance.rate(i), k[i]);
  int steps = 0;
  while (used < K) {
    const int i = detail::greedy_pick(gains, k);
    ++k[i];
    gains[i] *= 1.0 - instance.rate(i);
    ++used;
    ++steps;
  }
  return {std::move(k), steps};
}

inline Allocation fast_allocation(const CommunityInstance& instance, int K) {
  return fast_allocation_detail(instance, K).alloc;
}

namespace detail {

inline long long compositions_count(int K, int m) {
  // C(K + m - 1, m - 1) with overflow clamp.
  long long result = 1;
  for (int i = 1; i <= m - 1; ++i) {
    result = result * (K + i) / i;
    if (result > (1LL << 40)) return result;  // already hopeless
  }
  return result;
}

// Visits every k >= 0 with sum(k) == K.
template <typename Fn>
void for_each_composition(int K, int m, Fn&& fn) {
  Allocation k(m, 0);
  auto rec = [&](auto&& self, int pos, int remaining) -> void {
    if (pos == m - 1) {
      k[pos] = remaining;
      fn(const_cast<const Allocation&>(k));
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      k[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  rec(rec, 0, K);
}

inline void check_composition_guard(const CommunityInstance& instance, int K) {
  if (compositions_count(K, instance.community_count()) > 10'000'000LL)
    throw size_guard_error("composition enumeration exceeds guard (C(K+m-1,m-1) > 1e7)");
}

}  // namespace detail

// Exhaustive oracle over all allocations with sum(k) = K.
inline std::pair<Allocation, double> brute_force_optimal(const CommunityInstance& instance, int K) {
  detail::check_composition_guard(instance, K);
  Allocation best;
  double best_value = -1.0;
  detail::for_each_composition(K, instance.community_count(), [&](const Allocation& k) {
    const double value = expected_reward(instance, k);
    if (value > best_value) {
      best_value = value;
      best = k;
    }
  });
  return {best, best_value};
}

// Per-community and global reward gaps over all budget-K allocations.
// Conventions: no qualifying action => delta_min = inf, delta_max = 0.
struct GapConstants {
  std::vector<double> delta_i_min;
  std::vector<double> delta_i_max;
  double delta_min = std::numeric_limits<double>::infinity();
  double delta_max = 0.0;
};

inline GapConstants gap_constants_nonadaptive(const CommunityInstance& instance, int K) {
  detail::check_composition_guard(instance, K);
  const int m = instance.community_count();
  const double optimum = brute_force_optimal(instance, K).second;
  GapConstants gaps;
  gaps.delta_i_min.assign(m, std::numeric_limits<double>::infinity());
  gaps.delta_i_max.assign(m, 0.0);
  detail::for_each_composition(K, m, [&](const Allocation& k) {
    const double gap = optimum - expected_reward(instance, k);
    if (gap <= kTieTolerance) return;
    for (int i = 0; i < m; ++i) {
      if (k[i] > 1) {
        if (gap < gaps.delta_i_min[i]) gaps.delta_i_min[i] = gap;
        if (gap > gaps.delta_i_max[i]) gaps.delta_i_max[i] = gap;
      }
    }
  });
  for (int i = 0; i < m; ++i) {
    gaps.delta_min = std::min(gaps.delta_min, gaps.delta_i_min[i]);
    gaps.delta_max = std::max(gaps.delta_max, gaps.delta_i_max[i]);
  }
  return gaps;
}

// Samples k_i members per community; the distinct count is the realized
// round reward R(k, phi).
inline std::pair<RoundFeedback, int> simulate_nonadaptive(const CommunityInstance& instance,
                                                          const Allocation& alloc,
                                                          RngHandle& rng) {
  const int m = instance.community_count();
  if (static_cast<int>(alloc.size()) != m)
    throw std::invalid_argument("allocation length must match community count");
  RoundFeedback feedback(m);
  ExplorationState state(instance);
  for (int i = 0; i < m; ++i) {
    feedback.met[i].reserve(alloc[i]);
    for (int v = 0; v < alloc[i]; ++v) {
      const MemberId member = sample_member(instance, i, rng);
      feedback.met[i].push_back(member);
      state.record(member);
    }
  }
  return {std::move(feedback), state.total_count()};
}

}  // namespace commx
