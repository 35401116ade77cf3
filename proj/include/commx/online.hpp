#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "commx/adaptive.hpp"
#include "commx/estimation.hpp"
#include "commx/model.hpp"
#include "commx/nonadaptive.hpp"

namespace commx {

enum class ExploreMode { nonadaptive, adaptive };

enum class LearnerVariant {
  paired_lcb,         // CLCB: paired estimator, lower confidence bound
  round_averaged_lcb, // CLCB with the per-round-averaged estimator
  chained_empirical,  // full-information feedback: chained pairs, radius 0
  paired_empirical,   // baseline: paired estimator, radius forced to 0
};

inline EstimatorVariant estimator_variant_for(LearnerVariant v) {
  switch (v) {
    case LearnerVariant::round_averaged_lcb: return EstimatorVariant::round_averaged;
    case LearnerVariant::chained_empirical: return EstimatorVariant::chained;
    default: return EstimatorVariant::paired;
  }
}

inline bool uses_confidence_radius(LearnerVariant v) {
  return v == LearnerVariant::paired_lcb || v == LearnerVariant::round_averaged_lcb;
}

struct LearnerConfig {
  ExploreMode mode = ExploreMode::nonadaptive;
  LearnerVariant variant = LearnerVariant::paired_lcb;
  int budget = 0;            // K, per round
  long long horizon = 0;     // T, rounds
  std::uint64_t seed = 0;
  // Test hook: when set, the explorer sees these rates instead of estimates.
  std::optional<std::vector<double>> pinned_rates;
  // Illustrative sampled-difference regret instead of the exact expectation.
  bool sampled_reward = false;
};

struct RegretCurve {
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
  std::uint64_t seed = 0;
};

// Offline optima computed once per (instance, K) and reused every round.
struct OfflineOptima {
  Allocation k_star;
  double nonadaptive_value = 0.0;
  double adaptive_value = 0.0;
};

inline OfflineOptima compute_offline_optima(const CommunityInstance& instance, int K) {
  OfflineOptima optima;
  optima.k_star = greedy_allocation(instance, K);
  optima.nonadaptive_value = expected_reward(instance, optima.k_star);
  optima.adaptive_value = expected_reward_greedy(instance, K);
  return optima;
}

// Transition list of the learner's policy pi^t: communities ranked by the
// perceived unmet fraction 1 - c_i * bound_i while transitions follow the
// true rates. Truncated at the first zero and zero-padded to length D + 1.
inline TransitionList transition_list_policy(const CommunityInstance& instance,
                                             const ExplorationState& state,
                                             const std::vector<double>& bounds) {
  return detail::transition_list_for_rates(instance, state.counts(), bounds);
}

inline TransitionList transition_list_policy(const CommunityInstance& instance,
                                             const std::vector<double>& bounds) {
  return detail::transition_list_for_rates(
      instance, std::vector<int>(instance.community_count(), 0), bounds);
}

namespace detail {

inline std::vector<double> explorer_rates(const LearnerConfig& config,
                                          const EstimatorState& estimator, long long round) {
  if (config.pinned_rates) return *config.pinned_rates;
  if (!uses_confidence_radius(config.variant)) return estimator.mu_hat();
  return confidence_bounds(estimator, round).first;
}

}  // namespace detail

struct NonadaptiveRound {
  Allocation alloc;
  RoundFeedback feedback;
  double regret = 0.0;
};

// One CLCB round, non-adaptive method: allocate greedily on the explorer
// rates, simulate, update the estimator. The instantaneous regret is the
// exact expectation r_{k*}(mu) - r_{k_t}(mu).
inline NonadaptiveRound run_round_nonadaptive(const LearnerConfig& config,
                                              const CommunityInstance& instance,
                                              const OfflineOptima& optima,
                                              EstimatorState& estimator, RngHandle& rng,
                                              long long round) {
  NonadaptiveRound out;
  const auto rates = detail::explorer_rates(config, estimator, round);
  out.alloc = greedy_allocation_rates(rates, config.budget);
  auto [feedback, distinct] = simulate_nonadaptive(instance, out.alloc, rng);
  out.feedback = std::move(feedback);
  if (config.sampled_reward) {
    auto [opt_feedback, opt_distinct] = simulate_nonadaptive(instance, optima.k_star, rng);
    (void)opt_feedback;
    out.regret = static_cast<double>(opt_distinct - distinct);
  } else {
    out.regret = optima.nonadaptive_value - expected_reward(instance, out.alloc);
  }
  estimator.update(out.feedback);
  return out;
}

struct AdaptiveRound {
  RoundFeedback feedback;  // exploration order per community (the policy trace)
  double regret = 0.0;
};

// One CLCB round, adaptive method: K steps of argmax_i (1 - c_i bound_i)
// with members drawn by the true rates. The instantaneous regret is the
// exact expectation r_{pi^g}(mu) - r_{pi^t}(mu) via the two transition lists.
inline AdaptiveRound run_round_adaptive(const LearnerConfig& config,
                                        const CommunityInstance& instance,
                                        const OfflineOptima& optima, EstimatorState& estimator,
                                        RngHandle& rng, long long round) {
  AdaptiveRound out;
  const auto rates = detail::explorer_rates(config, estimator, round);
  auto [feedback, distinct] = detail::simulate_policy(instance, config.budget, rates, rng);
  out.feedback = std::move(feedback);
  if (config.sampled_reward) {
    auto [opt_feedback, opt_distinct] = simulate_greedy_policy(instance, config.budget, rng);
    (void)opt_feedback;
    out.regret = static_cast<double>(opt_distinct - distinct);
  } else {
    const TransitionList tl = transition_list_policy(instance, rates);
    out.regret =
        optima.adaptive_value - expected_reward_from_list(tl, config.budget, identity_reward());
  }
  estimator.update(out.feedback);
  return out;
}

// T rounds of the configured learner. Fully determined by (config, instance).
inline RegretCurve run_experiment(const LearnerConfig& config, const CommunityInstance& instance) {
  if (config.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  const OfflineOptima optima = compute_offline_optima(instance, config.budget);
  EstimatorState estimator(instance.community_count(), estimator_variant_for(config.variant));
  RngHandle rng(config.seed);
  RegretCurve curve;
  curve.seed = config.seed;
  curve.instantaneous.reserve(config.horizon);
  curve.cumulative.reserve(config.horizon);
  double total = 0.0;
  for (long long t = 1; t <= config.horizon; ++t) {
    double regret = 0.0;
    if (config.mode == ExploreMode::nonadaptive)
      regret = run_round_nonadaptive(config, instance, optima, estimator, rng, t).regret;
    else
      regret = run_round_adaptive(config, instance, optima, estimator, rng, t).regret;
    total += regret;
    curve.instantaneous.push_back(regret);
    curve.cumulative.push_back(total);
  }
  return curve;
}

inline double binom2(double n) { return n * (n - 1.0) / 2.0; }

// RHS of the non-adaptive logarithmic regret bound:
//   sum_i 48 C(K',2) K ln T / delta_i_min + 2 C(K',2) m + floor(K'/2) pi^2/3 m delta_max.
// Infinite delta_i_min terms contribute 0.
inline double regret_bound_nonadaptive(const GapConstants& gaps, int m, int K, long long T) {
  const int kprime = K - m + 1;
  const double c2 = binom2(static_cast<double>(kprime));
  const double logT = T >= 1 ? std::log(static_cast<double>(T)) : 0.0;
  double bound = 2.0 * c2 * m +
                 (kprime / 2) * (M_PI * M_PI / 3.0) * m * gaps.delta_max;
  for (double dmin : gaps.delta_i_min)
    if (std::isfinite(dmin) && dmin > 0.0) bound += 48.0 * c2 * K * logT / dmin;
  return bound;
}

// RHS of the adaptive logarithmic regret bound, using the per-k upper bound
// of delta_max (so the result is itself a valid, slightly looser bound):
//   (sum_i sum_k 6 dmax_k / dmin_{i,k}^2) ln T + floor(K'/2) pi^2/3 sum_i sum_k dmax_k.
inline double regret_bound_adaptive(const std::vector<AdaptiveGapRow>& rows, int m, int K,
                                     long long T) {
  const int kprime = K - m + 1;
  const double logT = T >= 1 ? std::log(static_cast<double>(T)) : 0.0;
  double log_coeff = 0.0, constant = 0.0;
  for (const auto& row : rows) {
    for (int i = 0; i < m; ++i) {
      const double dmin = row.delta_min[i];
      if (std::isfinite(dmin) && dmin > 0.0)
        log_coeff += 6.0 * row.delta_max_upper / (dmin * dmin);
      constant += row.delta_max_upper;
    }
  }
  return log_coeff * logT + (kprime / 2) * (M_PI * M_PI / 3.0) * constant;
}

// RHS of the full-information constant regret bound (non-adaptive):
//   (2 + 2 m e^2 K'^2 (K'-1)^2 / delta_min^2) delta_max.
inline double regret_bound_full_information(const GapConstants& gaps, int m, int K) {
  if (!std::isfinite(gaps.delta_min) || gaps.delta_min <= 0.0) return 2.0 * gaps.delta_max;
  const double kprime = static_cast<double>(K - m + 1);
  const double e2 = std::exp(2.0);
  return (2.0 + 2.0 * m * e2 * kprime * kprime * (kprime - 1.0) * (kprime - 1.0) /
                    (gaps.delta_min * gaps.delta_min)) *
         gaps.delta_max;
}

}  // namespace commx
