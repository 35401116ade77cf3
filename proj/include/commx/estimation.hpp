#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "commx/model.hpp"

namespace commx {

enum class EstimatorVariant {
  paired,         // disjoint within-round pairs, X/T
  round_averaged, // one within-round collision frequency per round, running mean
  chained,        // adjacent pairs chained across rounds via the last member
};

// Collision-counting state for one learner: per-community pair counts T_i,
// collision statistic X_i, and the empirical mean mu_hat_i.
class EstimatorState {
 public:
  EstimatorState(int communities, EstimatorVariant variant)
      : variant_(variant),
        pairs_(communities, 0),
        collisions_(communities, 0.0),
        mu_hat_(communities, 0.0),
        last_member_(communities) {}

  EstimatorVariant variant() const { return variant_; }
  int communities() const { return static_cast<int>(pairs_.size()); }
  long long pairs(int i) const { return pairs_.at(i); }
  double collisions(int i) const { return collisions_.at(i); }
  double mu_hat(int i) const { return mu_hat_.at(i); }
  const std::vector<double>& mu_hat() const { return mu_hat_; }

  // Biased size estimate T_i / X_i, for reporting only; empty when X_i = 0.
  std::optional<double> size_estimate(int i) const {
    if (collisions_.at(i) <= 0.0) return std::nullopt;
    return static_cast<double>(pairs_.at(i)) / collisions_.at(i);
  }

  void update_paired(const RoundFeedback& feedback) {
    require(EstimatorVariant::paired);
    for (int i = 0; i < communities(); ++i) {
      const auto& s = feedback.met[i];
      const int npairs = static_cast<int>(s.size()) / 2;
      for (int x = 0; x < npairs; ++x)
        if (s[2 * x].local == s[2 * x + 1].local) collisions_[i] += 1.0;
      pairs_[i] += npairs;
      if (pairs_[i] > 0) mu_hat_[i] = collisions_[i] / static_cast<double>(pairs_[i]);
    }
  }

  void update_round_averaged(const RoundFeedback& feedback) {
    require(EstimatorVariant::round_averaged);
    for (int i = 0; i < communities(); ++i) {
      const auto& s = feedback.met[i];
      const int npairs = static_cast<int>(s.size()) / 2;
      if (npairs == 0) continue;  // |S_i| <= 1: no observation this round
      double hits = 0.0;
      for (int x = 0; x < npairs; ++x)
        if (s[2 * x].local == s[2 * x + 1].local) hits += 1.0;
      const double observation = hits / static_cast<double>(npairs);
      pairs_[i] += 1;
      collisions_[i] += observation;
      mu_hat_[i] += (observation - mu_hat_[i]) / static_cast<double>(pairs_[i]);
    }
  }

  // Adjacent-pair collisions, including the pair formed by the last member of
  // the previous round and the first member of this round.
  void update_chained(const RoundFeedback& feedback) {
    require(EstimatorVariant::chained);
    for (int i = 0; i < communities(); ++i) {
      const auto& s = feedback.met[i];
      if (s.empty()) continue;
      int prev = last_member_[i] ? last_member_[i]->local : -1;
      for (const MemberId& member : s) {
        if (prev >= 0) {
          pairs_[i] += 1;
          if (member.local == prev) collisions_[i] += 1.0;
        }
        prev = member.local;
      }
      last_member_[i] = s.back();
      if (pairs_[i] > 0) mu_hat_[i] = collisions_[i] / static_cast<double>(pairs_[i]);
    }
  }

  void update(const RoundFeedback& feedback) {
    switch (variant_) {
      case EstimatorVariant::paired: update_paired(feedback); break;
      case EstimatorVariant::round_averaged: update_round_averaged(feedback); break;
      case EstimatorVariant::chained: update_chained(feedback); break;
    }
  }

 private:
  void require(EstimatorVariant expected) const {
    if (variant_ != expected) throw std::logic_error("estimator variant mismatch");
  }

  EstimatorVariant variant_;
  std::vector<long long> pairs_;
  std::vector<double> collisions_;
  std::vector<double> mu_hat_;
  std::vector<std::optional<MemberId>> last_member_;
};

// Confidence radii rho_i = sqrt(3 ln t / 2 T_i) (0 when T_i = 0) and the
// clipped lower bounds max{0, mu_hat_i - rho_i}.
inline std::pair<std::vector<double>, std::vector<double>> confidence_bounds(
    const EstimatorState& state, long long t) {
  if (t < 1) throw std::invalid_argument("round index is 1-based");
  const int m = state.communities();
  std::vector<double> lower(m, 0.0), radius(m, 0.0);
  const double logt = std::log(static_cast<double>(t));
  for (int i = 0; i < m; ++i) {
    if (state.pairs(i) > 0)
      radius[i] = std::sqrt(3.0 * logt / (2.0 * static_cast<double>(state.pairs(i))));
    lower[i] = std::max(0.0, state.mu_hat(i) - radius[i]);
  }
  return {lower, radius};
}

// Samples needed from a size-d set so that at least one collision occurs with
// probability >= 1 - delta: ceil((1 + sqrt(8 d ln(1/delta) + 1)) / 2).
inline long long min_samples_for_collision(long long d, double delta) {
  if (d < 1) throw std::invalid_argument("set size must be positive");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta must be in (0,1)");
  const double bound = (1.0 + std::sqrt(8.0 * static_cast<double>(d) * std::log(1.0 / delta) + 1.0)) / 2.0;
  return static_cast<long long>(std::ceil(bound - 1e-12));
}

}  // namespace commx
