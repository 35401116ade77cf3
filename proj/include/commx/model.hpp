#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "commx/rng.hpp"

namespace commx {

// x^n for integer n >= 0 by binary exponentiation. Every step is an exact
// IEEE multiply, so results are bit-identical across platforms.
inline double pow_int(double x, long long n) {
  double result = 1.0;
  double base = x;
  while (n > 0) {
    if (n & 1) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

struct MemberId {
  int community = 0;
  int local = 0;

  friend bool operator==(const MemberId&, const MemberId&) = default;
};

// Ground truth: m disjoint communities, community i holding sizes[i] members.
// Rates are always the exact reciprocals of the sizes.
class CommunityInstance {
 public:
  explicit CommunityInstance(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("instance needs at least one community");
    rates_.reserve(sizes_.size());
    for (int d : sizes_) {
      if (d < 1) throw std::invalid_argument("community sizes must be positive");
      rates_.push_back(1.0 / static_cast<double>(d));
    }
  }

  int community_count() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }
  const std::vector<double>& rates() const { return rates_; }
  int size(int i) const { return sizes_.at(i); }
  double rate(int i) const { return rates_.at(i); }
  long long total_members() const {
    return std::accumulate(sizes_.begin(), sizes_.end(), 0LL);
  }

 private:
  std::vector<int> sizes_;
  std::vector<double> rates_;
};

inline CommunityInstance make_instance(std::vector<int> sizes) {
  return CommunityInstance(std::move(sizes));
}

inline MemberId sample_member(const CommunityInstance& instance, int i, RngHandle& rng) {
  if (i < 0 || i >= instance.community_count())
    throw std::out_of_range("community index out of range");
  return MemberId{i, static_cast<int>(rng.next_below(static_cast<std::uint64_t>(instance.size(i))))};
}

// Distinct-member counts plus per-community seen flags (the partial
// realization summary the greedy policy and the estimators consume).
class ExplorationState {
 public:
  explicit ExplorationState(const CommunityInstance& instance)
      : counts_(instance.community_count(), 0) {
    seen_.reserve(instance.community_count());
    for (int i = 0; i < instance.community_count(); ++i)
      seen_.emplace_back(instance.size(i), false);
  }

  // Records a met member; returns true iff it was new. counts never decrease
  // and never exceed the community size.
  bool record(const MemberId& member) {
    auto flag = seen_.at(member.community).begin() + member.local;
    if (*flag) return false;
    *flag = true;
    ++counts_[member.community];
    return true;
  }

  const std::vector<int>& counts() const { return counts_; }
  int count(int i) const { return counts_.at(i); }
  int total_count() const { return std::accumulate(counts_.begin(), counts_.end(), 0); }

 private:
  std::vector<int> counts_;
  std::vector<std::vector<bool>> seen_;
};

// Members met in one round, per community, in exploration order.
struct RoundFeedback {
  std::vector<std::vector<MemberId>> met;

  explicit RoundFeedback(int communities = 0) : met(communities) {}

  int total() const {
    int n = 0;
    for (const auto& s : met) n += static_cast<int>(s.size());
    return n;
  }
};

}  // namespace commx
