#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "commx/adaptive.hpp"
#include "commx/model.hpp"
#include "commx/nonadaptive.hpp"
#include "commx/online.hpp"
#include "commx/rng.hpp"

namespace commx {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DistributionSpec {
  enum class Kind { uniform_discrete, geometric, gamma };
  Kind kind = Kind::uniform_discrete;
  int m = 0;
  // uniform_discrete
  int lo = 2, hi = 2;
  // geometric on {2, 3, ...}: size = 2 + Geom(p) failures
  double p = 0.5;
  // gamma, floored then shifted by 2
  double shape = 1.0, rate = 1.0;

  std::string name() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::uniform_discrete: os << "uniform(" << lo << "," << hi << ")"; break;
      case Kind::geometric: os << "geometric(" << p << ")"; break;
      case Kind::gamma: os << "gamma(" << shape << "," << rate << ")"; break;
    }
    return os.str();
  }
};

namespace detail {

inline double sample_standard_normal(RngHandle& rng) {
  // Box-Muller on the deterministic unit stream.
  double u1;
  do {
    u1 = rng.next_unit();
  } while (u1 <= 0.0);
  const double u2 = rng.next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Marsaglia-Tsang; kept in-repo so gamma draws stay identical across stdlibs.
inline double sample_gamma(double shape, double rate, RngHandle& rng) {
  if (shape < 1.0) {
    double u;
    do {
      u = rng.next_unit();
    } while (u <= 0.0);
    return sample_gamma(shape + 1.0, rate, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

}  // namespace detail

inline std::vector<int> generate_sizes(const DistributionSpec& spec, RngHandle& rng) {
  if (spec.m < 1) throw config_error("distribution spec requires m >= 1");
  std::vector<int> sizes(spec.m);
  switch (spec.kind) {
    case DistributionSpec::Kind::uniform_discrete: {
      if (spec.lo < 1 || spec.hi < spec.lo) throw config_error("invalid uniform range");
      for (int& d : sizes)
        d = spec.lo + static_cast<int>(rng.next_below(
                          static_cast<std::uint64_t>(spec.hi - spec.lo + 1)));
      break;
    }
    case DistributionSpec::Kind::geometric: {
      if (!(spec.p > 0.0 && spec.p <= 1.0)) throw config_error("geometric p must be in (0,1]");
      for (int& d : sizes) {
        // inverse-CDF draw of the failure count, support {0,1,...}
        const double u = rng.next_unit();
        const int fails =
            spec.p >= 1.0 ? 0
                          : static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-spec.p)));
        d = 2 + std::max(0, fails);
      }
      break;
    }
    case DistributionSpec::Kind::gamma: {
      if (!(spec.shape > 0.0) || !(spec.rate > 0.0))
        throw config_error("gamma shape and rate must be positive");
      for (int& d : sizes)
        d = 2 + static_cast<int>(std::floor(detail::sample_gamma(spec.shape, spec.rate, rng)));
      break;
    }
  }
  return sizes;
}

inline CommunityInstance generate_instance(const DistributionSpec& spec, RngHandle& rng) {
  return make_instance(generate_sizes(spec, rng));
}

struct ExperimentConfig {
  enum class Kind { allocate, reward_vs_budget, allocation_distance, regret, adaptive_reward };
  Kind kind = Kind::regret;
  std::optional<std::vector<int>> sizes;          // explicit instance
  std::optional<DistributionSpec> distribution;   // or drawn per replication
  int budget = 0;                                 // K (single-K experiments)
  int budget_min = 0, budget_max = 0;             // K range (reward_vs_budget)
  long long horizon = 0;                          // T
  int replications = 1;
  std::uint64_t base_seed = 0;
  std::string output_path;
  std::vector<LearnerVariant> variants = {LearnerVariant::paired_lcb};
  std::vector<ExploreMode> modes = {ExploreMode::nonadaptive};
  bool truncated = false;  // stop exploring exhausted communities (reward_vs_budget)
  std::string raw_json;    // canonical dump, hashed into every CSV
};

namespace detail {

inline LearnerVariant parse_variant(const std::string& s) {
  if (s == "paired_lcb") return LearnerVariant::paired_lcb;
  if (s == "round_averaged_lcb") return LearnerVariant::round_averaged_lcb;
  if (s == "chained_empirical") return LearnerVariant::chained_empirical;
  if (s == "paired_empirical") return LearnerVariant::paired_empirical;
  throw config_error("unknown variant: " + s);
}

inline std::string variant_name(LearnerVariant v) {
  switch (v) {
    case LearnerVariant::paired_lcb: return "paired_lcb";
    case LearnerVariant::round_averaged_lcb: return "round_averaged_lcb";
    case LearnerVariant::chained_empirical: return "chained_empirical";
    case LearnerVariant::paired_empirical: return "paired_empirical";
  }
  return "?";
}

inline ExploreMode parse_mode(const std::string& s) {
  if (s == "nonadaptive") return ExploreMode::nonadaptive;
  if (s == "adaptive") return ExploreMode::adaptive;
  throw config_error("unknown mode: " + s);
}

inline std::string mode_name(ExploreMode m) {
  return m == ExploreMode::nonadaptive ? "nonadaptive" : "adaptive";
}

inline DistributionSpec parse_distribution(const nlohmann::json& j) {
  DistributionSpec spec;
  std::vector<std::string> allowed = {"kind", "m"};
  const std::string kind = j.at("kind").get<std::string>();
  spec.m = j.at("m").get<int>();
  if (kind == "uniform_discrete") {
    spec.kind = DistributionSpec::Kind::uniform_discrete;
    spec.lo = j.at("lo").get<int>();
    spec.hi = j.at("hi").get<int>();
    allowed.insert(allowed.end(), {"lo", "hi"});
  } else if (kind == "geometric") {
    spec.kind = DistributionSpec::Kind::geometric;
    spec.p = j.at("p").get<double>();
    allowed.push_back("p");
  } else if (kind == "gamma") {
    spec.kind = DistributionSpec::Kind::gamma;
    spec.shape = j.at("shape").get<double>();  // required, not defaulted
    spec.rate = j.at("rate").get<double>();
    allowed.insert(allowed.end(), {"shape", "rate"});
  } else {
    throw config_error("unknown distribution kind: " + kind);
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw config_error("unknown distribution key: " + key);
  }
  return spec;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detail

namespace detail {

inline ExperimentConfig parse_experiment_config_impl(const nlohmann::json& j) {
  ExperimentConfig cfg;
  static const std::vector<std::string> allowed = {
      "experiment", "sizes",        "distribution", "budget",  "budget_min", "budget_max",
      "horizon",    "replications", "seed",         "output",  "variants",   "modes",
      "truncated"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw config_error("unknown config key: " + key);
  }
  const std::string kind = j.at("experiment").get<std::string>();
  if (kind == "allocate") cfg.kind = ExperimentConfig::Kind::allocate;
  else if (kind == "reward_vs_budget") cfg.kind = ExperimentConfig::Kind::reward_vs_budget;
  else if (kind == "allocation_distance") cfg.kind = ExperimentConfig::Kind::allocation_distance;
  else if (kind == "regret") cfg.kind = ExperimentConfig::Kind::regret;
  else if (kind == "adaptive_reward") cfg.kind = ExperimentConfig::Kind::adaptive_reward;
  else throw config_error("unknown experiment kind: " + kind);

  if (j.contains("sizes")) cfg.sizes = j.at("sizes").get<std::vector<int>>();
  if (j.contains("distribution")) cfg.distribution = detail::parse_distribution(j.at("distribution"));
  if (cfg.sizes.has_value() == cfg.distribution.has_value())
    throw config_error("exactly one of 'sizes' and 'distribution' must be given");

  if (j.contains("budget")) cfg.budget = j.at("budget").get<int>();
  if (j.contains("budget_min")) cfg.budget_min = j.at("budget_min").get<int>();
  if (j.contains("budget_max")) cfg.budget_max = j.at("budget_max").get<int>();
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<long long>();
  if (j.contains("replications")) cfg.replications = j.at("replications").get<int>();
  if (j.contains("seed")) cfg.base_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("output")) cfg.output_path = j.at("output").get<std::string>();
  if (j.contains("truncated")) cfg.truncated = j.at("truncated").get<bool>();
  if (j.contains("variants")) {
    cfg.variants.clear();
    for (const auto& v : j.at("variants")) cfg.variants.push_back(detail::parse_variant(v));
    if (cfg.variants.empty()) throw config_error("variants must be non-empty");
  }
  if (j.contains("modes")) {
    cfg.modes.clear();
    for (const auto& v : j.at("modes")) cfg.modes.push_back(detail::parse_mode(v));
    if (cfg.modes.empty()) throw config_error("modes must be non-empty");
  }
  if (cfg.replications < 1) throw config_error("replications must be >= 1");
  cfg.raw_json = j.dump();
  return cfg;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  try {
    return detail::parse_experiment_config_impl(j);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config field error: ") + e.what());
  }
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config parse error: ") + e.what());
  }
  return parse_experiment_config(j);
}

// CSV report: a provenance comment line, a fixed header, plain rows. The
// body is a pure function of (config, base seed), so re-runs are
// byte-identical.
struct CsvReport {
  std::string header;
  std::vector<std::string> rows;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::string body() const {
    std::ostringstream os;
    os << "# seed=" << seed << " config_hash=" << std::hex << config_hash << std::dec << "\n";
    os << header << "\n";
    for (const auto& r : rows) os << r << "\n";
    return os.str();
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file: " + path);
    out << body();
  }
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

struct MeanStd {
  double mean = 0.0, stddev = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  r.stddev = xs.size() > 1 ? std::sqrt(ss / (xs.size() - 1)) : 0.0;
  return r;
}

inline CommunityInstance instance_for_trial(const ExperimentConfig& cfg, RngHandle& rng) {
  if (cfg.sizes) return make_instance(*cfg.sizes);
  return generate_instance(*cfg.distribution, rng);
}

// Uniform random composition of K into m non-negative parts (stars and bars).
inline Allocation random_allocation(int m, int K, RngHandle& rng) {
  // Choose m-1 bar positions among K+m-1 slots via a partial Fisher-Yates.
  const int n = K + m - 1;
  std::vector<int> slots(n);
  std::iota(slots.begin(), slots.end(), 0);
  for (int i = 0; i < m - 1; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(slots[i], slots[j]);
  }
  std::vector<int> bars(slots.begin(), slots.begin() + (m - 1));
  std::sort(bars.begin(), bars.end());
  Allocation alloc(m);
  int prev = -1;
  for (int i = 0; i < m - 1; ++i) {
    alloc[i] = bars[i] - prev - 1;
    prev = bars[i];
  }
  alloc[m - 1] = n - 1 - prev;
  return alloc;
}

// k_i = round(K d_i / sum d) with largest-remainder correction so sum == K.
inline Allocation proportional_allocation(const CommunityInstance& instance, int K) {
  const int m = instance.community_count();
  const double total = static_cast<double>(instance.total_members());
  Allocation alloc(m);
  std::vector<std::pair<double, int>> remainders(m);
  int assigned = 0;
  for (int i = 0; i < m; ++i) {
    const double exact = K * instance.size(i) / total;
    alloc[i] = static_cast<int>(std::floor(exact));
    assigned += alloc[i];
    remainders[i] = {exact - alloc[i], i};
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int j = 0; j < K - assigned; ++j) alloc[remainders[j].second] += 1;
  return alloc;
}

// Realized distinct-member count of a fixed allocation; the truncated flag
// redirects draws from exhausted communities to the unexhausted one with the
// largest remaining allocation ("truncated k*").
inline int realized_reward_allocation(const CommunityInstance& instance, const Allocation& alloc,
                                      bool truncated, RngHandle& rng) {
  ExplorationState state(instance);
  int distinct = 0;
  for (int i = 0; i < instance.community_count(); ++i) {
    for (int step = 0; step < alloc[i]; ++step) {
      int target = i;
      if (truncated && state.count(target) == instance.size(target)) {
        int best = -1;
        for (int j = 0; j < instance.community_count(); ++j)
          if (state.count(j) < instance.size(j) && (best < 0 || instance.size(j) - state.count(j) >
                                                                   instance.size(best) - state.count(best)))
            best = j;
        if (best < 0) continue;  // everyone found; the draw is wasted
        target = best;
      }
      if (state.record(sample_member(instance, target, rng))) ++distinct;
    }
  }
  return distinct;
}

}  // namespace detail

inline CsvReport run_allocation_distance(const ExperimentConfig& cfg) {
  if (!cfg.distribution) throw config_error("allocation_distance requires a distribution spec");
  const std::string dist_name = cfg.distribution->name();
  std::vector<double> l1_lower, l1_upper;
  for (int trial = 0; trial < cfg.replications; ++trial) {
    RngHandle rng(mix_seed(cfg.base_seed, static_cast<std::uint64_t>(trial)));
    const CommunityInstance instance = generate_instance(*cfg.distribution, rng);
    const int m = instance.community_count();
    const int total = instance.total_members();
    const int K =
        m + 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(total - m)));
    const Allocation k_star = greedy_allocation(instance, K);
    const auto [lower, upper] = allocation_bounds(instance, K);
    double dl = 0.0, du = 0.0;
    for (int i = 0; i < m; ++i) {
      dl += std::abs(std::ceil(lower[i]) - k_star[i]);
      du += std::abs(std::floor(upper[i]) - k_star[i]);
    }
    l1_lower.push_back(dl);
    l1_upper.push_back(du);
  }
  CsvReport report;
  report.seed = cfg.base_seed;
  report.config_hash = detail::fnv1a(cfg.raw_json);
  report.header = "distribution,m,mean_l1_lower,mean_l1_upper,n";
  std::ostringstream row;
  row << dist_name << "," << cfg.distribution->m << ","
      << detail::fmt(detail::mean_std(l1_lower).mean) << ","
      << detail::fmt(detail::mean_std(l1_upper).mean) << "," << cfg.replications;
  report.rows.push_back(row.str());
  return report;
}

inline CsvReport run_reward_vs_budget(const ExperimentConfig& cfg) {
  if (cfg.budget_min < 1 || cfg.budget_max < cfg.budget_min)
    throw config_error("reward_vs_budget requires 1 <= budget_min <= budget_max");
  CsvReport report;
  report.seed = cfg.base_seed;
  report.config_hash = detail::fnv1a(cfg.raw_json);
  report.header = "K,method,mean_reward,std_reward,n";
  static const std::vector<std::string> methods = {"random", "proportional", "nonadaptive_opt",
                                                   "adaptive_opt"};
  for (int K = cfg.budget_min; K <= cfg.budget_max; ++K) {
    std::vector<std::vector<double>> rewards(methods.size());
    for (int trial = 0; trial < cfg.replications; ++trial) {
      RngHandle rng(mix_seed(cfg.base_seed, static_cast<std::uint64_t>(trial)));
      const CommunityInstance instance = detail::instance_for_trial(cfg, rng);
      const int m = instance.community_count();
      const Allocation random_alloc = detail::random_allocation(m, K, rng);
      const Allocation prop_alloc = detail::proportional_allocation(instance, K);
      const Allocation opt_alloc = greedy_allocation(instance, K);
      rewards[0].push_back(
          detail::realized_reward_allocation(instance, random_alloc, cfg.truncated, rng));
      rewards[1].push_back(
          detail::realized_reward_allocation(instance, prop_alloc, cfg.truncated, rng));
      rewards[2].push_back(
          detail::realized_reward_allocation(instance, opt_alloc, cfg.truncated, rng));
      auto [feedback, distinct] = simulate_greedy_policy(instance, K, rng);
      (void)feedback;
      rewards[3].push_back(distinct);
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const auto ms = detail::mean_std(rewards[mi]);
      std::ostringstream row;
      row << K << "," << methods[mi] << "," << detail::fmt(ms.mean) << ","
          << detail::fmt(ms.stddev) << "," << rewards[mi].size();
      report.rows.push_back(row.str());
    }
  }
  return report;
}

inline CsvReport run_regret(const ExperimentConfig& cfg) {
  if (cfg.horizon < 1) throw config_error("regret requires horizon >= 1");
  if (cfg.budget < 1) throw config_error("regret requires budget >= 1");
  CsvReport report;
  report.seed = cfg.base_seed;
  report.config_hash = detail::fnv1a(cfg.raw_json);
  report.header = "round,variant,mode,mean_cum_regret,std_cum_regret,n_seeds";
  for (ExploreMode mode : cfg.modes) {
    for (LearnerVariant variant : cfg.variants) {
      // cumulative curves per trial, aggregated per round after the fan-out
      std::vector<std::vector<double>> curves;
      for (int trial = 0; trial < cfg.replications; ++trial) {
        const std::uint64_t seed = mix_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
        RngHandle inst_rng(seed);
        const CommunityInstance instance = detail::instance_for_trial(cfg, inst_rng);
        LearnerConfig lc;
        lc.mode = mode;
        lc.variant = variant;
        lc.budget = cfg.budget;
        lc.horizon = cfg.horizon;
        lc.seed = seed;
        curves.push_back(run_experiment(lc, instance).cumulative);
      }
      for (long long t = 0; t < cfg.horizon; ++t) {
        std::vector<double> at_t;
        at_t.reserve(curves.size());
        for (const auto& c : curves) at_t.push_back(c[t]);
        const auto ms = detail::mean_std(at_t);
        std::ostringstream row;
        row << (t + 1) << "," << detail::variant_name(variant) << ","
            << detail::mode_name(mode) << "," << detail::fmt(ms.mean) << ","
            << detail::fmt(ms.stddev) << "," << curves.size();
        report.rows.push_back(row.str());
      }
    }
  }
  return report;
}

}  // namespace commx
