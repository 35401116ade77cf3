#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "commx/experiments.hpp"

using namespace commx;

TEST_CASE("config parsing rejects unknown keys and bad shapes") {
  nlohmann::json j = {{"experiment", "regret"},  {"sizes", {2, 3}}, {"budget", 4},
                      {"horizon", 10},           {"seed", 1},       {"replications", 2}};
  CHECK_NOTHROW(parse_experiment_config(j));
  j["mystery"] = 1;
  CHECK_THROWS_AS(parse_experiment_config(j), config_error);
  j.erase("mystery");
  j["distribution"] = {{"kind", "uniform_discrete"}, {"m", 2}, {"lo", 2}, {"hi", 5}};
  CHECK_THROWS_AS(parse_experiment_config(j), config_error);  // sizes XOR distribution
  j.erase("sizes");
  CHECK_NOTHROW(parse_experiment_config(j));
  j["distribution"]["extra"] = true;
  CHECK_THROWS_AS(parse_experiment_config(j), config_error);
  j["distribution"] = {{"kind", "gamma"}, {"m", 2}};  // shape/rate are required
  CHECK_THROWS_AS(parse_experiment_config(j), config_error);
  j["experiment"] = "nonsense";
  CHECK_THROWS_AS(parse_experiment_config(j), config_error);
}

TEST_CASE("size generators respect their supports") {
  RngHandle rng(5);
  DistributionSpec uniform;
  uniform.kind = DistributionSpec::Kind::uniform_discrete;
  uniform.m = 50;
  uniform.lo = 2;
  uniform.hi = 2;
  for (int d : generate_sizes(uniform, rng)) CHECK(d == 2);
  uniform.hi = 26;
  for (int d : generate_sizes(uniform, rng)) {
    CHECK(d >= 2);
    CHECK(d <= 26);
  }

  DistributionSpec geometric;
  geometric.kind = DistributionSpec::Kind::geometric;
  geometric.m = 4000;
  geometric.p = 0.1;
  const auto geo_sizes = generate_sizes(geometric, rng);
  double mean = 0.0;
  for (int d : geo_sizes) {
    CHECK(d >= 2);
    mean += d;
  }
  mean /= geo_sizes.size();
  // shifted geometric on {2,3,...} has mean 1/p + 1 = 11 and sd ~ 9.5
  CHECK(std::abs(mean - 11.0) < 3.0 * 9.49 / std::sqrt(4000.0));

  DistributionSpec gamma;
  gamma.kind = DistributionSpec::Kind::gamma;
  gamma.m = 500;
  gamma.shape = 2.0;
  gamma.rate = 0.25;
  for (int d : generate_sizes(gamma, rng)) CHECK(d >= 2);
}

TEST_CASE("random and proportional allocations are valid compositions") {
  RngHandle rng(6);
  const auto instance = make_instance({2, 5, 9});
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 1 + static_cast<int>(rng.next_below(20));
    const auto random_alloc = detail::random_allocation(3, K, rng);
    const auto prop_alloc = detail::proportional_allocation(instance, K);
    for (int k : random_alloc) CHECK(k >= 0);
    for (int k : prop_alloc) CHECK(k >= 0);
    CHECK(std::accumulate(random_alloc.begin(), random_alloc.end(), 0) == K);
    CHECK(std::accumulate(prop_alloc.begin(), prop_alloc.end(), 0) == K);
  }
  CHECK(detail::proportional_allocation(instance, 16) == Allocation{2, 5, 9});
}

TEST_CASE("regret report is byte-identical across runs") {
  nlohmann::json j = {{"experiment", "regret"},
                      {"sizes", {2, 3, 4}},
                      {"budget", 5},
                      {"horizon", 30},
                      {"seed", 17},
                      {"replications", 3},
                      {"variants", {"paired_lcb", "chained_empirical"}},
                      {"modes", {"nonadaptive", "adaptive"}}};
  const auto cfg = parse_experiment_config(j);
  const std::string a = run_regret(cfg).body();
  const std::string b = run_regret(cfg).body();
  CHECK(a == b);
  // 2 variants x 2 modes x 30 rounds + comment + header
  CHECK(std::count(a.begin(), a.end(), '\n') == 2 * 2 * 30 + 2);
}

TEST_CASE("reward vs budget report is ordered sensibly") {
  nlohmann::json j = {{"experiment", "reward_vs_budget"}, {"sizes", {2, 3, 5}},
                      {"budget_min", 4},                  {"budget_max", 10},
                      {"seed", 23},                       {"replications", 200}};
  const auto cfg = parse_experiment_config(j);
  const auto report = run_reward_vs_budget(cfg);
  CHECK(report.header == "K,method,mean_reward,std_reward,n");
  // parse means back out: rows come in groups of four per K
  std::vector<double> random_means, adaptive_means;
  for (const auto& row : report.rows) {
    const auto first = row.find(',');
    const auto second = row.find(',', first + 1);
    const auto third = row.find(',', second + 1);
    const std::string method = row.substr(first + 1, second - first - 1);
    const double mean = std::stod(row.substr(second + 1, third - second - 1));
    if (method == "random") random_means.push_back(mean);
    if (method == "adaptive_opt") adaptive_means.push_back(mean);
  }
  REQUIRE(random_means.size() == 7);
  REQUIRE(adaptive_means.size() == 7);
  for (std::size_t x = 0; x < 7; ++x) CHECK(adaptive_means[x] >= random_means[x] - 0.2);
  // saturation: with K = sum d_i the adaptive policy nearly exhausts the pool
  CHECK(adaptive_means.back() > 7.0);
}

TEST_CASE("allocation distance stays within the sandwich slack") {
  nlohmann::json j = {{"experiment", "allocation_distance"},
                      {"distribution", {{"kind", "uniform_discrete"}, {"m", 4}, {"lo", 2}, {"hi", 8}}},
                      {"seed", 31},
                      {"replications", 100}};
  const auto cfg = parse_experiment_config(j);
  const auto report = run_allocation_distance(cfg);
  REQUIRE(report.rows.size() == 1);
  const auto& row = report.rows[0];
  const auto first = row.find(',');
  const auto second = row.find(',', first + 1);
  const auto third = row.find(',', second + 1);
  const double mean_lower = std::stod(row.substr(second + 1, third - second - 1));
  CHECK(mean_lower <= 4.0);
  CHECK(mean_lower >= 0.0);
}
