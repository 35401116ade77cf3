#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commx/adaptive.hpp"
#include "commx/experiments.hpp"
#include "commx/model.hpp"
#include "commx/nonadaptive.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitSizeGuard = 3;

void print_allocation(const commx::Allocation& alloc) {
  for (std::size_t i = 0; i < alloc.size(); ++i) std::cout << (i ? "," : "") << alloc[i];
}

std::string default_output_name(const commx::ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case commx::ExperimentConfig::Kind::reward_vs_budget: return "reward_vs_budget.csv";
    case commx::ExperimentConfig::Kind::allocation_distance: return "allocation_distance.csv";
    case commx::ExperimentConfig::Kind::regret: return "regret.csv";
    default: return "report.csv";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Community exploration toolkit"};
  app.require_subcommand(1);

  std::vector<int> sizes;
  int budget = 0;
  bool fast = false;
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> budget_override, replications_override;
  std::optional<long long> horizon_override;

  auto* allocate = app.add_subcommand("allocate", "Optimal non-adaptive allocation");
  allocate->add_option("--sizes", sizes, "community sizes, comma separated")
      ->required()
      ->delimiter(',');
  allocate->add_option("--budget", budget, "exploration budget K")->required();
  allocate->add_flag("--fast", fast, "use the bound-seeded fast allocation");

  auto* adaptive = app.add_subcommand("adaptive-reward", "Expected reward of the greedy policy");
  adaptive->add_option("--sizes", sizes, "community sizes, comma separated")
      ->required()
      ->delimiter(',');
  adaptive->add_option("--budget", budget, "exploration budget K")->required();

  auto* oracle = app.add_subcommand("oracle", "Brute-force optima (small instances)");
  oracle->add_option("--sizes", sizes, "community sizes, comma separated")
      ->required()
      ->delimiter(',');
  oracle->add_option("--budget", budget, "exploration budget K")->required();

  auto* experiment = app.add_subcommand("experiment", "Run an experiment from a JSON config");
  experiment->add_option("--config", config_path, "JSON config path")->required();
  experiment->add_option("--out", out_dir, "output directory")->required();
  experiment->add_option("--seed", seed_override, "override base seed");
  experiment->add_option("--budget", budget_override, "override budget");
  experiment->add_option("--horizon", horizon_override, "override horizon");
  experiment->add_option("--replications", replications_override, "override replications");

  auto* regret = app.add_subcommand("regret", "Run a regret experiment from a JSON config");
  regret->add_option("--config", config_path, "JSON config path")->required();
  regret->add_option("--out", out_dir, "output directory (default: config output path)");
  regret->add_option("--seed", seed_override, "override base seed");
  regret->add_option("--budget", budget_override, "override budget");
  regret->add_option("--horizon", horizon_override, "override horizon");
  regret->add_option("--replications", replications_override, "override replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (allocate->parsed()) {
      const auto instance = commx::make_instance(sizes);
      const commx::Allocation alloc = fast ? commx::fast_allocation(instance, budget)
                                           : commx::greedy_allocation(instance, budget);
      std::cout << "allocation=";
      print_allocation(alloc);
      std::cout << "\nexpected_reward=" << commx::detail::fmt(commx::expected_reward(instance, alloc))
                << "\n";
      return kExitOk;
    }
    if (adaptive->parsed()) {
      const auto instance = commx::make_instance(sizes);
      std::cout << "expected_reward="
                << commx::detail::fmt(commx::expected_reward_greedy(instance, budget)) << "\n";
      return kExitOk;
    }
    if (oracle->parsed()) {
      const auto instance = commx::make_instance(sizes);
      const auto [alloc, value] = commx::brute_force_optimal(instance, budget);
      std::cout << "nonadaptive_allocation=";
      print_allocation(alloc);
      std::cout << "\nnonadaptive_value=" << commx::detail::fmt(value) << "\n";
      std::cout << "adaptive_value="
                << commx::detail::fmt(commx::optimal_policy_value_oracle(instance, budget)) << "\n";
      return kExitOk;
    }

    // experiment / regret: JSON config, CLI overrides win
    commx::ExperimentConfig cfg = commx::load_experiment_config(config_path);
    if (seed_override) cfg.base_seed = *seed_override;
    if (budget_override) cfg.budget = *budget_override;
    if (horizon_override) cfg.horizon = *horizon_override;
    if (replications_override) cfg.replications = *replications_override;

    if (regret->parsed() && cfg.kind != commx::ExperimentConfig::Kind::regret)
      throw commx::config_error("regret subcommand requires experiment kind 'regret'");

    commx::CsvReport report;
    switch (cfg.kind) {
      case commx::ExperimentConfig::Kind::reward_vs_budget:
        report = commx::run_reward_vs_budget(cfg);
        break;
      case commx::ExperimentConfig::Kind::allocation_distance:
        report = commx::run_allocation_distance(cfg);
        break;
      case commx::ExperimentConfig::Kind::regret:
        report = commx::run_regret(cfg);
        break;
      case commx::ExperimentConfig::Kind::allocate: {
        if (!cfg.sizes) throw commx::config_error("allocate experiment requires explicit sizes");
        const auto instance = commx::make_instance(*cfg.sizes);
        const auto alloc = commx::greedy_allocation(instance, cfg.budget);
        std::cout << "allocation=";
        print_allocation(alloc);
        std::cout << "\nexpected_reward="
                  << commx::detail::fmt(commx::expected_reward(instance, alloc)) << "\n";
        return kExitOk;
      }
      case commx::ExperimentConfig::Kind::adaptive_reward: {
        if (!cfg.sizes)
          throw commx::config_error("adaptive_reward experiment requires explicit sizes");
        const auto instance = commx::make_instance(*cfg.sizes);
        std::cout << "expected_reward="
                  << commx::detail::fmt(commx::expected_reward_greedy(instance, cfg.budget))
                  << "\n";
        return kExitOk;
      }
    }

    std::string out_path;
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      out_path = (std::filesystem::path(out_dir) /
                  (cfg.output_path.empty()
                       ? std::filesystem::path(default_output_name(cfg))
                       : std::filesystem::path(cfg.output_path).filename()))
                     .string();
    } else if (!cfg.output_path.empty()) {
      out_path = cfg.output_path;
    }
    if (out_path.empty()) {
      std::cout << report.body();
    } else {
      report.write(out_path);
      std::cout << "wrote " << out_path << "\n";
    }
    return kExitOk;
  } catch (const commx::size_guard_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSizeGuard;
  } catch (const commx::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
