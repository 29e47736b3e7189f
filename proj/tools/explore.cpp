// Command-line front end: trials, campaigns, world generation and dataset export.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "explore/harness.hpp"
#include "explore/image_io.hpp"
#include "explore/wander.hpp"
#include "explore/worldgen.hpp"

namespace fs = std::filesystem;
using namespace explore;

namespace {

harness::TrialConfig base_config(const std::string& path) {
  return path.empty() ? harness::TrialConfig{} : harness::load_config(path);
}

std::vector<harness::SeedPair> seeds_from(const std::string& list, std::uint64_t first, int count) {
  if (!list.empty()) {
    return harness::read_seed_list(list);
  }
  std::vector<harness::SeedPair> seeds;
  for (int i = 0; i < count; ++i) {
    seeds.push_back({first + static_cast<std::uint64_t>(i), first + static_cast<std::uint64_t>(i)});
  }
  return seeds;
}

void report(const harness::CampaignResult& result) {
  for (const auto& p : result.policies) {
    std::cout << tasking::to_string(p.policy) << ":";
    for (std::size_t i = 0; i < result.thresholds.size(); ++i) {
      const auto& s = p.crossing[i];
      std::cout << "  " << result.thresholds[i] << " ";
      if (s.count == 0) {
        std::cout << "never";
      } else {
        std::cout << "median " << s.median << " s [" << s.q1 << ", " << s.q3 << "]";
      }
      if (p.never_crossed[i] > 0) {
        std::cout << " (" << p.never_crossed[i] << " never)";
      }
    }
    std::cout << "\n";
  }
  for (const auto& f : result.failures) {
    std::cout << "failed: " << f << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot exploration with predicted maps"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // run: one policy over a seed list.
  std::string config_path;
  std::string policy = "generative";
  std::string seed_list;
  std::string out;
  std::uint64_t first_seed = 1;
  int count = 10;
  int workers = 0;
  bool no_trial_outputs = false;
  std::vector<double> snapshots;
  auto* run = app.add_subcommand("run", "Run trials of one reward policy");
  run->add_option("--config", config_path, "YAML config")->check(CLI::ExistingFile);
  run->add_option("--policy", policy, "constant, visible or generative")->check(CLI::IsMember({"constant", "visible", "generative"}));
  run->add_option("--seed-list", seed_list, "Lines of 'world [sim]'")->check(CLI::ExistingFile);
  run->add_option("--first-seed", first_seed, "Without a seed list: first world seed");
  run->add_option("--count", count, "Without a seed list: number of seeds")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--workers", workers, "Worker threads (0: all cores)");
  run->add_option("--snapshots", snapshots, "Times (s) at which to render maps");
  run->add_flag("--no-trial-outputs", no_trial_outputs, "Only write campaign-level files");

  // campaign: several policies over the same seeds.
  std::vector<std::string> policies{"constant", "visible", "generative"};
  auto* camp = app.add_subcommand("campaign", "Run every policy over the same seeds");
  camp->add_option("--config", config_path, "YAML config")->check(CLI::ExistingFile);
  camp->add_option("--policies", policies, "Policies to compare")->delimiter(',')->check(CLI::IsMember({"constant", "visible", "generative"}));
  camp->add_option("--seed-list", seed_list, "Lines of 'world [sim]'")->check(CLI::ExistingFile);
  camp->add_option("--first-seed", first_seed, "Without a seed list: first world seed");
  camp->add_option("--count", count, "Without a seed list: number of seeds")->check(CLI::PositiveNumber);
  camp->add_option("--out", out, "Output directory")->required();
  camp->add_option("--workers", workers, "Worker threads (0: all cores)");
  camp->add_option("--snapshots", snapshots, "Times (s) at which to render maps");
  camp->add_flag("--no-trial-outputs", no_trial_outputs, "Only write campaign-level files");

  // worldgen: ground truth plus layout per seed.
  auto* wg = app.add_subcommand("worldgen", "Generate ground-truth worlds");
  wg->add_option("--config", config_path, "YAML config (world section)")->check(CLI::ExistingFile);
  wg->add_option("--seed", first_seed, "First seed");
  wg->add_option("--count", count, "Number of consecutive seeds")->check(CLI::PositiveNumber);
  wg->add_option("--out", out, "Output directory")->required();

  // dataset: wanderer rollouts.
  int rollouts = 1;
  std::string schedule = "train";
  auto* ds = app.add_subcommand("dataset", "Export wanderer observation snapshots");
  ds->add_option("--config", config_path, "YAML config (world and sim sections)")->check(CLI::ExistingFile);
  ds->add_option("--seed", first_seed, "First map seed");
  ds->add_option("--maps", count, "Number of maps")->check(CLI::PositiveNumber);
  ds->add_option("--rollouts", rollouts, "Rollouts per map")->check(CLI::PositiveNumber);
  ds->add_option("--schedule", schedule, "Coverage schedule")->check(CLI::IsMember({"train", "test"}));
  ds->add_option("--out", out, "Output directory")->required();

  // config: print the effective configuration.
  auto* cfg = app.add_subcommand("config", "Print the effective configuration as YAML");
  cfg->add_option("--config", config_path, "YAML config")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    harness::TrialConfig base = base_config(config_path);
    if (*cfg) {
      std::cout << harness::to_yaml(base);
      return 0;
    }
    if (*run || *camp) {
      if (!snapshots.empty()) {
        base.snapshot_times = snapshots;
      }
      std::vector<tasking::RewardKind> kinds;
      for (const auto& p : *run ? std::vector<std::string>{policy} : policies) {
        kinds.push_back(tasking::parse_reward_kind(p));
      }
      const auto seeds = seeds_from(seed_list, first_seed, count);
      const auto result = harness::run_campaign(base, kinds, seeds, workers);
      fs::create_directories(out);
      harness::write_campaign(out, result, !no_trial_outputs);
      std::ofstream(fs::path(out) / "config.yaml") << harness::to_yaml(base);
      report(result);
      return result.failures.empty() ? 0 : 1;
    }
    if (*wg) {
      fs::create_directories(out);
      for (int i = 0; i < count; ++i) {
        worldgen::TownParams town = base.town;
        town.seed = first_seed + static_cast<std::uint64_t>(i);
        const auto [layout, truth] = worldgen::generate(town);
        const std::string stem = "world_" + std::to_string(town.seed);
        image_io::write_grid_png(fs::path(out) / (stem + ".png"), truth);
        std::ofstream(fs::path(out) / (stem + ".json")) << worldgen::to_json(layout).dump(2) << "\n";
      }
      return 0;
    }
    if (*ds) {
      sim::DatasetSpec spec;
      spec.out = out;
      spec.first_seed = first_seed;
      spec.map_count = count;
      spec.rollouts_per_map = rollouts;
      spec.town = base.town;
      spec.wander.n_robots = base.sim.n_robots;
      spec.wander.sensor_radius = base.sim.sensor_radius;
      spec.wander.lidar_rays = base.sim.lidar_rays;
      spec.wander.dt = base.sim.dt;
      spec.wander.speed = base.sim.robot_speed;
      spec.wander.schedule = schedule == "train" ? sim::training_schedule() : sim::test_schedule();
      const auto summary = sim::export_dataset(spec);
      std::cout << summary.maps << " maps, " << summary.snapshots << " snapshots, " << summary.truncated_rollouts << " truncated rollouts\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
