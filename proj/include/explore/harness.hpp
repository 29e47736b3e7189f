#ifndef EXPLORE_HARNESS_HPP
#define EXPLORE_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "explore/auction.hpp"
#include "explore/belief.hpp"
#include "explore/grid.hpp"
#include "explore/predictor.hpp"
#include "explore/prior_sampler.hpp"
#include "explore/sim.hpp"
#include "explore/tasking.hpp"
#include "explore/worldgen.hpp"

namespace explore::harness {

struct TaskParams {
  int scatter_count = 64;
  double frontier_period = 5.0;  // s
  int min_cluster = 5;
  double dedupe_radius = 3.0;      // m
  double completion_radius = 2.0;  // m
};

struct TrialConfig {
  std::uint64_t world_seed = 0;
  std::uint64_t sim_seed = 0;
  /// "prior", "oracle:<flip rate>", "stdio:<command>" or "tcp:<host>:<port>".
  std::string predictor = "prior";
  tasking::RewardPolicy policy;
  sim::SimConfig sim;
  worldgen::TownParams town;
  predictor::PriorSamplerParams prior;
  belief::BeliefParams belief;
  auction::AuctionParams auction;
  TaskParams tasks;
  std::vector<double> thresholds{0.95, 0.99, 0.998};
  double duration = 400.0;  // s
  /// A crossing counts once accuracy holds for this many consecutive prediction ticks.
  int sustain_ticks = 2;
  /// Times (s) at which map snapshots are kept for rendering; the final state is always kept.
  std::vector<double> snapshot_times;
  bool auction_trace = false;

  void validate() const;
};

struct TickRecord {
  double time = 0.0;
  double explored = 0.0;
  double accuracy = 0.0;
  bool degraded = false;
  std::size_t live_tasks = 0;
  int auction_rounds = 0;
  bool auction_converged = true;
};

struct MapSnapshot {
  double time = 0.0;
  grid::OccupancyGrid observed;
  grid::OccupancyGrid predicted;
  belief::EntropyField entropy;
};

struct TrialRecord {
  TrialConfig config;
  std::vector<TickRecord> ticks;
  /// Per threshold, first sustained crossing time.
  std::vector<std::optional<double>> crossings;
  grid::OccupancyGrid truth;
  std::vector<MapSnapshot> snapshots;  // requested times, then the final state
  tasking::TaskRegistry tasks;
  std::string auction_trace;  // JSON lines, when requested
  std::size_t degraded_predictions = 0;
  std::size_t repaired_cells = 0;
  std::size_t unconverged_auctions = 0;
  std::uint64_t world_state_hash = 0;

  /// Digest over the metric rows and the final world state.
  [[nodiscard]] std::uint64_t hash() const;
};

[[nodiscard]] std::unique_ptr<predictor::Predictor> make_predictor(
    const std::string& spec,
    const grid::OccupancyGrid& truth,
    const predictor::PriorSamplerParams& prior = {});

[[nodiscard]] TrialRecord run_trial(const TrialConfig& config);

/// First time accuracy is >= threshold on `sustain` consecutive ticks.
[[nodiscard]] std::optional<double> sustained_crossing(const std::vector<TickRecord>& ticks, double threshold, int sustain);

/// Explored fraction at which the half-credit accuracy of the raw observation reaches
/// `accuracy_threshold`: 2t - 1.
[[nodiscard]] double equivalent_uncovered_threshold(double accuracy_threshold);

[[nodiscard]] std::string metrics_csv(const TrialRecord& record);
[[nodiscard]] std::string crossings_csv(const TrialRecord& record);
[[nodiscard]] nlohmann::json summary_json(const TrialRecord& record);

/// metrics.csv, crossings.csv, tasks.csv, summary.json and snapshot PNGs.
void write_trial(const std::filesystem::path& dir, const TrialRecord& record);

struct Stats {
  std::size_t count = 0;  // samples that exist (e.g. trials that crossed)
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
};

/// Quartiles by linear interpolation between order statistics. Empty input gives count 0.
[[nodiscard]] Stats describe(std::vector<double> values);

struct PolicySummary {
  tasking::RewardKind policy = tasking::RewardKind::Constant;
  std::vector<std::uint64_t> world_seeds;
  std::vector<double> times;
  std::vector<Stats> explored;  // per tick across trials
  std::vector<Stats> accuracy;
  /// Per threshold. Trials that never cross are left out of the statistics and counted in
  /// `never_crossed`.
  std::vector<Stats> crossing;
  std::vector<std::size_t> never_crossed;
};

struct CampaignResult {
  std::vector<double> thresholds;
  std::vector<PolicySummary> policies;
  std::vector<TrialRecord> trials;  // policy-major, in seed order
  std::vector<std::string> failures;
};

struct SeedPair {
  std::uint64_t world = 0;
  std::uint64_t sim = 0;
};

/// One trial per (policy, seed pair) on `base`, spread over `workers` threads (0: hardware
/// concurrency). Results do not depend on the worker count.
[[nodiscard]] CampaignResult run_campaign(
    const TrialConfig& base,
    const std::vector<tasking::RewardKind>& policies,
    const std::vector<SeedPair>& seeds,
    int workers = 0);

/// Per-trial directories plus campaign-level metrics.csv, crossings.csv, summary.json and
/// explored.png / accuracy.png (median line, interquartile band, one color per policy).
void write_campaign(const std::filesystem::path& dir, const CampaignResult& result, bool per_trial_outputs = true);

/// Lines of "world [sim]"; '#' starts a comment. A missing sim seed equals the world seed.
[[nodiscard]] std::vector<SeedPair> read_seed_list(const std::filesystem::path& path);

/// Applies the keys present in a YAML document to `config`; unknown keys are an error.
void apply_yaml(TrialConfig& config, const std::string& yaml_text);
[[nodiscard]] TrialConfig load_config(const std::filesystem::path& path);
/// The effective configuration as YAML, loadable by load_config.
[[nodiscard]] std::string to_yaml(const TrialConfig& config);

}  // namespace explore::harness

#endif  // EXPLORE_HARNESS_HPP
