#include "explore/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "explore/image_io.hpp"
#include "explore/plot.hpp"
#include "explore/seeding.hpp"

namespace explore::harness {

using grid::OccupancyGrid;
using tasking::TaskRegistry;

namespace {

// Seed streams derived from the sim seed.
constexpr std::uint64_t kStartStream = 0;
constexpr std::uint64_t kScatterStream = 1;
constexpr std::uint64_t kPredictionStream = 1000;

bool whole_ticks(double period, double dt) {
  const double n = period / dt;
  return std::abs(n - std::round(n)) < 1e-9 && std::round(n) >= 1.0;
}

}  // namespace

void TrialConfig::validate() const {
  sim.validate();
  town.validate();
  belief.validate();
  policy.validate();
  auction.validate();
  if (thresholds.empty()) {
    throw std::invalid_argument("trial config: no accuracy thresholds");
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > 0.5 && thresholds[i] <= 1.0) || (i > 0 && !(thresholds[i] > thresholds[i - 1]))) {
      throw std::invalid_argument("trial config: thresholds must increase strictly within (0.5, 1]");
    }
  }
  if (!(duration > 0.0) || sustain_ticks < 1) {
    throw std::invalid_argument("trial config: duration and sustain_ticks must be positive");
  }
  if (!whole_ticks(tasks.frontier_period, sim.dt)) {
    throw std::invalid_argument("trial config: frontier period must be a whole number of ticks");
  }
  if (tasks.scatter_count < 1 || tasks.min_cluster < 1 || !(tasks.dedupe_radius >= 0.0) || !(tasks.completion_radius > 0.0)) {
    throw std::invalid_argument("trial config: invalid task parameters");
  }
}

std::unique_ptr<predictor::Predictor> make_predictor(
    const std::string& spec,
    const OccupancyGrid& truth,
    const predictor::PriorSamplerParams& prior) {
  if (spec == "prior") {
    return std::make_unique<predictor::PriorSampler>(prior);
  }
  if (spec == "oracle" || spec.starts_with("oracle:")) {
    double flip = 0.0;
    if (spec.size() > 7) {
      std::size_t used = 0;
      flip = std::stod(spec.substr(7), &used);
      if (used != spec.size() - 7 || !(flip >= 0.0 && flip <= 1.0)) {
        throw std::invalid_argument("bad oracle flip rate in '" + spec + "'");
      }
    }
    return std::make_unique<predictor::OraclePredictor>(truth, flip);
  }
  if (spec.starts_with("stdio:") || spec.starts_with("tcp:")) {
    return std::make_unique<predictor::ExternalPredictor>(predictor::Endpoint::parse(spec));
  }
  throw std::invalid_argument("unknown predictor '" + spec + "'");
}

std::optional<double> sustained_crossing(const std::vector<TickRecord>& ticks, double threshold, int sustain) {
  int run = 0;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    run = ticks[i].accuracy >= threshold ? run + 1 : 0;
    if (run >= sustain) {
      return ticks[i + 1 - static_cast<std::size_t>(sustain)].time;
    }
  }
  return std::nullopt;
}

double equivalent_uncovered_threshold(double accuracy_threshold) {
  if (!(accuracy_threshold > 0.5 && accuracy_threshold <= 1.0)) {
    throw std::invalid_argument("accuracy threshold must lie in (0.5, 1]");
  }
  return 2.0 * accuracy_threshold - 1.0;
}

namespace {

class Trial {
 public:
  explicit Trial(const TrialConfig& config) : cfg_(config) {
    cfg_.validate();
    // Visible entropy looks through the same sensor the robots carry.
    cfg_.policy.sensor_radius = cfg_.sim.sensor_radius;
    cfg_.policy.rays = cfg_.sim.lidar_rays;
    worldgen::TownParams town = cfg_.town;
    town.seed = cfg_.world_seed;
    auto generated = worldgen::generate(town);
    rec_.config = cfg_;
    rec_.truth = std::move(generated.second);

    sim::SimConfig sc = cfg_.sim;
    sc.seed = cfg_.sim_seed;
    std::mt19937_64 start_rng(derive_seed(cfg_.sim_seed, kStartStream));
    auto starts = sim::edge_starts(rec_.truth, sc.n_robots, start_rng);
    world_ = std::make_unique<sim::World>(rec_.truth, sc, std::move(starts));

    // The sampler draws from the same layout distribution the worlds come from.
    predictor::PriorSamplerParams prior = cfg_.prior;
    prior.prior = town;
    predictor_ = make_predictor(cfg_.predictor, rec_.truth, prior);
    belief_ = std::make_unique<belief::BeliefField>(rec_.truth, cfg_.belief);
    auction_ = cfg_.auction;
    auction_.speed = sc.robot_speed;
    plans_.resize(static_cast<std::size_t>(sc.n_robots));
    snapshot_times_ = cfg_.snapshot_times;
    std::ranges::sort(snapshot_times_);
  }

  TrialRecord run() {
    TaskRegistry& reg = rec_.tasks;
    reg.add(tasking::scatter_tasks(cfg_.tasks.scatter_count, rec_.truth, derive_seed(cfg_.sim_seed, kScatterStream)), 0.0);

    const double dt = cfg_.sim.dt;
    const long prediction_ticks = cfg_.sim.prediction_ticks();
    const long frontier_ticks = std::lround(cfg_.tasks.frontier_period / dt);
    const long total = std::lround(cfg_.duration / dt);
    for (long tick = 0; tick <= total; ++tick) {
      const double now = world_->time();
      if (tick % frontier_ticks == 0) {
        reg.add_frontiers(tasking::extract_frontiers(world_->observed(), cfg_.tasks.min_cluster), cfg_.tasks.dedupe_radius, now);
      }
      if (tick % prediction_ticks == 0) {
        prediction_tick(now);
      }
      if (tick == total || world_->explored_fraction() >= 1.0) {
        break;
      }
      const sim::StepReport report = world_->step();
      after_step(report);
    }
    rec_.snapshots.push_back({world_->time(), world_->observed(), predicted_, entropy_});
    for (double threshold : cfg_.thresholds) {
      rec_.crossings.push_back(sustained_crossing(rec_.ticks, threshold, cfg_.sustain_ticks));
    }
    rec_.world_state_hash = world_->state_hash();
    return std::move(rec_);
  }

 private:
  void prediction_tick(double now) {
    const OccupancyGrid& observed = world_->observed();
    const auto request = predictor::make_request(observed, next_request_++, now);
    const predictor::PredictedMap prediction =
        predictor_->predict(request, derive_seed(cfg_.sim_seed, kPredictionStream + request.id));
    if (prediction.degraded) {
      ++rec_.degraded_predictions;
    }
    rec_.repaired_cells += prediction.repaired_cells;
    predicted_ = prediction.grid;
    belief_->update(predicted_, observed);
    entropy_ = belief::entropy(*belief_);

    TickRecord row;
    row.time = now;
    row.explored = world_->explored_fraction();
    row.accuracy = grid::accuracy(predicted_, rec_.truth, false);
    row.degraded = prediction.degraded;

    reauction(now, row);
    rec_.ticks.push_back(row);

    while (next_snapshot_ < snapshot_times_.size() && snapshot_times_[next_snapshot_] <= now + 1e-9) {
      rec_.snapshots.push_back({now, observed, predicted_, entropy_});
      ++next_snapshot_;
    }
  }

  void reauction(double now, TickRecord& row) {
    TaskRegistry& reg = rec_.tasks;
    const std::vector<int> live = reg.live();
    row.live_tasks = live.size();
    std::vector<auction::AuctionTask> tasks;
    tasks.reserve(live.size());
    for (int id : live) {
      const tasking::Task& t = reg.task(id);
      tasks.push_back({id, t.location, tasking::reward(t, cfg_.policy, world_->observed(), &entropy_), false});
    }
    std::vector<auction::Agent> agents;
    for (const sim::RobotState& r : world_->robots()) {
      agents.push_back({r.id, r.position});
    }
    std::ostringstream trace;
    const auction::Assignment a = auction::run_auction(agents, tasks, auction_, cfg_.auction_trace ? &trace : nullptr);
    if (cfg_.auction_trace) {
      std::istringstream lines(trace.str());
      for (std::string line; std::getline(lines, line);) {
        rec_.auction_trace += fmt::format("{{\"time\":{:.1f},\"record\":{}}}\n", now, line);
      }
    }
    row.auction_rounds = a.rounds;
    row.auction_converged = a.converged;
    if (!a.converged) {
      ++rec_.unconverged_auctions;
    }

    for (std::size_t j = 0; j < tasks.size(); ++j) {
      const int id = tasks[j].id;
      const int winner = a.winners[j];
      const auto it = holder_.find(id);
      const int previous = it == holder_.end() ? auction::kNoWinner : it->second;
      if (winner == previous) {
        continue;
      }
      if (winner == auction::kNoWinner) {
        reg.release(id, now);
        holder_.erase(id);
      } else {
        reg.assign(id, winner, tasks[j].reward, now);
        holder_[id] = winner;
      }
    }
    for (std::size_t r = 0; r < plans_.size(); ++r) {
      plans_[r].clear();
      for (int j : a.paths[r]) {
        plans_[r].push_back(tasks[static_cast<std::size_t>(j)].id);
      }
      pursue(static_cast<int>(r), now);
    }
  }

  // Points the robot at the first live task of its plan, abandoning tasks it cannot reach.
  void pursue(int robot, double now) {
    TaskRegistry& reg = rec_.tasks;
    auto& plan = plans_[static_cast<std::size_t>(robot)];
    while (!plan.empty()) {
      const int id = plan.front();
      const tasking::Task& t = reg.task(id);
      if (!t.terminal() && world_->set_goal(robot, id, t.location)) {
        return;
      }
      if (!t.terminal()) {
        reg.abandon(id, robot, now);
        holder_.erase(id);
      }
      plan.erase(plan.begin());
    }
    world_->clear_goal(robot);
  }

  void after_step(const sim::StepReport& report) {
    TaskRegistry& reg = rec_.tasks;
    const double now = world_->time();
    for (int robot : report.unreachable) {
      auto& plan = plans_[static_cast<std::size_t>(robot)];
      if (!plan.empty() && !reg.task(plan.front()).terminal()) {
        reg.abandon(plan.front(), robot, now);
        holder_.erase(plan.front());
      }
    }
    const double radius = cfg_.tasks.completion_radius;
    bool any_completed = false;
    for (const sim::RobotState& r : world_->robots()) {
      for (int id : reg.live()) {
        if (distance(reg.task(id).location, r.position) <= radius) {
          reg.complete(id, r.id, now);
          holder_.erase(id);
          any_completed = true;
        }
      }
    }
    for (const sim::RobotState& r : world_->robots()) {
      const auto& plan = plans_[static_cast<std::size_t>(r.id)];
      if (plan.empty()) {
        continue;
      }
      if (!r.goal_point || (any_completed && reg.task(plan.front()).terminal())) {
        pursue(r.id, now);
      }
    }
  }

  TrialConfig cfg_;
  TrialRecord rec_;
  std::unique_ptr<sim::World> world_;
  std::unique_ptr<predictor::Predictor> predictor_;
  std::unique_ptr<belief::BeliefField> belief_;
  auction::AuctionParams auction_;
  std::vector<std::vector<int>> plans_;
  std::map<int, int> holder_;  // task id -> robot holding it
  OccupancyGrid predicted_;
  belief::EntropyField entropy_;
  std::uint32_t next_request_ = 0;
  std::vector<double> snapshot_times_;
  std::size_t next_snapshot_ = 0;
};

}  // namespace

TrialRecord run_trial(const TrialConfig& config) { return Trial(config).run(); }

std::string metrics_csv(const TrialRecord& record) {
  std::string out = "time,explored,accuracy,degraded,live_tasks,auction_rounds\n";
  for (const TickRecord& t : record.ticks) {
    out += fmt::format("{:.1f},{:.6f},{:.6f},{},{},{}\n", t.time, t.explored, t.accuracy, t.degraded ? 1 : 0, t.live_tasks, t.auction_rounds);
  }
  return out;
}

std::string crossings_csv(const TrialRecord& record) {
  std::string out = "threshold,equivalent_uncovered,time\n";
  for (std::size_t i = 0; i < record.crossings.size(); ++i) {
    const double th = record.config.thresholds[i];
    out += fmt::format("{},{:.4f},{}\n", th, equivalent_uncovered_threshold(th),
                       record.crossings[i] ? fmt::format("{:.1f}", *record.crossings[i]) : std::string{});
  }
  return out;
}

std::uint64_t TrialRecord::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : metrics_csv(*this)) {
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  }
  for (int k = 0; k < 8; ++k) {
    h = (h ^ ((world_state_hash >> (8 * k)) & 0xFFU)) * 1099511628211ULL;
  }
  return h;
}

nlohmann::json summary_json(const TrialRecord& record) {
  const TrialConfig& c = record.config;
  nlohmann::json crossings = nlohmann::json::array();
  for (std::size_t i = 0; i < record.crossings.size(); ++i) {
    crossings.push_back({{"threshold", c.thresholds[i]},
                         {"equivalent_uncovered", equivalent_uncovered_threshold(c.thresholds[i])},
                         {"time", record.crossings[i] ? nlohmann::json(*record.crossings[i]) : nlohmann::json(nullptr)}});
  }
  std::map<std::string, int> events;
  for (const auto& e : record.tasks.events()) {
    ++events[e.event];
  }
  const TickRecord last = record.ticks.empty() ? TickRecord{} : record.ticks.back();
  return {{"world_seed", c.world_seed},
          {"sim_seed", c.sim_seed},
          {"policy", tasking::to_string(c.policy.kind)},
          {"predictor", c.predictor},
          {"duration", c.duration},
          {"prediction_ticks", record.ticks.size()},
          {"final_explored", last.explored},
          {"final_accuracy", last.accuracy},
          {"crossings", crossings},
          {"task_events", events},
          {"degraded_predictions", record.degraded_predictions},
          {"repaired_cells", record.repaired_cells},
          {"unconverged_auctions", record.unconverged_auctions},
          {"hash", fmt::format("{:016x}", record.hash())}};
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

std::string time_label(double t) { return std::abs(t - std::round(t)) < 1e-9 ? fmt::format("{:.0f}", t) : fmt::format("{:.1f}", t); }

}  // namespace

void write_trial(const std::filesystem::path& dir, const TrialRecord& record) {
  std::filesystem::create_directories(dir);
  write_text(dir / "metrics.csv", metrics_csv(record));
  write_text(dir / "crossings.csv", crossings_csv(record));
  write_text(dir / "summary.json", summary_json(record).dump(2) + "\n");
  record.tasks.write_log(dir / "tasks.csv");
  if (!record.auction_trace.empty()) {
    write_text(dir / "auction_trace.jsonl", record.auction_trace);
  }
  image_io::write_grid_png(dir / "truth.png", record.truth);
  for (std::size_t i = 0; i < record.snapshots.size(); ++i) {
    const MapSnapshot& s = record.snapshots[i];
    const std::string tag = i + 1 == record.snapshots.size() ? "final" : "t" + time_label(s.time);
    image_io::write_grid_png(dir / ("observed_" + tag + ".png"), s.observed);
    if (s.predicted.size() > 0) {
      image_io::write_grid_png(dir / ("predicted_" + tag + ".png"), s.predicted);
      image_io::write_error_map_png(dir / ("error_" + tag + ".png"), grid::error_map(s.predicted, record.truth));
    }
    if (!s.entropy.bits.empty()) {
      belief::write_entropy_png(dir / ("entropy_" + tag + ".png"), s.entropy);
    }
  }
}

Stats describe(std::vector<double> values) {
  Stats s;
  s.count = values.size();
  if (values.empty()) {
    return s;
  }
  std::ranges::sort(values);
  const auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

namespace {

PolicySummary summarize(tasking::RewardKind kind, const std::vector<const TrialRecord*>& trials, const std::vector<double>& thresholds) {
  PolicySummary p;
  p.policy = kind;
  std::size_t longest = 0;
  for (const TrialRecord* t : trials) {
    p.world_seeds.push_back(t->config.world_seed);
    if (t->ticks.size() > longest) {
      longest = t->ticks.size();
      p.times.clear();
      for (const TickRecord& row : t->ticks) {
        p.times.push_back(row.time);
      }
    }
  }
  // Trials that ended early (fully explored) hold their last values.
  for (std::size_t k = 0; k < longest; ++k) {
    std::vector<double> explored;
    std::vector<double> accuracy;
    for (const TrialRecord* t : trials) {
      const TickRecord& row = t->ticks[std::min(k, t->ticks.size() - 1)];
      explored.push_back(row.explored);
      accuracy.push_back(row.accuracy);
    }
    p.explored.push_back(describe(explored));
    p.accuracy.push_back(describe(accuracy));
  }
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    std::vector<double> times;
    std::size_t never = 0;
    for (const TrialRecord* t : trials) {
      if (t->crossings[i]) {
        times.push_back(*t->crossings[i]);
      } else {
        ++never;
      }
    }
    p.crossing.push_back(describe(times));
    p.never_crossed.push_back(never);
  }
  return p;
}

nlohmann::json stats_json(const Stats& s) {
  if (s.count == 0) {
    return {{"count", 0}, {"median", nullptr}, {"q1", nullptr}, {"q3", nullptr}, {"mean", nullptr}};
  }
  return {{"count", s.count}, {"median", s.median}, {"q1", s.q1}, {"q3", s.q3}, {"mean", s.mean}};
}

}  // namespace

CampaignResult run_campaign(
    const TrialConfig& base,
    const std::vector<tasking::RewardKind>& policies,
    const std::vector<SeedPair>& seeds,
    int workers) {
  base.validate();
  if (policies.empty() || seeds.empty()) {
    throw std::invalid_argument("campaign: need at least one policy and one seed");
  }
  std::vector<TrialConfig> jobs;
  for (tasking::RewardKind kind : policies) {
    for (const SeedPair& s : seeds) {
      TrialConfig c = base;
      c.policy.kind = kind;
      c.world_seed = s.world;
      c.sim_seed = s.sim;
      jobs.push_back(c);
    }
  }
  std::vector<std::optional<TrialRecord>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = run_trial(jobs[i]);
        spdlog::info("trial {} world {} done", tasking::to_string(jobs[i].policy.kind), jobs[i].world_seed);
      } catch (const std::exception& e) {
        errors[i] = fmt::format("{} world {}: {}", tasking::to_string(jobs[i].policy.kind), jobs[i].world_seed, e.what());
        spdlog::error("trial failed: {}", errors[i]);
      }
    }
  };
  int n = workers > 0 ? workers : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  n = std::min<int>(n, static_cast<int>(jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n; ++w) {
      pool.emplace_back(work);
    }
    work();
  }

  CampaignResult out;
  out.thresholds = base.thresholds;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (results[i]) {
      out.trials.push_back(std::move(*results[i]));
    } else {
      out.failures.push_back(errors[i]);
    }
  }
  for (tasking::RewardKind kind : policies) {
    std::vector<const TrialRecord*> mine;
    for (const TrialRecord& t : out.trials) {
      if (t.config.policy.kind == kind) {
        mine.push_back(&t);
      }
    }
    if (!mine.empty()) {
      out.policies.push_back(summarize(kind, mine, base.thresholds));
    }
  }
  return out;
}

void write_campaign(const std::filesystem::path& dir, const CampaignResult& result, bool per_trial_outputs) {
  std::filesystem::create_directories(dir);
  std::string metrics = "policy,world_seed,sim_seed,time,explored,accuracy\n";
  std::string crossings = "policy,world_seed,sim_seed,threshold,time\n";
  for (const TrialRecord& t : result.trials) {
    const std::string policy = tasking::to_string(t.config.policy.kind);
    for (const TickRecord& row : t.ticks) {
      metrics += fmt::format("{},{},{},{:.1f},{:.6f},{:.6f}\n", policy, t.config.world_seed, t.config.sim_seed, row.time, row.explored, row.accuracy);
    }
    for (std::size_t i = 0; i < t.crossings.size(); ++i) {
      crossings += fmt::format("{},{},{},{},{}\n", policy, t.config.world_seed, t.config.sim_seed, t.config.thresholds[i],
                               t.crossings[i] ? fmt::format("{:.1f}", *t.crossings[i]) : std::string{});
    }
    if (per_trial_outputs) {
      write_trial(dir / policy / fmt::format("world_{}_sim_{}", t.config.world_seed, t.config.sim_seed), t);
    }
  }
  write_text(dir / "metrics.csv", metrics);
  write_text(dir / "crossings.csv", crossings);

  nlohmann::json summary;
  summary["thresholds"] = result.thresholds;
  summary["failures"] = result.failures;
  std::vector<plot::Band> explored_bands;
  std::vector<plot::Band> accuracy_bands;
  double t_max = 0.0;
  for (const PolicySummary& p : result.policies) {
    const std::string name = tasking::to_string(p.policy);
    nlohmann::json j;
    j["trials"] = p.world_seeds.size();
    j["world_seeds"] = p.world_seeds;
    nlohmann::json cross = nlohmann::json::array();
    for (std::size_t i = 0; i < p.crossing.size(); ++i) {
      nlohmann::json c = stats_json(p.crossing[i]);
      c["threshold"] = result.thresholds[i];
      c["equivalent_uncovered"] = equivalent_uncovered_threshold(result.thresholds[i]);
      c["never_crossed"] = p.never_crossed[i];
      cross.push_back(c);
    }
    j["crossings"] = cross;
    nlohmann::json series = nlohmann::json::array();
    plot::Band eb{name, plot::policy_color(static_cast<int>(p.policy)), {}, {}, {}, {}};
    plot::Band ab = eb;
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      series.push_back({{"time", p.times[k]}, {"explored", stats_json(p.explored[k])}, {"accuracy", stats_json(p.accuracy[k])}});
      eb.x.push_back(p.times[k]);
      eb.mid.push_back(p.explored[k].median);
      eb.lo.push_back(p.explored[k].q1);
      eb.hi.push_back(p.explored[k].q3);
      ab.x.push_back(p.times[k]);
      ab.mid.push_back(p.accuracy[k].median);
      ab.lo.push_back(p.accuracy[k].q1);
      ab.hi.push_back(p.accuracy[k].q3);
      t_max = std::max(t_max, p.times[k]);
    }
    j["series"] = series;
    summary["policies"][name] = j;
    explored_bands.push_back(std::move(eb));
    accuracy_bands.push_back(std::move(ab));
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  if (t_max > 0.0) {
    image_io::write_png(dir / "explored.png", plot::band_chart(explored_bands, t_max, 0.0, 1.0));
    image_io::write_png(dir / "accuracy.png", plot::band_chart(accuracy_bands, t_max, 0.8, 1.0));
  }
}

std::vector<SeedPair> read_seed_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read seed list " + path.string());
  }
  std::vector<SeedPair> seeds;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    line = line.substr(0, line.find('#'));
    std::istringstream fields(line);
    std::string first;
    std::string second;
    std::string extra;
    if (!(fields >> first)) {
      continue;
    }
    fields >> second >> extra;
    try {
      std::size_t used = 0;
      SeedPair s;
      s.world = std::stoull(first, &used);
      if (used != first.size() || !extra.empty()) {
        throw std::invalid_argument("");
      }
      s.sim = s.world;
      if (!second.empty()) {
        s.sim = std::stoull(second, &used);
        if (used != second.size()) {
          throw std::invalid_argument("");
        }
      }
      seeds.push_back(s);
    } catch (const std::exception&) {
      throw std::invalid_argument(fmt::format("{}:{}: expected 'world [sim]' seeds", path.string(), line_no));
    }
  }
  if (seeds.empty()) {
    throw std::invalid_argument("seed list " + path.string() + " is empty");
  }
  return seeds;
}

}  // namespace explore::harness
