// YAML loading and dumping of TrialConfig. Every section and key is optional; unknown keys are
// rejected so typos do not silently fall back to defaults.

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "explore/harness.hpp"

namespace explore::harness {

namespace {

class Section {
 public:
  Section(const YAML::Node& root, std::string name) : name_(std::move(name)) {
    if (root && root[name_]) {
      node_ = root[name_];
      if (!node_.IsMap() && !node_.IsNull()) {
        throw std::invalid_argument("config: '" + name_ + "' must be a mapping");
      }
    }
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.IsMap() || !node_[key]) {
      return;
    }
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception& e) {
      throw std::invalid_argument("config: bad value for " + name_ + "." + key + ": " + e.what());
    }
  }

  void range(const std::string& key, worldgen::Range& out) {
    std::vector<double> v{out.min, out.max};
    get(key, v);
    if (v.size() != 2) {
      throw std::invalid_argument("config: " + name_ + "." + key + " must be [min, max]");
    }
    out = {v[0], v[1]};
  }

  void int_range(const std::string& key, worldgen::IntRange& out) {
    std::vector<int> v{out.min, out.max};
    get(key, v);
    if (v.size() != 2) {
      throw std::invalid_argument("config: " + name_ + "." + key + " must be [min, max]");
    }
    out = {v[0], v[1]};
  }

  void finish() const {
    if (!node_.IsMap()) {
      return;
    }
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.contains(key)) {
        throw std::invalid_argument("config: unknown key " + name_ + "." + key);
      }
    }
  }

 private:
  std::string name_;
  YAML::Node node_;
  std::set<std::string> seen_;
};

const std::set<std::string> kSections{"trial", "world", "sim", "predictor", "belief", "tasks", "reward", "auction"};

}  // namespace

void apply_yaml(TrialConfig& c, const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (root.IsNull()) {
    return;
  }
  if (!root.IsMap()) {
    throw std::invalid_argument("config: top level must be a mapping");
  }
  for (const auto& kv : root) {
    if (!kSections.contains(kv.first.as<std::string>())) {
      throw std::invalid_argument("config: unknown section " + kv.first.as<std::string>());
    }
  }

  Section trial(root, "trial");
  trial.get("world_seed", c.world_seed);
  trial.get("sim_seed", c.sim_seed);
  trial.get("duration", c.duration);
  trial.get("thresholds", c.thresholds);
  trial.get("sustain_ticks", c.sustain_ticks);
  trial.get("snapshot_times", c.snapshot_times);
  trial.get("auction_trace", c.auction_trace);
  trial.finish();

  Section world(root, "world");
  auto& t = c.town;
  world.get("width_cells", t.width_cells);
  world.get("height_cells", t.height_cells);
  world.get("resolution", t.resolution);
  world.range("street_curvature", t.street_curvature);
  world.get("street_width", t.street_width);
  world.get("street_center_jitter", t.street_center_jitter);
  world.int_range("building_count", t.building_count);
  std::vector<std::string> types;
  for (auto b : t.building_types) {
    types.push_back(worldgen::to_string(b));
  }
  world.get("building_types", types);
  t.building_types.clear();
  for (const auto& name : types) {
    t.building_types.push_back(worldgen::building_type_from_string(name));
  }
  world.range("building_dims", t.building_dims);
  world.range("setback", t.setback);
  world.get("spacing_jitter", t.spacing_jitter);
  world.get("angle_jitter", t.angle_jitter);
  world.get("building_gap", t.building_gap);
  world.get("retry_budget", t.retry_budget);
  world.finish();

  Section sim(root, "sim");
  sim.get("n_robots", c.sim.n_robots);
  sim.get("sensor_radius", c.sim.sensor_radius);
  sim.get("dt", c.sim.dt);
  sim.get("robot_speed", c.sim.robot_speed);
  sim.get("lidar_rays", c.sim.lidar_rays);
  sim.get("prediction_period", c.sim.prediction_period);
  sim.get("inflation_cells", c.sim.inflation_cells);
  sim.finish();

  Section pred(root, "predictor");
  pred.get("spec", c.predictor);
  pred.get("min_fit_cells", c.prior.min_fit_cells);
  pred.get("min_fit_components", c.prior.min_fit_components);
  pred.get("hypothesis_temperature", c.prior.hypothesis_temperature);
  pred.get("heading_jitter", c.prior.heading_jitter);
  pred.get("offset_jitter", c.prior.offset_jitter);
  pred.get("street_tries", c.prior.street_tries);
  pred.get("completion_tries", c.prior.completion_tries);
  pred.get("hallucination_tries", c.prior.hallucination_tries);
  pred.get("min_oriented_extent", c.prior.min_oriented_extent);
  pred.finish();

  Section bel(root, "belief");
  bel.get("confidence", c.belief.confidence);
  bel.get("saturation", c.belief.saturation);
  bel.get("prior", c.belief.prior);
  bel.finish();

  Section tasks(root, "tasks");
  tasks.get("scatter_count", c.tasks.scatter_count);
  tasks.get("frontier_period", c.tasks.frontier_period);
  tasks.get("min_cluster", c.tasks.min_cluster);
  tasks.get("dedupe_radius", c.tasks.dedupe_radius);
  tasks.get("completion_radius", c.tasks.completion_radius);
  tasks.finish();

  Section reward(root, "reward");
  std::string policy = tasking::to_string(c.policy.kind);
  reward.get("policy", policy);
  c.policy.kind = tasking::parse_reward_kind(policy);
  reward.get("constant", c.policy.constant);
  reward.get("box_side", c.policy.box_side);
  reward.get("scale", c.policy.scale);
  reward.finish();

  Section auc(root, "auction");
  auc.get("bundle_size", c.auction.bundle_size);
  auc.get("discount", c.auction.discount);
  auc.get("clip_marginals", c.auction.clip_marginals);
  auc.get("round_budget", c.auction.round_budget);
  auc.finish();
}

TrialConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read config " + path.string());
  }
  std::stringstream text;
  text << in.rdbuf();
  TrialConfig c;
  apply_yaml(c, text.str());
  c.validate();
  return c;
}

std::string to_yaml(const TrialConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(15);
  out << YAML::BeginMap;
  out << YAML::Key << "trial" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "world_seed" << YAML::Value << c.world_seed;
  out << YAML::Key << "sim_seed" << YAML::Value << c.sim_seed;
  out << YAML::Key << "duration" << YAML::Value << c.duration;
  out << YAML::Key << "thresholds" << YAML::Value << YAML::Flow << c.thresholds;
  out << YAML::Key << "sustain_ticks" << YAML::Value << c.sustain_ticks;
  out << YAML::Key << "snapshot_times" << YAML::Value << YAML::Flow << c.snapshot_times;
  out << YAML::Key << "auction_trace" << YAML::Value << c.auction_trace;
  out << YAML::EndMap;

  const auto& t = c.town;
  const auto pair = [&](const char* key, double a, double b) {
    out << YAML::Key << key << YAML::Value << YAML::Flow << std::vector<double>{a, b};
  };
  out << YAML::Key << "world" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "width_cells" << YAML::Value << t.width_cells;
  out << YAML::Key << "height_cells" << YAML::Value << t.height_cells;
  out << YAML::Key << "resolution" << YAML::Value << t.resolution;
  pair("street_curvature", t.street_curvature.min, t.street_curvature.max);
  out << YAML::Key << "street_width" << YAML::Value << t.street_width;
  out << YAML::Key << "street_center_jitter" << YAML::Value << t.street_center_jitter;
  out << YAML::Key << "building_count" << YAML::Value << YAML::Flow << std::vector<int>{t.building_count.min, t.building_count.max};
  std::vector<std::string> types;
  for (auto b : t.building_types) {
    types.push_back(worldgen::to_string(b));
  }
  out << YAML::Key << "building_types" << YAML::Value << YAML::Flow << types;
  pair("building_dims", t.building_dims.min, t.building_dims.max);
  pair("setback", t.setback.min, t.setback.max);
  out << YAML::Key << "spacing_jitter" << YAML::Value << t.spacing_jitter;
  out << YAML::Key << "angle_jitter" << YAML::Value << t.angle_jitter;
  out << YAML::Key << "building_gap" << YAML::Value << t.building_gap;
  out << YAML::Key << "retry_budget" << YAML::Value << t.retry_budget;
  out << YAML::EndMap;

  out << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_robots" << YAML::Value << c.sim.n_robots;
  out << YAML::Key << "sensor_radius" << YAML::Value << c.sim.sensor_radius;
  out << YAML::Key << "dt" << YAML::Value << c.sim.dt;
  out << YAML::Key << "robot_speed" << YAML::Value << c.sim.robot_speed;
  out << YAML::Key << "lidar_rays" << YAML::Value << c.sim.lidar_rays;
  out << YAML::Key << "prediction_period" << YAML::Value << c.sim.prediction_period;
  out << YAML::Key << "inflation_cells" << YAML::Value << c.sim.inflation_cells;
  out << YAML::EndMap;

  out << YAML::Key << "predictor" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "spec" << YAML::Value << c.predictor;
  out << YAML::Key << "min_fit_cells" << YAML::Value << c.prior.min_fit_cells;
  out << YAML::Key << "min_fit_components" << YAML::Value << c.prior.min_fit_components;
  out << YAML::Key << "hypothesis_temperature" << YAML::Value << c.prior.hypothesis_temperature;
  out << YAML::Key << "heading_jitter" << YAML::Value << c.prior.heading_jitter;
  out << YAML::Key << "offset_jitter" << YAML::Value << c.prior.offset_jitter;
  out << YAML::Key << "street_tries" << YAML::Value << c.prior.street_tries;
  out << YAML::Key << "completion_tries" << YAML::Value << c.prior.completion_tries;
  out << YAML::Key << "hallucination_tries" << YAML::Value << c.prior.hallucination_tries;
  out << YAML::Key << "min_oriented_extent" << YAML::Value << c.prior.min_oriented_extent;
  out << YAML::EndMap;

  out << YAML::Key << "belief" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "confidence" << YAML::Value << c.belief.confidence;
  out << YAML::Key << "saturation" << YAML::Value << c.belief.saturation;
  out << YAML::Key << "prior" << YAML::Value << c.belief.prior;
  out << YAML::EndMap;

  out << YAML::Key << "tasks" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "scatter_count" << YAML::Value << c.tasks.scatter_count;
  out << YAML::Key << "frontier_period" << YAML::Value << c.tasks.frontier_period;
  out << YAML::Key << "min_cluster" << YAML::Value << c.tasks.min_cluster;
  out << YAML::Key << "dedupe_radius" << YAML::Value << c.tasks.dedupe_radius;
  out << YAML::Key << "completion_radius" << YAML::Value << c.tasks.completion_radius;
  out << YAML::EndMap;

  out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "policy" << YAML::Value << tasking::to_string(c.policy.kind);
  out << YAML::Key << "constant" << YAML::Value << c.policy.constant;
  out << YAML::Key << "box_side" << YAML::Value << c.policy.box_side;
  out << YAML::Key << "scale" << YAML::Value << c.policy.scale;
  out << YAML::EndMap;

  out << YAML::Key << "auction" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "bundle_size" << YAML::Value << c.auction.bundle_size;
  out << YAML::Key << "discount" << YAML::Value << c.auction.discount;
  out << YAML::Key << "clip_marginals" << YAML::Value << c.auction.clip_marginals;
  out << YAML::Key << "round_budget" << YAML::Value << c.auction.round_budget;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace explore::harness
