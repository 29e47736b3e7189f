#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "explore/auction.hpp"

using namespace explore;
using namespace explore::auction;

namespace {

// Eq. 2 evaluated directly from coordinates.
double direct_score(Vec2 start, const std::vector<Vec2>& stops, const std::vector<double>& c, double lambda, double speed) {
  double s = 0.0;
  double t = 0.0;
  for (std::size_t k = 0; k < stops.size(); ++k) {
    const Vec2 from = k == 0 ? start : stops[k - 1];
    t += std::hypot(stops[k].x - from.x, stops[k].y - from.y) / speed;
    s += std::pow(lambda, t) * c[k];
  }
  return s;
}

double oracle_score(Vec2 start, const std::vector<int>& path, const std::vector<AuctionTask>& tasks) {
  std::vector<Vec2> stops;
  std::vector<double> c;
  for (int j : path) {
    stops.push_back(tasks[static_cast<std::size_t>(j)].location);
    c.push_back(tasks[static_cast<std::size_t>(j)].reward);
  }
  return direct_score(start, stops, c, 0.95, 2.0);
}

struct OraclePlan {
  std::vector<std::vector<int>> bundles;
  std::vector<std::vector<int>> paths;
};

// Sequential greedy allocation: every step tries every (agent, task, insertion slot), bids the
// gain capped at the agent's previous bid, and commits the single best bid overall (ties to the
// lower agent, then the larger raw gain, then the lower task). Centralized, so it is the
// assignment a consensus auction should settle on.
OraclePlan sequential_greedy(const std::vector<Agent>& agents, const std::vector<AuctionTask>& tasks, int bundle_size) {
  OraclePlan plan;
  plan.bundles.resize(agents.size());
  plan.paths.resize(agents.size());
  std::vector<double> last_bid(agents.size(), std::numeric_limits<double>::infinity());
  std::vector<bool> taken(tasks.size(), false);
  for (;;) {
    int best_agent = -1;
    int best_task = -1;
    double best_bid = 0.0;
    double best_gain = 0.0;
    std::vector<int> best_path;
    for (std::size_t a = 0; a < agents.size(); ++a) {
      if (static_cast<int>(plan.bundles[a].size()) >= bundle_size) {
        continue;
      }
      // This agent's own greedy pick: the largest raw gain among free tasks.
      const double base = oracle_score(agents[a].position, plan.paths[a], tasks);
      int pick = -1;
      double pick_gain = 0.0;
      std::vector<int> pick_path;
      for (std::size_t j = 0; j < tasks.size(); ++j) {
        if (taken[j]) {
          continue;
        }
        for (std::size_t k = 0; k <= plan.paths[a].size(); ++k) {
          auto p = plan.paths[a];
          p.insert(p.begin() + static_cast<std::ptrdiff_t>(k), static_cast<int>(j));
          const double g = oracle_score(agents[a].position, p, tasks) - base;
          if (g > 0.0 && (pick < 0 || g > pick_gain)) {
            pick = static_cast<int>(j);
            pick_gain = g;
            pick_path = p;
          }
        }
      }
      if (pick < 0) {
        continue;
      }
      const double bid = std::min(pick_gain, last_bid[a]);
      if (best_agent < 0 || bid > best_bid) {
        best_agent = static_cast<int>(a);
        best_task = pick;
        best_bid = bid;
        best_gain = pick_gain;
        best_path = pick_path;
      }
    }
    if (best_agent < 0) {
      break;
    }
    const auto a = static_cast<std::size_t>(best_agent);
    taken[static_cast<std::size_t>(best_task)] = true;
    plan.bundles[a].push_back(best_task);
    plan.paths[a] = best_path;
    last_bid[a] = best_bid;
  }
  return plan;
}

std::vector<AuctionTask> random_tasks(std::mt19937_64& rng, int count, bool constant) {
  std::uniform_real_distribution<double> pos(0.0, 100.0);
  std::uniform_real_distribution<double> r(0.1, 10.0);
  std::vector<AuctionTask> tasks;
  for (int j = 0; j < count; ++j) {
    tasks.push_back({j, {pos(rng), pos(rng)}, constant ? 1.0 : r(rng), false});
  }
  return tasks;
}

std::vector<Agent> random_agents(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> pos(0.0, 100.0);
  std::vector<Agent> agents;
  for (int a = 0; a < count; ++a) {
    agents.push_back({a, {pos(rng), pos(rng)}});
  }
  return agents;
}

}  // namespace

TEST_CASE("discounted path score") {
  const std::vector<AuctionTask> tasks{{0, {20.0, 0.0}, 1.0, false}, {1, {20.0, 30.0}, 3.0, false}};
  const std::vector<int> none;
  CHECK(path_score(none, tasks, {}, 0.95, 2.0) == 0.0);
  const std::vector<int> one{0};
  CHECK(std::abs(path_score(one, tasks, {}, 0.95, 2.0) - 0.598737) < 1e-6);
  CHECK(std::abs(path_score(one, tasks, {}, 0.95, 2.0) - std::pow(0.95, 10.0)) < 1e-9);

  const std::vector<int> ab{0, 1};
  const std::vector<int> ba{1, 0};
  const double s_ab = path_score(ab, tasks, {}, 0.95, 2.0);
  const double s_ba = path_score(ba, tasks, {}, 0.95, 2.0);
  CHECK(s_ab == doctest::Approx(direct_score({}, {{20, 0}, {20, 30}}, {1.0, 3.0}, 0.95, 2.0)).epsilon(1e-12));
  CHECK(s_ba == doctest::Approx(direct_score({}, {{20, 30}, {20, 0}}, {3.0, 1.0}, 0.95, 2.0)).epsilon(1e-12));
  CHECK(s_ab != doctest::Approx(s_ba));
}

TEST_CASE("bundle building basics") {
  const AuctionParams params;
  const Agent agent{0, {0.0, 0.0}};
  BundleState empty(0, 1, 0);
  build_bundle(empty, agent, std::vector<AuctionTask>{}, params);
  CHECK(empty.bundle.empty());

  const std::vector<AuctionTask> one{{7, {20.0, 0.0}, 1.0, false}};
  BundleState s(0, 1, 1);
  build_bundle(s, agent, one, params);
  REQUIRE(s.bundle == std::vector<int>{0});
  CHECK(s.winners[0] == 0);
  CHECK(s.winning_bids[0] == doctest::Approx(std::pow(0.95, 10.0)));

  // Zero-reward tasks are never bid on; tombstoned tasks neither.
  std::vector<AuctionTask> dull{{0, {1.0, 0.0}, 0.0, false}, {1, {2.0, 0.0}, 5.0, true}};
  BundleState d(0, 1, 2);
  d.tombstones[1] = 1;
  build_bundle(d, agent, dull, params);
  CHECK(d.bundle.empty());
}

TEST_CASE("single agent bundle equals exhaustive greedy insertion") {
  std::mt19937_64 rng(8);
  const AuctionParams params;
  for (int trial = 0; trial < 50; ++trial) {
    const auto tasks = random_tasks(rng, 5, false);
    const auto agents = random_agents(rng, 1);
    BundleState s(0, 1, 5);
    build_bundle(s, agents[0], tasks, params);
    const auto oracle = sequential_greedy(agents, tasks, 3);
    CHECK(s.bundle == oracle.bundles[0]);
    CHECK(s.path == oracle.paths[0]);
    // Diminishing bids along the bundle.
    for (std::size_t k = 1; k < s.bundle_bids.size(); ++k) {
      CHECK(s.bundle_bids[k] <= s.bundle_bids[k - 1]);
    }
  }
}

TEST_CASE("two agents contest one task") {
  BundleState a(0, 2, 1);
  BundleState b(1, 2, 1);
  a.bundle = a.path = {0};
  a.bundle_bids = {0.9};
  a.winners[0] = 0;
  a.winning_bids[0] = 0.9;
  b.bundle = b.path = {0};
  b.bundle_bids = {0.7};
  b.winners[0] = 1;
  b.winning_bids[0] = 0.7;

  const auto ma = message_of(a);
  const auto mb = message_of(b);
  const auto ra = consensus_step(a, std::vector<AuctionMessage>{mb}, 1.0);
  const auto rb = consensus_step(b, std::vector<AuctionMessage>{ma}, 1.0);
  CHECK_FALSE(ra.outgoing.has_value());
  CHECK(ra.released.empty());
  REQUIRE(rb.outgoing.has_value());
  CHECK(rb.released == std::vector<int>{0});
  CHECK(b.bundle.empty());
  CHECK(a.winners[0] == 0);
  CHECK(b.winners[0] == 0);
  CHECK(b.winning_bids[0] == 0.9);

  // A second exchange changes nothing.
  const auto again = consensus_step(a, std::vector<AuctionMessage>{*rb.outgoing}, 2.0);
  CHECK_FALSE(again.outgoing.has_value());
}

TEST_CASE("equal bids go to the lower agent id") {
  BundleState one(1, 3, 1);
  BundleState two(2, 3, 1);
  for (BundleState* s : {&one, &two}) {
    s->bundle = s->path = {0};
    s->bundle_bids = {0.8};
    s->winners[0] = s->agent;
    s->winning_bids[0] = 0.8;
  }
  const auto m1 = message_of(one);
  const auto m2 = message_of(two);
  (void)consensus_step(one, std::vector<AuctionMessage>{m2}, 1.0);
  (void)consensus_step(two, std::vector<AuctionMessage>{m1}, 1.0);
  CHECK(one.winners[0] == 1);
  CHECK(two.winners[0] == 1);
  CHECK(one.bundle == std::vector<int>{0});
  CHECK(two.bundle.empty());
}

TEST_CASE("losing a bundle task releases the tasks added after it") {
  BundleState me(0, 2, 3);
  me.bundle = {2, 0, 1};
  me.path = {0, 2, 1};
  me.bundle_bids = {0.9, 0.5, 0.4};
  me.winners = {0, 0, 0};
  me.winning_bids = {0.5, 0.4, 0.9};
  AuctionMessage rival{1, {1, kNoWinner, kNoWinner}, {0.6, 0.0, 0.0}, {0.0, 0.0}, {0, 0, 0}};
  rival.winners[0] = 1;
  const auto r = consensus_step(me, std::vector<AuctionMessage>{rival}, 1.0);
  CHECK(me.bundle == std::vector<int>{2});
  CHECK(me.path == std::vector<int>{2});
  CHECK(r.released == std::vector<int>{0, 1});
  CHECK(me.winners == std::vector<int>{1, kNoWinner, 0});
  CHECK(r.outgoing.has_value());
}

TEST_CASE("malformed messages are dropped") {
  BundleState me(0, 2, 2);
  AuctionMessage bad{1, {0}, {0.1}, {0.0, 0.0}, {0}};
  AuctionMessage self = message_of(me);
  AuctionMessage nan{1, {1, 1}, {std::nan(""), 0.2}, {0.0, 0.0}, {0, 0}};
  const auto r = consensus_step(me, std::vector<AuctionMessage>{bad, self, nan}, 1.0);
  CHECK(r.dropped == 3);
  CHECK_FALSE(r.outgoing.has_value());
}

TEST_CASE("tombstones purge a task from every table") {
  std::mt19937_64 rng(2);
  auto tasks = random_tasks(rng, 6, true);
  const auto agents = random_agents(rng, 3);
  tasks[2].tombstone = true;
  const auto a = run_auction(agents, tasks, AuctionParams{});
  CHECK(a.converged);
  CHECK(a.winners[2] == kNoWinner);
  for (const auto& b : a.bundles) {
    CHECK(std::ranges::find(b, 2) == b.end());
  }

  BundleState me(0, 2, 1);
  me.bundle = me.path = {0};
  me.bundle_bids = {1.0};
  me.winners[0] = 0;
  me.winning_bids[0] = 1.0;
  const AuctionMessage tomb{1, {kNoWinner}, {0.0}, {0.0, 0.0}, {1}};
  const auto r = consensus_step(me, std::vector<AuctionMessage>{tomb}, 1.0);
  CHECK(me.bundle.empty());
  CHECK(me.tombstones[0] == 1);
  CHECK(r.released == std::vector<int>{0});
}

TEST_CASE("one robot converges after its first build") {
  std::mt19937_64 rng(4);
  const auto tasks = random_tasks(rng, 8, false);
  const auto agents = random_agents(rng, 1);
  const auto a = run_auction(agents, tasks, AuctionParams{});
  CHECK(a.converged);
  CHECK(a.rounds == 2);  // one round that builds, one that confirms nothing changes
  CHECK(a.bundles[0].size() == 3);
}

TEST_CASE("three robots, nine constant tasks: all assigned, greedy-consistent") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const auto tasks = random_tasks(rng, 9, true);
    const auto agents = random_agents(rng, 3);
    const auto a = run_auction(agents, tasks, AuctionParams{});
    REQUIRE(a.converged);
    CHECK(conflict_free(a, 3));
    CHECK(std::ranges::count(a.winners, kNoWinner) == 0);
    const auto oracle = sequential_greedy(agents, tasks, 3);
    CHECK(a.bundles == oracle.bundles);
    CHECK(a.paths == oracle.paths);
  }
}

TEST_CASE("random instances: quiescent, conflict free, scale invariant") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> count(0, 20);
  const AuctionParams params;
  for (int trial = 0; trial < 200; ++trial) {
    auto tasks = random_tasks(rng, count(rng), false);
    const auto agents = random_agents(rng, 3);
    const auto a = run_auction(agents, tasks, params);
    REQUIRE(a.converged);
    CHECK(a.rounds <= 2 * 3 * params.bundle_size);
    CHECK(conflict_free(a, params.bundle_size));

    for (auto& t : tasks) {
      t.reward *= 10.0;
    }
    const auto scaled = run_auction(agents, tasks, params);
    CHECK(scaled.winners == a.winners);
    CHECK(scaled.paths == a.paths);
  }
}

TEST_CASE("auction is deterministic and traces every agent round") {
  std::mt19937_64 rng(5);
  const auto tasks = random_tasks(rng, 12, false);
  const auto agents = random_agents(rng, 3);
  std::ostringstream t1;
  std::ostringstream t2;
  const auto a = run_auction(agents, tasks, AuctionParams{}, &t1);
  const auto b = run_auction(agents, tasks, AuctionParams{}, &t2);
  CHECK(a.winners == b.winners);
  CHECK(t1.str() == t2.str());
  std::istringstream in(t1.str());
  int lines = 0;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("before"));
    CHECK(j.contains("after"));
    ++lines;
  }
  CHECK(lines == 3 * a.rounds);
}
