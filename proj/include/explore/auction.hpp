#ifndef EXPLORE_AUCTION_HPP
#define EXPLORE_AUCTION_HPP

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "explore/geometry.hpp"

namespace explore::auction {

struct AuctionParams {
  int bundle_size = 3;
  double discount = 0.95;  // lambda
  double speed = 2.0;      // m/s, converts straight-line distance to arrival time
  /// Caps each bid at the previous bid in the bundle so bids diminish along it.
  bool clip_marginals = true;
  int round_budget = 50;

  void validate() const;
};

/// A task as the auction sees it. Tasks are addressed by their position in the task list.
struct AuctionTask {
  int id = 0;  // caller's id, carried through untouched
  Vec2 location{};
  double reward = 0.0;
  bool tombstone = false;  // abandoned: never bid on, purged from every table
};

struct Agent {
  int id = 0;  // 0..n-1
  Vec2 position{};
};

constexpr int kNoWinner = -1;

/// sum_j lambda^tau_j c_j along `path` (task indices) starting at `start`; tau_j is the
/// cumulative straight-line travel time to the j-th task.
[[nodiscard]] double path_score(
    std::span<const int> path,
    std::span<const AuctionTask> tasks,
    const Vec2& start,
    double discount,
    double speed);

struct BundleState {
  int agent = 0;
  std::vector<int> bundle;  // insertion order
  std::vector<int> path;    // visit order
  std::vector<double> bundle_bids;  // bid placed for each bundle entry
  std::vector<int> winners;         // per task
  std::vector<double> winning_bids; // per task
  std::vector<double> timestamps;   // per agent, last time information from it arrived
  std::vector<std::uint8_t> tombstones;  // per task

  BundleState() = default;
  BundleState(int agent, int n_agents, int n_tasks);

  [[nodiscard]] bool same_tables(const BundleState& other) const {
    return winners == other.winners && winning_bids == other.winning_bids && tombstones == other.tombstones;
  }
};

struct AuctionMessage {
  int sender = 0;
  std::vector<int> winners;
  std::vector<double> winning_bids;
  std::vector<double> timestamps;
  std::vector<std::uint8_t> tombstones;
};

[[nodiscard]] AuctionMessage message_of(const BundleState& state);

/// Greedily adds tasks until the bundle is full or nothing can be won. Each candidate is
/// scored by its best insertion into the path; the largest marginal gain among tasks whose
/// bid would beat the believed winner is taken (ties to the lower task index).
void build_bundle(BundleState& state, const Agent& agent, std::span<const AuctionTask> tasks, const AuctionParams& params);

struct ConsensusResult {
  std::optional<AuctionMessage> outgoing;  // set iff the tables changed
  std::vector<int> released;               // bundle tasks given up
  int dropped = 0;                         // malformed messages ignored
};

/// Merges neighbour tables into `state` by the CBBA update / reset / leave rules, then drops
/// every bundle task from the first outbid one onward. `now` stamps the senders.
ConsensusResult consensus_step(BundleState& state, std::span<const AuctionMessage> incoming, double now);

struct Assignment {
  std::vector<std::vector<int>> paths;    // per agent, task indices in visit order
  std::vector<std::vector<int>> bundles;  // per agent, insertion order
  std::vector<int> winners;               // per task, agent or kNoWinner
  std::vector<double> winning_bids;
  std::vector<std::vector<int>> believed;  // per agent, its final winners table
  bool converged = false;
  int rounds = 0;
};

/// Synchronous rounds over a fully connected network: every agent builds, every agent whose
/// tables changed broadcasts, every agent merges what it received. Stops after a round without
/// any change, or at the round budget (converged = false).
[[nodiscard]] Assignment run_auction(
    std::span<const Agent> agents,
    std::span<const AuctionTask> tasks,
    const AuctionParams& params,
    std::ostream* trace = nullptr);

/// Each task has at most one winner, every agent agrees on it, and bundles hold only tasks
/// their agent wins.
[[nodiscard]] bool conflict_free(const Assignment& assignment, int bundle_size);

}  // namespace explore::auction

#endif  // EXPLORE_AUCTION_HPP
