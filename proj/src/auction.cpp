#include "explore/auction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace explore::auction {

void AuctionParams::validate() const {
  if (bundle_size < 1 || !(discount > 0.0 && discount < 1.0) || !(speed > 0.0) || round_budget < 1) {
    throw std::invalid_argument("auction params: need bundle_size >= 1, discount in (0,1), speed > 0, budget >= 1");
  }
}

double path_score(std::span<const int> path, std::span<const AuctionTask> tasks, const Vec2& start, double discount, double speed) {
  double score = 0.0;
  double travelled = 0.0;
  Vec2 at = start;
  for (int j : path) {
    const AuctionTask& t = tasks[static_cast<std::size_t>(j)];
    travelled += distance(at, t.location);
    at = t.location;
    score += std::pow(discount, travelled / speed) * t.reward;
  }
  return score;
}

BundleState::BundleState(int agent_id, int n_agents, int n_tasks)
    : agent(agent_id),
      winners(static_cast<std::size_t>(n_tasks), kNoWinner),
      winning_bids(static_cast<std::size_t>(n_tasks), 0.0),
      timestamps(static_cast<std::size_t>(n_agents), 0.0),
      tombstones(static_cast<std::size_t>(n_tasks), 0) {}

AuctionMessage message_of(const BundleState& state) {
  return {state.agent, state.winners, state.winning_bids, state.timestamps, state.tombstones};
}

namespace {

// Higher bid wins; equal bids go to the lower agent id; any bid beats no winner.
bool outbids(double bid, int bidder, double other_bid, int other) {
  if (bidder == kNoWinner) {
    return false;
  }
  if (other == kNoWinner) {
    return true;
  }
  return bid > other_bid || (bid == other_bid && bidder < other);
}

}  // namespace

void build_bundle(BundleState& state, const Agent& agent, std::span<const AuctionTask> tasks, const AuctionParams& params) {
  const std::size_t n = tasks.size();
  std::vector<int> trial;
  while (static_cast<int>(state.bundle.size()) < params.bundle_size) {
    const double base = path_score(state.path, tasks, agent.position, params.discount, params.speed);
    const double cap = state.bundle_bids.empty() ? std::numeric_limits<double>::infinity() : state.bundle_bids.back();
    int best = -1;
    double best_gain = 0.0;
    double best_bid = 0.0;
    std::size_t best_pos = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (state.tombstones[j] != 0 || std::ranges::find(state.bundle, static_cast<int>(j)) != state.bundle.end()) {
        continue;
      }
      double gain = -std::numeric_limits<double>::infinity();
      std::size_t pos = 0;
      for (std::size_t k = 0; k <= state.path.size(); ++k) {
        trial = state.path;
        trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(k), static_cast<int>(j));
        const double g = path_score(trial, tasks, agent.position, params.discount, params.speed) - base;
        if (g > gain) {
          gain = g;
          pos = k;
        }
      }
      const double bid = params.clip_marginals ? std::min(gain, cap) : gain;
      if (!(bid > 0.0) || !outbids(bid, state.agent, state.winning_bids[j], state.winners[j])) {
        continue;
      }
      if (best < 0 || gain > best_gain) {
        best = static_cast<int>(j);
        best_gain = gain;
        best_bid = bid;
        best_pos = pos;
      }
    }
    if (best < 0) {
      break;
    }
    state.bundle.push_back(best);
    state.bundle_bids.push_back(best_bid);
    state.path.insert(state.path.begin() + static_cast<std::ptrdiff_t>(best_pos), best);
    state.winners[static_cast<std::size_t>(best)] = state.agent;
    state.winning_bids[static_cast<std::size_t>(best)] = best_bid;
  }
}

namespace {

enum class Action { Leave, Update, Reset };

// CBBA receiver-side decision for one task. i: receiver, k: sender.
Action decide(int i, int k, int zk, double yk, int zi, double yi, const std::vector<double>& sk, const std::vector<double>& si) {
  const auto fresher = [&](int m) { return sk[static_cast<std::size_t>(m)] > si[static_cast<std::size_t>(m)]; };
  const bool sender_better = outbids(yk, zk, yi, zi);
  if (zk == k) {
    if (zi == i) return sender_better ? Action::Update : Action::Leave;
    if (zi == k) return Action::Update;
    if (zi == kNoWinner) return Action::Update;
    return (fresher(zi) || sender_better) ? Action::Update : Action::Leave;
  }
  if (zk == i) {
    if (zi == i || zi == kNoWinner) return Action::Leave;
    if (zi == k) return Action::Reset;
    return fresher(zi) ? Action::Reset : Action::Leave;
  }
  if (zk != kNoWinner) {  // a third agent m
    const int m = zk;
    if (zi == i) return (fresher(m) && sender_better) ? Action::Update : Action::Leave;
    if (zi == k) return fresher(m) ? Action::Update : Action::Reset;
    if (zi == m) return fresher(m) ? Action::Update : Action::Leave;
    if (zi == kNoWinner) return fresher(m) ? Action::Update : Action::Leave;
    const int other = zi;
    if (fresher(m) && fresher(other)) return Action::Update;
    if (fresher(m) && sender_better) return Action::Update;
    if (fresher(other) && si[static_cast<std::size_t>(m)] > sk[static_cast<std::size_t>(m)]) return Action::Reset;
    return Action::Leave;
  }
  // Sender knows of no winner.
  if (zi == i || zi == kNoWinner) return Action::Leave;
  if (zi == k) return Action::Update;
  return fresher(zi) ? Action::Update : Action::Leave;
}

bool well_formed(const AuctionMessage& msg, const BundleState& state) {
  const auto n_agents = static_cast<int>(state.timestamps.size());
  if (msg.sender < 0 || msg.sender >= n_agents || msg.sender == state.agent) {
    return false;
  }
  if (msg.winners.size() != state.winners.size() || msg.winning_bids.size() != state.winners.size() ||
      msg.tombstones.size() != state.winners.size() || msg.timestamps.size() != state.timestamps.size()) {
    return false;
  }
  for (std::size_t j = 0; j < msg.winners.size(); ++j) {
    if (msg.winners[j] < kNoWinner || msg.winners[j] >= n_agents || !(msg.winning_bids[j] >= 0.0) ||
        !std::isfinite(msg.winning_bids[j])) {
      return false;
    }
  }
  return true;
}

}  // namespace

ConsensusResult consensus_step(BundleState& state, std::span<const AuctionMessage> incoming, double now) {
  ConsensusResult result;
  const BundleState before = state;
  const int i = state.agent;
  for (const AuctionMessage& msg : incoming) {
    if (!well_formed(msg, state)) {
      spdlog::warn("auction: agent {} dropped a malformed message from {}", i, msg.sender);
      ++result.dropped;
      continue;
    }
    const int k = msg.sender;
    for (std::size_t j = 0; j < state.winners.size(); ++j) {
      if (msg.tombstones[j] != 0 || state.tombstones[j] != 0) {
        state.tombstones[j] = 1;
        state.winners[j] = kNoWinner;
        state.winning_bids[j] = 0.0;
        continue;
      }
      switch (decide(i, k, msg.winners[j], msg.winning_bids[j], state.winners[j], state.winning_bids[j], msg.timestamps, state.timestamps)) {
        case Action::Update:
          state.winners[j] = msg.winners[j];
          state.winning_bids[j] = msg.winning_bids[j];
          break;
        case Action::Reset:
          state.winners[j] = kNoWinner;
          state.winning_bids[j] = 0.0;
          break;
        case Action::Leave:
          break;
      }
    }
    for (std::size_t m = 0; m < state.timestamps.size(); ++m) {
      if (static_cast<int>(m) == k) {
        state.timestamps[m] = now;
      } else if (static_cast<int>(m) != i) {
        state.timestamps[m] = std::max(state.timestamps[m], msg.timestamps[m]);
      }
    }
  }

  // Outbid on one bundle task: it and everything added after it go.
  std::size_t cut = state.bundle.size();
  for (std::size_t n = 0; n < state.bundle.size(); ++n) {
    if (state.winners[static_cast<std::size_t>(state.bundle[n])] != i) {
      cut = n;
      break;
    }
  }
  for (std::size_t n = cut; n < state.bundle.size(); ++n) {
    const int j = state.bundle[n];
    if (n > cut && state.winners[static_cast<std::size_t>(j)] == i) {
      state.winners[static_cast<std::size_t>(j)] = kNoWinner;
      state.winning_bids[static_cast<std::size_t>(j)] = 0.0;
    }
    std::erase(state.path, j);
    result.released.push_back(j);
  }
  state.bundle.resize(cut);
  state.bundle_bids.resize(cut);

  if (!state.same_tables(before)) {
    result.outgoing = message_of(state);
  }
  return result;
}

namespace {

nlohmann::json tables_json(const BundleState& s) {
  return {{"winners", s.winners}, {"bids", s.winning_bids}, {"bundle", s.bundle}, {"path", s.path}};
}

}  // namespace

Assignment run_auction(std::span<const Agent> agents, std::span<const AuctionTask> tasks, const AuctionParams& params, std::ostream* trace) {
  params.validate();
  const int n = static_cast<int>(agents.size());
  const int m = static_cast<int>(tasks.size());
  for (int a = 0; a < n; ++a) {
    if (agents[static_cast<std::size_t>(a)].id != a) {
      throw std::invalid_argument("run_auction: agent ids must be 0..n-1 in order");
    }
  }
  std::vector<BundleState> states;
  std::vector<BundleState> last_sent;
  for (int a = 0; a < n; ++a) {
    states.emplace_back(a, n, m);
    for (int j = 0; j < m; ++j) {
      states.back().tombstones[static_cast<std::size_t>(j)] = tasks[static_cast<std::size_t>(j)].tombstone ? 1 : 0;
    }
  }
  last_sent = states;

  Assignment out;
  for (int round = 1; round <= params.round_budget; ++round) {
    const std::vector<BundleState> before = states;
    for (int a = 0; a < n; ++a) {
      build_bundle(states[static_cast<std::size_t>(a)], agents[static_cast<std::size_t>(a)], tasks, params);
    }
    std::vector<AuctionMessage> messages;
    for (int a = 0; a < n; ++a) {
      auto& s = states[static_cast<std::size_t>(a)];
      if (!s.same_tables(last_sent[static_cast<std::size_t>(a)])) {
        messages.push_back(message_of(s));
        last_sent[static_cast<std::size_t>(a)] = s;
      }
    }
    for (int a = 0; a < n; ++a) {
      std::vector<AuctionMessage> inbox;
      for (const auto& msg : messages) {
        if (msg.sender != a) {
          inbox.push_back(msg);
        }
      }
      (void)consensus_step(states[static_cast<std::size_t>(a)], inbox, static_cast<double>(round));
    }
    bool changed = false;
    for (int a = 0; a < n; ++a) {
      const auto& s = states[static_cast<std::size_t>(a)];
      const auto& b = before[static_cast<std::size_t>(a)];
      changed = changed || !s.same_tables(b) || s.bundle != b.bundle;
      if (trace != nullptr) {
        *trace << nlohmann::json{{"round", round}, {"agent", a}, {"before", tables_json(b)}, {"after", tables_json(s)}}.dump()
               << '\n';
      }
    }
    out.rounds = round;
    if (!changed) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    spdlog::warn("auction: no convergence within {} rounds ({} agents, {} tasks)", params.round_budget, n, m);
  }

  out.winners.assign(static_cast<std::size_t>(m), kNoWinner);
  out.winning_bids.assign(static_cast<std::size_t>(m), 0.0);
  for (const auto& s : states) {
    out.paths.push_back(s.path);
    out.bundles.push_back(s.bundle);
    for (std::size_t n_ = 0; n_ < s.bundle.size(); ++n_) {
      const auto j = static_cast<std::size_t>(s.bundle[n_]);
      out.winners[j] = s.agent;
      out.winning_bids[j] = s.winning_bids[j];
    }
  }
  out.believed.reserve(states.size());
  for (const auto& s : states) {
    out.believed.push_back(s.winners);
  }
  return out;
}

bool conflict_free(const Assignment& a, int bundle_size) {
  std::vector<int> owners(a.winners.size(), 0);
  for (std::size_t agent = 0; agent < a.bundles.size(); ++agent) {
    if (static_cast<int>(a.bundles[agent].size()) > bundle_size) {
      return false;
    }
    for (int j : a.bundles[agent]) {
      ++owners[static_cast<std::size_t>(j)];
    }
  }
  if (std::ranges::any_of(owners, [](int c) { return c > 1; })) {
    return false;
  }
  // Every agent's table must name the same winner, and that winner must hold the task.
  for (const auto& table : a.believed) {
    if (table != a.winners) {
      return false;
    }
  }
  return true;
}

}  // namespace explore::auction
