#ifndef EXPLORE_PREDICTOR_HPP
#define EXPLORE_PREDICTOR_HPP

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "explore/grid.hpp"
#include "explore/protocol.hpp"

namespace explore::predictor {

struct PredictionRequest {
  std::uint32_t id = 0;
  double sim_time = 0.0;
  grid::GridImage image;
  // Map geometry; not part of the wire format.
  double resolution = grid::OccupancyGrid::kDefaultResolution;
  Vec2 origin{};
};

[[nodiscard]] PredictionRequest make_request(const grid::OccupancyGrid& observed, std::uint32_t id, double sim_time);

/// Tri-state grid described by the request: masked cells Unknown, the rest classified by gray.
[[nodiscard]] grid::OccupancyGrid observation_of(const PredictionRequest& request);

struct PredictedMap {
  std::uint32_t request_id = 0;
  std::string predictor;
  grid::OccupancyGrid grid;  // no Unknown cells
  bool degraded = false;
  std::string degradation;
  /// Known cells the predictor changed and that were restored from the request.
  std::size_t repaired_cells = 0;
};

/// Restores every known cell of `observed` in `predicted` and resolves leftover Unknown cells
/// to Free. Returns the number of known cells that had to be restored.
std::size_t enforce_invariants(grid::OccupancyGrid& predicted, const grid::OccupancyGrid& observed);

/// Every masked cell Free, known cells verbatim.
[[nodiscard]] grid::OccupancyGrid fallback_completion(const grid::OccupancyGrid& observed);

class Predictor {
 public:
  virtual ~Predictor() = default;

  [[nodiscard]] virtual std::string name() const = 0;

  /// Always returns an invariant-valid map. Protocol failures of external predictors turn into
  /// the fallback completion with `degraded` set.
  PredictedMap predict(const PredictionRequest& request, std::uint64_t seed);

 protected:
  /// May leave Unknown cells or touch known cells; predict() repairs both.
  virtual grid::OccupancyGrid complete(
      const PredictionRequest& request, const grid::OccupancyGrid& observed, std::uint64_t seed) = 0;

  PredictedMap finish(const PredictionRequest& request, const grid::OccupancyGrid& observed, grid::OccupancyGrid completion);
  PredictedMap degrade(const PredictionRequest& request, const grid::OccupancyGrid& observed, const std::string& reason);
};

/// Test fixture: masked cells copied from the truth, each flipped with probability flip_rate.
class OraclePredictor : public Predictor {
 public:
  OraclePredictor(grid::OccupancyGrid truth, double flip_rate);
  [[nodiscard]] std::string name() const override { return "oracle"; }

 protected:
  grid::OccupancyGrid complete(const PredictionRequest& request, const grid::OccupancyGrid& observed, std::uint64_t seed) override;

 private:
  grid::OccupancyGrid truth_;
  double flip_rate_;
};

struct Endpoint {
  enum class Transport { Stdio, Tcp };
  Transport transport = Transport::Stdio;
  std::string command;  // stdio: run through /bin/sh -c
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  /// "stdio:<command>" or "tcp:<host>:<port>".
  static Endpoint parse(const std::string& text);
  [[nodiscard]] std::string to_string() const;
};

struct ExternalOptions {
  std::chrono::milliseconds timeout{30000};
  grid::DecodeThresholds thresholds{};
};

/// Client for an out-of-process predictor speaking the wire protocol. Connects lazily and
/// reconnects after a failure.
class ExternalPredictor : public Predictor {
 public:
  explicit ExternalPredictor(Endpoint endpoint, ExternalOptions options = {});
  ~ExternalPredictor() override;
  ExternalPredictor(const ExternalPredictor&) = delete;
  ExternalPredictor& operator=(const ExternalPredictor&) = delete;

  [[nodiscard]] std::string name() const override { return "external:" + endpoint_.to_string(); }

  /// Writes every request before reading any response; responses are matched by id, so the
  /// server may answer in any order. Seeds are not transmitted.
  std::vector<PredictedMap> predict_batch(std::span<const PredictionRequest> requests);

  [[nodiscard]] bool connected() const { return read_fd_ >= 0; }

 protected:
  grid::OccupancyGrid complete(const PredictionRequest& request, const grid::OccupancyGrid& observed, std::uint64_t seed) override;

 private:
  void connect();
  void disconnect();
  void submit(const PredictionRequest& request, wire::Deadline deadline);
  wire::Response await(std::uint32_t id, wire::Deadline deadline);
  wire::Response read_response(wire::Deadline deadline);
  void stash(wire::Response response);
  grid::OccupancyGrid to_grid(const wire::Response& response, const PredictionRequest& request) const;

  Endpoint endpoint_;
  ExternalOptions options_;
  int read_fd_ = -1;
  int write_fd_ = -1;
  pid_t child_ = -1;
  std::set<std::uint32_t> outstanding_;
  std::map<std::uint32_t, wire::Response> early_;
};

}  // namespace explore::predictor

#endif  // EXPLORE_PREDICTOR_HPP
