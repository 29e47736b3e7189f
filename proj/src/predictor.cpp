#include "explore/predictor.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

namespace explore::predictor {

using grid::CellState;
using grid::OccupancyGrid;

PredictionRequest make_request(const OccupancyGrid& observed, std::uint32_t id, double sim_time) {
  return {id, sim_time, grid::encode(observed), observed.resolution(), observed.origin()};
}

OccupancyGrid observation_of(const PredictionRequest& request) {
  const grid::GridImage& img = request.image;
  OccupancyGrid g(img.width, img.height, request.resolution, request.origin);
  if (img.pixels.size() != g.size() || img.mask.size() != g.size()) {
    throw grid::DimensionMismatch("prediction request buffers do not match its dimensions");
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = img.mask[i] != 0 ? CellState::Unknown : grid::classify_pixel(img.pixels[i]);
  }
  return g;
}

std::size_t enforce_invariants(OccupancyGrid& predicted, const OccupancyGrid& observed) {
  grid::require_same_shape(predicted, observed, "prediction repair");
  std::size_t repaired = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (observed[i] != CellState::Unknown) {
      if (predicted[i] != observed[i]) {
        predicted[i] = observed[i];
        ++repaired;
      }
    } else if (predicted[i] == CellState::Unknown) {
      predicted[i] = CellState::Free;
    }
  }
  return repaired;
}

OccupancyGrid fallback_completion(const OccupancyGrid& observed) {
  OccupancyGrid out = observed;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] == CellState::Unknown) {
      out[i] = CellState::Free;
    }
  }
  return out;
}

PredictedMap Predictor::predict(const PredictionRequest& request, std::uint64_t seed) {
  const OccupancyGrid observed = observation_of(request);
  OccupancyGrid completion;
  try {
    completion = complete(request, observed, seed);
  } catch (const wire::ProtocolError& e) {
    return degrade(request, observed, e.what());
  }
  if (!completion.same_shape(observed)) {
    return degrade(request, observed, "prediction has the wrong dimensions");
  }
  return finish(request, observed, std::move(completion));
}

PredictedMap Predictor::finish(const PredictionRequest& request, const OccupancyGrid& observed, OccupancyGrid completion) {
  PredictedMap out{request.id, name(), std::move(completion), false, {}, 0};
  out.grid = OccupancyGrid(out.grid);
  out.repaired_cells = enforce_invariants(out.grid, observed);
  if (out.repaired_cells > 0) {
    spdlog::warn("{}: request {} modified {} known cells; restored", out.predictor, request.id, out.repaired_cells);
  }
  return out;
}

PredictedMap Predictor::degrade(const PredictionRequest& request, const OccupancyGrid& observed, const std::string& reason) {
  spdlog::warn("{}: request {} degraded to the fallback map: {}", name(), request.id, reason);
  return {request.id, name(), fallback_completion(observed), true, reason, 0};
}

OraclePredictor::OraclePredictor(OccupancyGrid truth, double flip_rate) : truth_{std::move(truth)}, flip_rate_{flip_rate} {
  if (!(flip_rate_ >= 0.0 && flip_rate_ <= 1.0)) {
    throw std::invalid_argument("oracle predictor: flip rate must lie in [0, 1]");
  }
}

OccupancyGrid OraclePredictor::complete(const PredictionRequest&, const OccupancyGrid& observed, std::uint64_t seed) {
  grid::require_same_shape(observed, truth_, "oracle prediction");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(flip_rate_);
  OccupancyGrid out = observed;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != CellState::Unknown) {
      continue;
    }
    const bool occupied = (truth_[i] == CellState::Occupied) != flip(rng);
    out[i] = occupied ? CellState::Occupied : CellState::Free;
  }
  return out;
}

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint e;
  if (text.rfind("stdio:", 0) == 0) {
    e.transport = Transport::Stdio;
    e.command = text.substr(6);
    if (e.command.empty()) {
      throw std::invalid_argument("stdio endpoint needs a command");
    }
    return e;
  }
  if (text.rfind("tcp:", 0) == 0) {
    e.transport = Transport::Tcp;
    const std::string rest = text.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon + 1 == rest.size()) {
      throw std::invalid_argument("tcp endpoint must be tcp:<host>:<port>");
    }
    e.host = rest.substr(0, colon);
    const int port = std::stoi(rest.substr(colon + 1));
    if (port <= 0 || port > 65535) {
      throw std::invalid_argument("tcp endpoint port out of range");
    }
    e.port = static_cast<std::uint16_t>(port);
    return e;
  }
  throw std::invalid_argument("unknown predictor endpoint '" + text + "'");
}

std::string Endpoint::to_string() const {
  return transport == Transport::Stdio ? "stdio:" + command : "tcp:" + host + ":" + std::to_string(port);
}

ExternalPredictor::ExternalPredictor(Endpoint endpoint, ExternalOptions options)
    : endpoint_{std::move(endpoint)}, options_{options} {
  // A predictor that dies mid-write must surface as EPIPE, not kill the simulator.
  ::signal(SIGPIPE, SIG_IGN);
}

ExternalPredictor::~ExternalPredictor() { disconnect(); }

namespace {

std::string sys_error(const std::string& what) { return what + ": " + std::strerror(errno); }

}  // namespace

void ExternalPredictor::connect() {
  if (connected()) {
    return;
  }
  if (endpoint_.transport == Endpoint::Transport::Stdio) {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) {
      throw wire::ProtocolError(sys_error("pipe"));
    }
    if (::pipe2(from_child, O_CLOEXEC) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw wire::ProtocolError(sys_error("pipe"));
    }
    const pid_t pid = ::fork();
    if (pid < 0) {
      for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) {
        ::close(fd);
      }
      throw wire::ProtocolError(sys_error("fork"));
    }
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", endpoint_.command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    child_ = pid;
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  } else {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const std::string port = std::to_string(endpoint_.port);
    if (const int rc = ::getaddrinfo(endpoint_.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
      throw wire::ProtocolError("cannot resolve " + endpoint_.host + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* a = found; a != nullptr && fd < 0; a = a->ai_next) {
      fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
      if (fd >= 0 && ::connect(fd, a->ai_addr, a->ai_addrlen) != 0) {
        ::close(fd);
        fd = -1;
      }
    }
    ::freeaddrinfo(found);
    if (fd < 0) {
      throw wire::ProtocolError(sys_error("cannot connect to " + endpoint_.to_string()));
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    read_fd_ = fd;
    write_fd_ = fd;
  }
  // Non-blocking so a large write can be interleaved with draining responses.
  for (int fd : {read_fd_, write_fd_}) {
    ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
  }

  try {
    std::uint8_t greeting[wire::kHelloSize];
    wire::FdStream stream(read_fd_, write_fd_);
    stream.read_bytes(greeting, wire::Clock::now() + options_.timeout);
    const std::uint16_t version = wire::parse_hello(greeting);
    if (version != wire::kProtocolVersion) {
      throw wire::ProtocolError("unsupported protocol version " + std::to_string(version));
    }
  } catch (...) {
    disconnect();
    throw;
  }
  spdlog::debug("connected to predictor {}", endpoint_.to_string());
}

void ExternalPredictor::disconnect() {
  if (write_fd_ >= 0 && write_fd_ != read_fd_) {
    ::close(write_fd_);
  }
  if (read_fd_ >= 0) {
    ::close(read_fd_);
  }
  read_fd_ = -1;
  write_fd_ = -1;
  outstanding_.clear();
  early_.clear();
  if (child_ > 0) {
    // The server exits on end of input; give it a moment before forcing it.
    int status = 0;
    pid_t done = 0;
    for (int i = 0; i < 50 && done == 0; ++i) {
      done = ::waitpid(child_, &status, WNOHANG);
      if (done == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
    if (done == 0) {
      ::kill(child_, SIGKILL);
      ::waitpid(child_, &status, 0);
    }
    child_ = -1;
  }
}

void ExternalPredictor::submit(const PredictionRequest& request, wire::Deadline deadline) {
  if (outstanding_.count(request.id) != 0) {
    throw std::invalid_argument("request id " + std::to_string(request.id) + " is already outstanding");
  }
  outstanding_.insert(request.id);
  wire::FdStream stream(read_fd_, write_fd_);
  stream.write_frame(wire::encode_request({request.id, request.image}), deadline, [&] { stash(read_response(deadline)); });
}

wire::Response ExternalPredictor::read_response(wire::Deadline deadline) {
  wire::FdStream stream(read_fd_, write_fd_);
  try {
    return wire::decode_response(stream.read_frame(deadline));
  } catch (const wire::EndOfStream&) {
    throw wire::ProtocolError("predictor closed the connection");
  }
}

void ExternalPredictor::stash(wire::Response response) {
  if (outstanding_.count(response.id) == 0 || early_.count(response.id) != 0) {
    throw wire::ProtocolError("response for unexpected request id " + std::to_string(response.id));
  }
  const std::uint32_t id = response.id;
  early_.emplace(id, std::move(response));
}

wire::Response ExternalPredictor::await(std::uint32_t id, wire::Deadline deadline) {
  if (auto it = early_.find(id); it != early_.end()) {
    wire::Response r = std::move(it->second);
    early_.erase(it);
    outstanding_.erase(id);
    return r;
  }
  for (;;) {
    wire::Response r = read_response(deadline);
    if (r.id == id) {
      outstanding_.erase(id);
      return r;
    }
    stash(std::move(r));
  }
}

OccupancyGrid ExternalPredictor::to_grid(const wire::Response& response, const PredictionRequest& request) const {
  if (response.width != request.image.width || response.height != request.image.height) {
    throw wire::ProtocolError(
        "dimension mismatch: sent " + std::to_string(request.image.width) + "x" + std::to_string(request.image.height) +
        ", received " + std::to_string(response.width) + "x" + std::to_string(response.height));
  }
  OccupancyGrid g(response.width, response.height, request.resolution, request.origin);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] = grid::classify_pixel(response.pixels[i], options_.thresholds);
  }
  return g;
}

OccupancyGrid ExternalPredictor::complete(const PredictionRequest& request, const OccupancyGrid&, std::uint64_t) {
  try {
    connect();
    const wire::Deadline deadline = wire::Clock::now() + options_.timeout;
    submit(request, deadline);
    return to_grid(await(request.id, deadline), request);
  } catch (const wire::ProtocolError&) {
    disconnect();
    throw;
  }
}

std::vector<PredictedMap> ExternalPredictor::predict_batch(std::span<const PredictionRequest> requests) {
  std::vector<PredictedMap> out;
  out.reserve(requests.size());
  std::string failure;
  try {
    connect();
    const wire::Deadline deadline = wire::Clock::now() + options_.timeout;
    for (const PredictionRequest& r : requests) {
      submit(r, deadline);
    }
    for (const PredictionRequest& r : requests) {
      const wire::Response response = await(r.id, deadline);
      const OccupancyGrid observed = observation_of(r);
      try {
        out.push_back(finish(r, observed, to_grid(response, r)));
      } catch (const wire::ProtocolError& e) {
        out.push_back(degrade(r, observed, e.what()));
      }
    }
  } catch (const wire::ProtocolError& e) {
    failure = e.what();
    disconnect();
  }
  for (std::size_t i = out.size(); i < requests.size(); ++i) {
    out.push_back(degrade(requests[i], observation_of(requests[i]), failure));
  }
  return out;
}

}  // namespace explore::predictor
