#ifndef EXPLORE_PROTOCOL_HPP
#define EXPLORE_PROTOCOL_HPP

// Predictor wire protocol, version 1. Every message after the handshake is a frame: u32
// little-endian payload length followed by the payload.
//
//   request  = "MPRQ" u32 id u16 width u16 height gray[w*h] packed_mask[ceil(w*h/8)]
//   response = "MPRS" u32 id u16 width u16 height gray[w*h]
//   hello    = "MPHELLO" u16 version       (sent unframed by the server on connect)
//
// Mask bits are row-major, most significant bit first within each byte; 1 = unknown.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "explore/grid.hpp"

namespace explore::wire {

inline constexpr std::string_view kRequestMagic = "MPRQ";
inline constexpr std::string_view kResponseMagic = "MPRS";
inline constexpr std::string_view kHelloMagic = "MPHELLO";
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::size_t kHelloSize = 9;
inline constexpr std::size_t kMaxPayload = std::size_t{64} << 20;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

/// Peer closed the stream at a frame boundary.
class EndOfStream : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

struct Request {
  std::uint32_t id = 0;
  grid::GridImage image;
};

struct Response {
  std::uint32_t id = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

[[nodiscard]] std::vector<std::uint8_t> pack_mask(std::span<const std::uint8_t> mask);
[[nodiscard]] std::vector<std::uint8_t> unpack_mask(std::span<const std::uint8_t> packed, std::size_t count);

[[nodiscard]] std::vector<std::uint8_t> encode_request(const Request& request);
[[nodiscard]] Request decode_request(std::span<const std::uint8_t> payload);
[[nodiscard]] std::vector<std::uint8_t> encode_response(const Response& response);
[[nodiscard]] Response decode_response(std::span<const std::uint8_t> payload);

[[nodiscard]] std::vector<std::uint8_t> hello(std::uint16_t version = kProtocolVersion);
/// Returns the announced version; throws on a bad magic.
std::uint16_t parse_hello(std::span<const std::uint8_t> bytes);

using Clock = std::chrono::steady_clock;
using Deadline = std::optional<Clock::time_point>;

/// Blocking frame I/O over a pair of file descriptors (the same fd twice for a socket). Reads
/// and writes honor an absolute deadline through poll(). Does not own the descriptors.
class FdStream {
 public:
  FdStream(int read_fd, int write_fd);

  /// While blocked on a full write buffer, calls `on_readable` whenever input is waiting, so
  /// a pipelining client can drain responses instead of deadlocking against the server.
  void write_bytes(std::span<const std::uint8_t> bytes, Deadline deadline = {}, const std::function<void()>& on_readable = {});
  void read_bytes(std::span<std::uint8_t> out, Deadline deadline = {});

  void write_frame(std::span<const std::uint8_t> payload, Deadline deadline = {}, const std::function<void()>& on_readable = {});
  /// Throws EndOfStream if the peer closes before the first length byte.
  [[nodiscard]] std::vector<std::uint8_t> read_frame(Deadline deadline = {}, std::size_t max_payload = kMaxPayload);

 private:
  /// Returns true when the read side became readable while waiting for `events` on `fd`.
  bool wait(int fd, short events, Deadline deadline, bool watch_input = false);

  int read_fd_;
  int write_fd_;
  bool write_is_socket_;
};

using RequestHandler = std::function<Response(const Request&)>;

/// Server side of one connection: sends the hello, then answers requests in order until the
/// peer closes the stream.
void serve(FdStream& stream, const RequestHandler& handler);

}  // namespace explore::wire

#endif  // EXPLORE_PROTOCOL_HPP
