#include "explore/protocol.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <string>

namespace explore::wire {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  }
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  return static_cast<std::uint32_t>(in[at]) | (static_cast<std::uint32_t>(in[at + 1]) << 8) |
         (static_cast<std::uint32_t>(in[at + 2]) << 16) | (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

bool has_magic(std::span<const std::uint8_t> in, std::string_view magic) {
  return in.size() >= magic.size() && std::equal(magic.begin(), magic.end(), in.begin(), [](char m, std::uint8_t b) {
           return static_cast<std::uint8_t>(m) == b;
         });
}

void put_header(std::vector<std::uint8_t>& out, std::string_view magic, std::uint32_t id, int width, int height) {
  if (width < 0 || height < 0 || width > 0xFFFF || height > 0xFFFF) {
    throw ProtocolError("image dimensions " + std::to_string(width) + "x" + std::to_string(height) + " do not fit in u16");
  }
  out.insert(out.end(), magic.begin(), magic.end());
  put_u32(out, id);
  put_u16(out, static_cast<std::uint16_t>(width));
  put_u16(out, static_cast<std::uint16_t>(height));
}

constexpr std::size_t kHeaderSize = 12;

std::string sys_error(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

}  // namespace

std::vector<std::uint8_t> pack_mask(std::span<const std::uint8_t> mask) {
  std::vector<std::uint8_t> packed((mask.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0) {
      packed[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
  }
  return packed;
}

std::vector<std::uint8_t> unpack_mask(std::span<const std::uint8_t> packed, std::size_t count) {
  if (packed.size() * 8 < count) {
    throw ProtocolError("packed mask too short");
  }
  std::vector<std::uint8_t> mask(count);
  for (std::size_t i = 0; i < count; ++i) {
    mask[i] = (packed[i / 8] >> (7 - i % 8)) & 1u;
  }
  return mask;
}

std::vector<std::uint8_t> encode_request(const Request& request) {
  const grid::GridImage& img = request.image;
  const auto cells = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (img.pixels.size() != cells || img.mask.size() != cells) {
    throw ProtocolError("request image buffers do not match its dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + cells + (cells + 7) / 8);
  put_header(out, kRequestMagic, request.id, img.width, img.height);
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  const std::vector<std::uint8_t> packed = pack_mask(img.mask);
  out.insert(out.end(), packed.begin(), packed.end());
  return out;
}

Request decode_request(std::span<const std::uint8_t> payload) {
  if (payload.size() < kHeaderSize || !has_magic(payload, kRequestMagic)) {
    throw ProtocolError("not a request frame");
  }
  Request r;
  r.id = get_u32(payload, 4);
  r.image.width = get_u16(payload, 8);
  r.image.height = get_u16(payload, 10);
  const auto cells = static_cast<std::size_t>(r.image.width) * static_cast<std::size_t>(r.image.height);
  if (payload.size() != kHeaderSize + cells + (cells + 7) / 8) {
    throw ProtocolError("request length " + std::to_string(payload.size()) + " does not match " +
                        std::to_string(r.image.width) + "x" + std::to_string(r.image.height));
  }
  r.image.pixels.assign(payload.begin() + kHeaderSize, payload.begin() + static_cast<std::ptrdiff_t>(kHeaderSize + cells));
  r.image.mask = unpack_mask(payload.subspan(kHeaderSize + cells), cells);
  return r;
}

std::vector<std::uint8_t> encode_response(const Response& response) {
  const auto cells = static_cast<std::size_t>(response.width) * static_cast<std::size_t>(response.height);
  if (response.pixels.size() != cells) {
    throw ProtocolError("response buffer does not match its dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + cells);
  put_header(out, kResponseMagic, response.id, response.width, response.height);
  out.insert(out.end(), response.pixels.begin(), response.pixels.end());
  return out;
}

Response decode_response(std::span<const std::uint8_t> payload) {
  if (payload.size() < kHeaderSize || !has_magic(payload, kResponseMagic)) {
    throw ProtocolError("not a response frame");
  }
  Response r;
  r.id = get_u32(payload, 4);
  r.width = get_u16(payload, 8);
  r.height = get_u16(payload, 10);
  const auto cells = static_cast<std::size_t>(r.width) * static_cast<std::size_t>(r.height);
  if (payload.size() != kHeaderSize + cells) {
    throw ProtocolError("response length " + std::to_string(payload.size()) + " does not match " +
                        std::to_string(r.width) + "x" + std::to_string(r.height));
  }
  r.pixels.assign(payload.begin() + kHeaderSize, payload.end());
  return r;
}

std::vector<std::uint8_t> hello(std::uint16_t version) {
  std::vector<std::uint8_t> out(kHelloMagic.begin(), kHelloMagic.end());
  put_u16(out, version);
  return out;
}

std::uint16_t parse_hello(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kHelloSize || !has_magic(bytes, kHelloMagic)) {
    throw ProtocolError("bad handshake");
  }
  return get_u16(bytes, kHelloMagic.size());
}

FdStream::FdStream(int read_fd, int write_fd) : read_fd_{read_fd}, write_fd_{write_fd} {
  struct stat st{};
  write_is_socket_ = ::fstat(write_fd_, &st) == 0 && S_ISSOCK(st.st_mode);
}

bool FdStream::wait(int fd, short events, Deadline deadline, bool watch_input) {
  for (;;) {
    int timeout_ms = -1;
    if (deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now()).count();
      if (left <= 0) {
        throw TimeoutError("predictor did not respond before the deadline");
      }
      timeout_ms = static_cast<int>(std::min<long long>(left, 1 << 30));
    }
    pollfd p[2] = {{fd, events, 0}, {read_fd_, POLLIN, 0}};
    const int rc = ::poll(p, watch_input ? 2 : 1, timeout_ms);
    if (rc > 0) {
      return watch_input && (p[1].revents & (POLLIN | POLLHUP)) != 0 && (p[0].revents & events) == 0;
    }
    if (rc == 0) {
      throw TimeoutError("predictor did not respond before the deadline");
    }
    if (errno != EINTR) {
      throw ProtocolError(sys_error("poll"));
    }
  }
}

void FdStream::write_bytes(std::span<const std::uint8_t> bytes, Deadline deadline, const std::function<void()>& on_readable) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    if (wait(write_fd_, POLLOUT, deadline, static_cast<bool>(on_readable))) {
      on_readable();
      continue;
    }
    const ssize_t n = write_is_socket_ ? ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL)
                                       : ::write(write_fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) {
        continue;
      }
      throw ProtocolError(sys_error("write"));
    }
    done += static_cast<std::size_t>(n);
  }
}

void FdStream::read_bytes(std::span<std::uint8_t> out, Deadline deadline) {
  std::size_t done = 0;
  while (done < out.size()) {
    wait(read_fd_, POLLIN, deadline);
    const ssize_t n = ::read(read_fd_, out.data() + done, out.size() - done);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) {
        continue;
      }
      throw ProtocolError(sys_error("read"));
    }
    if (n == 0) {
      if (done == 0) {
        throw EndOfStream("stream closed");
      }
      throw ProtocolError("stream closed mid-message");
    }
    done += static_cast<std::size_t>(n);
  }
}

void FdStream::write_frame(std::span<const std::uint8_t> payload, Deadline deadline, const std::function<void()>& on_readable) {
  if (payload.size() > 0xFFFFFFFFu) {
    throw ProtocolError("payload too large");
  }
  std::vector<std::uint8_t> bytes;
  bytes.reserve(4 + payload.size());
  put_u32(bytes, static_cast<std::uint32_t>(payload.size()));
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  write_bytes(bytes, deadline, on_readable);
}

std::vector<std::uint8_t> FdStream::read_frame(Deadline deadline, std::size_t max_payload) {
  std::uint8_t prefix[4];
  read_bytes(prefix, deadline);
  const std::uint32_t length = get_u32(prefix, 0);
  if (length > max_payload) {
    throw ProtocolError("frame length " + std::to_string(length) + " exceeds the limit");
  }
  std::vector<std::uint8_t> payload(length);
  try {
    read_bytes(payload, deadline);
  } catch (const EndOfStream&) {
    throw ProtocolError("stream closed mid-frame");
  }
  return payload;
}

void serve(FdStream& stream, const RequestHandler& handler) {
  stream.write_bytes(hello());
  for (;;) {
    std::vector<std::uint8_t> payload;
    try {
      payload = stream.read_frame();
    } catch (const EndOfStream&) {
      return;
    }
    stream.write_frame(encode_response(handler(decode_request(payload))));
  }
}

}  // namespace explore::wire
