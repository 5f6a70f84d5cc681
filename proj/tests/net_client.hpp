#pragma once

// Minimal blocking clients for the bridge: newline-delimited JSON over TCP
// and a masked-frame WebSocket client.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace oracle {

class TcpClient {
 public:
  explicit TcpClient(int port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
      ::close(fd_);
      throw std::runtime_error("connect failed");
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~TcpClient() {
    if (fd_ >= 0) ::close(fd_);
  }
  TcpClient(const TcpClient&) = delete;
  TcpClient& operator=(const TcpClient&) = delete;
  TcpClient(TcpClient&& o) noexcept : fd_(o.fd_), buf_(std::move(o.buf_)) { o.fd_ = -1; }

  void send_raw(const std::string& bytes) {
    std::size_t off = 0;
    while (off < bytes.size()) {
      const auto n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw std::runtime_error("send failed");
      off += static_cast<std::size_t>(n);
    }
  }

  /// Reads at least `n` buffered bytes; false on timeout or EOF.
  bool fill(std::size_t n, int timeout_ms) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    while (buf_.size() < n) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return false;
      pollfd p{fd_, POLLIN, 0};
      if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) return false;
      char tmp[4096];
      const auto r = ::recv(fd_, tmp, sizeof tmp, 0);
      if (r <= 0) return false;
      buf_.append(tmp, static_cast<std::size_t>(r));
    }
    return true;
  }

  std::optional<std::string> read_line(int timeout_ms = 2000) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
      if (const auto nl = buf_.find('\n'); nl != std::string::npos) {
        std::string line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0 || !fill(buf_.size() + 1, static_cast<int>(left.count()))) return std::nullopt;
    }
  }

  std::string take(std::size_t n) {
    std::string out = buf_.substr(0, n);
    buf_.erase(0, n);
    return out;
  }
  std::string& buffer() { return buf_; }
  int fd() const { return fd_; }

  /// True when the peer closed the connection within the timeout.
  bool closed_by_peer(int timeout_ms) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, timeout_ms) <= 0) return false;
    char tmp[256];
    const auto r = ::recv(fd_, tmp, sizeof tmp, MSG_PEEK);
    return r == 0;
  }

 private:
  int fd_{-1};
  std::string buf_;
};

class WsClient {
 public:
  explicit WsClient(int port, const std::string& path = "/") : tcp_(port) {
    tcp_.send_raw("GET " + path +
                  " HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                  "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
    std::string head;
    while (head.find("\r\n\r\n") == std::string::npos) {
      if (!tcp_.fill(tcp_.buffer().size() + 1, 2000)) throw std::runtime_error("no handshake reply");
      head = tcp_.buffer();
    }
    const auto end = head.find("\r\n\r\n") + 4;
    response_ = tcp_.take(end);
  }

  const std::string& handshake() const { return response_; }

  void send_frame(const std::string& payload, std::uint8_t opcode = 0x1, bool fin = true) {
    std::string f;
    f.push_back(static_cast<char>((fin ? 0x80 : 0x00) | opcode));
    const std::uint8_t mask[4] = {0x12, 0x34, 0x56, 0x78};
    if (payload.size() < 126) {
      f.push_back(static_cast<char>(0x80 | payload.size()));
    } else if (payload.size() < 65536) {
      f.push_back(static_cast<char>(0x80 | 126));
      f.push_back(static_cast<char>(payload.size() >> 8));
      f.push_back(static_cast<char>(payload.size() & 0xff));
    } else {
      f.push_back(static_cast<char>(0x80 | 127));
      for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((payload.size() >> (8 * i)) & 0xff));
    }
    f.append(reinterpret_cast<const char*>(mask), 4);
    for (std::size_t i = 0; i < payload.size(); ++i) f.push_back(static_cast<char>(payload[i] ^ mask[i % 4]));
    tcp_.send_raw(f);
  }

  struct Frame {
    std::uint8_t opcode{0};
    std::string payload;
  };

  std::optional<Frame> read_frame(int timeout_ms = 2000) {
    if (!tcp_.fill(2, timeout_ms)) return std::nullopt;
    const auto& b = tcp_.buffer();
    const std::uint8_t op = static_cast<std::uint8_t>(b[0]) & 0x0f;
    std::uint64_t len = static_cast<std::uint8_t>(b[1]) & 0x7f;
    std::size_t header = 2;
    if (len == 126) {
      if (!tcp_.fill(4, timeout_ms)) return std::nullopt;
      len = (static_cast<std::uint64_t>(static_cast<std::uint8_t>(tcp_.buffer()[2])) << 8) |
            static_cast<std::uint8_t>(tcp_.buffer()[3]);
      header = 4;
    } else if (len == 127) {
      if (!tcp_.fill(10, timeout_ms)) return std::nullopt;
      len = 0;
      for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<std::uint8_t>(tcp_.buffer()[2 + i]);
      header = 10;
    }
    if (!tcp_.fill(header + len, timeout_ms)) return std::nullopt;
    tcp_.take(header);
    return Frame{op, tcp_.take(len)};
  }

  /// Next text frame, skipping control frames.
  std::optional<std::string> read_text(int timeout_ms = 2000) {
    for (;;) {
      auto f = read_frame(timeout_ms);
      if (!f) return std::nullopt;
      if (f->opcode == 0x1) return f->payload;
      if (f->opcode == 0x8) return std::nullopt;
    }
  }

  TcpClient& tcp() { return tcp_; }

 private:
  TcpClient tcp_;
  std::string response_;
};

}  // namespace oracle
