#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <thread>

#include "procnav/bus.hpp"

namespace procnav {

struct BridgeConfig {
  std::string bind_address{"127.0.0.1"};
  int port{9090};  ///< 0 picks an ephemeral port
  /// Directory served for plain HTTP GET requests; empty disables it.
  std::string static_dir;
  std::size_t max_frame_bytes{1 << 20};
};

/// Accepts both transports on one port. A connection whose first bytes are
/// "GET " is HTTP (WebSocket upgrade or a static file); anything else is a
/// newline-delimited JSON stream.
class BridgeServer {
 public:
  BridgeServer(Broker& broker, BridgeConfig config);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  /// Binds and starts the I/O thread. Throws std::runtime_error on failure.
  void start();
  void stop();
  /// The bound port (useful with port 0).
  int port() const { return port_; }

 private:
  void loop();
  void wake();

  Broker& broker_;
  BridgeConfig config_;
  int listen_fd_{-1};
  int wake_pipe_[2]{-1, -1};
  int port_{0};
  std::atomic<bool> running_{false};
  std::thread thread_;
};

/// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept(std::string_view key);

/// Unmasked server-to-client frame.
std::string websocket_frame(std::string_view payload, std::uint8_t opcode = 0x1);

}  // namespace procnav
