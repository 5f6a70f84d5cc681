#include "procnav/bridge_server.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <openssl/evp.h>
#include <openssl/sha.h>

namespace procnav {

std::string websocket_accept(std::string_view key) {
  const std::string input = std::string(key) + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char out[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(out, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(out), static_cast<std::size_t>(n));
}

std::string websocket_frame(std::string_view payload, std::uint8_t opcode) {
  std::string f;
  f.push_back(static_cast<char>(0x80 | opcode));
  const std::uint64_t n = payload.size();
  if (n < 126) {
    f.push_back(static_cast<char>(n));
  } else if (n <= 0xFFFF) {
    f.push_back(static_cast<char>(126));
    f.push_back(static_cast<char>(n >> 8));
    f.push_back(static_cast<char>(n & 0xFF));
  } else {
    f.push_back(static_cast<char>(127));
    for (int i = 7; i >= 0; --i) f.push_back(static_cast<char>((n >> (8 * i)) & 0xFF));
  }
  f.append(payload);
  return f;
}

namespace {

enum class Mode { Unknown, Stream, WebSocket, Http };

struct Session {
  int fd{-1};
  Mode mode{Mode::Unknown};
  ClientId client{0};
  std::string in;
  std::string out;
  std::string fragments;  // WebSocket continuation payload
  bool skipping{false};   // discarding an oversized stream line
  bool close_after_write{false};
  bool closed{false};
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

std::string http_response(int code, std::string_view reason, std::string_view type, std::string_view body) {
  std::ostringstream os;
  os << "HTTP/1.1 " << code << ' ' << reason << "\r\n"
     << "Content-Type: " << type << "\r\n"
     << "Content-Length: " << body.size() << "\r\n"
     << "Connection: close\r\n\r\n"
     << body;
  return os.str();
}

void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL, 0) | O_NONBLOCK); }

class Loop {
 public:
  Loop(Broker& broker, const BridgeConfig& config) : broker_(broker), config_(config) {}

  void accept_all(int listen_fd) {
    while (true) {
      const int fd = ::accept(listen_fd, nullptr, nullptr);
      if (fd < 0) return;
      set_nonblocking(fd);
      auto s = std::make_unique<Session>();
      s->fd = fd;
      sessions_[fd] = std::move(s);
    }
  }

  void read_from(Session& s) {
    char buf[16384];
    while (true) {
      const ssize_t n = ::recv(s.fd, buf, sizeof buf, 0);
      if (n > 0) {
        s.in.append(buf, static_cast<std::size_t>(n));
        continue;
      }
      if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) s.closed = true;
      break;
    }
    process(s);
  }

  void process(Session& s) {
    if (s.mode == Mode::Unknown) {
      const std::string_view get = "GET ";
      const std::size_t k = std::min(s.in.size(), get.size());
      if (s.in.compare(0, k, get.substr(0, k)) != 0) {
        s.mode = Mode::Stream;
        s.client = broker_.connect();
      } else if (s.in.size() >= get.size()) {
        s.mode = Mode::Http;
      } else {
        return;
      }
    }
    switch (s.mode) {
      case Mode::Stream: return process_stream(s);
      case Mode::Http: return process_http(s);
      case Mode::WebSocket: return process_websocket(s);
      case Mode::Unknown: return;
    }
  }

  void process_stream(Session& s) {
    std::size_t start = 0;
    while (true) {
      const std::size_t nl = s.in.find('\n', start);
      if (nl == std::string::npos) break;
      std::string_view line(s.in.data() + start, nl - start);
      start = nl + 1;
      if (s.skipping) {
        s.skipping = false;
        continue;
      }
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (trim(line).empty()) continue;
      if (line.size() > config_.max_frame_bytes) {
        broker_.send_status(s.client, "MalformedFrame",
                            "frame exceeds " + std::to_string(config_.max_frame_bytes) + " bytes");
        continue;
      }
      broker_.handle_frame(s.client, line);
    }
    s.in.erase(0, start);
    if (s.in.size() > config_.max_frame_bytes) {
      if (!s.skipping)
        broker_.send_status(s.client, "MalformedFrame",
                            "frame exceeds " + std::to_string(config_.max_frame_bytes) + " bytes");
      s.skipping = true;
      s.in.clear();
    }
  }

  void process_http(Session& s) {
    const std::size_t end = s.in.find("\r\n\r\n");
    if (end == std::string::npos) {
      if (s.in.size() > 65536) {
        s.out += http_response(431, "Request Header Fields Too Large", "text/plain", "headers too large\n");
        s.close_after_write = true;
      }
      return;
    }
    std::istringstream head(s.in.substr(0, end));
    s.in.erase(0, end + 4);
    std::string request_line;
    std::getline(head, request_line);
    std::istringstream rl(request_line);
    std::string method, target, version;
    rl >> method >> target >> version;
    std::map<std::string, std::string> headers;
    for (std::string line; std::getline(head, line);) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      headers[lower(trim(line.substr(0, colon)))] = trim(line.substr(colon + 1));
    }
    if (lower(headers["upgrade"]) == "websocket" && headers.count("sec-websocket-key")) {
      s.out += "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
               "Sec-WebSocket-Accept: " +
               websocket_accept(headers["sec-websocket-key"]) + "\r\n\r\n";
      s.mode = Mode::WebSocket;
      s.client = broker_.connect();
      process_websocket(s);
      return;
    }
    serve_file(s, target);
    s.close_after_write = true;
  }

  void serve_file(Session& s, std::string target) {
    namespace fs = std::filesystem;
    if (config_.static_dir.empty()) {
      s.out += http_response(404, "Not Found", "text/plain", "static files are disabled\n");
      return;
    }
    target = target.substr(0, target.find_first_of("?#"));
    if (target.empty() || target.back() == '/') target += "index.html";
    const fs::path rel = fs::path(target).relative_path().lexically_normal();
    if (rel.empty() || *rel.begin() == "..") {
      s.out += http_response(403, "Forbidden", "text/plain", "forbidden\n");
      return;
    }
    const fs::path full = fs::path(config_.static_dir) / rel;
    std::ifstream f(full, std::ios::binary);
    if (!f || fs::is_directory(full)) {
      s.out += http_response(404, "Not Found", "text/plain", "not found\n");
      return;
    }
    std::ostringstream body;
    body << f.rdbuf();
    s.out += http_response(200, "OK", content_type(full), body.str());
  }

  void process_websocket(Session& s) {
    while (true) {
      if (s.in.size() < 2) return;
      const auto b0 = static_cast<unsigned char>(s.in[0]);
      const auto b1 = static_cast<unsigned char>(s.in[1]);
      const bool fin = b0 & 0x80;
      const int opcode = b0 & 0x0F;
      const bool masked = b1 & 0x80;
      std::uint64_t len = b1 & 0x7F;
      std::size_t pos = 2;
      if (len == 126) {
        if (s.in.size() < 4) return;
        len = (static_cast<unsigned char>(s.in[2]) << 8) | static_cast<unsigned char>(s.in[3]);
        pos = 4;
      } else if (len == 127) {
        if (s.in.size() < 10) return;
        len = 0;
        for (int i = 0; i < 8; ++i) len = (len << 8) | static_cast<unsigned char>(s.in[2 + i]);
        pos = 10;
      }
      if (!masked || len > config_.max_frame_bytes) {
        // Protocol error or oversized frame: close the connection.
        s.out += websocket_frame(std::string("\x03\xea", 2), 0x8);
        s.close_after_write = true;
        s.in.clear();
        return;
      }
      if (s.in.size() < pos + 4 + len) return;
      const std::string mask = s.in.substr(pos, 4);
      std::string payload = s.in.substr(pos + 4, static_cast<std::size_t>(len));
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] ^= mask[i % 4];
      s.in.erase(0, pos + 4 + static_cast<std::size_t>(len));

      switch (opcode) {
        case 0x0:
        case 0x1:
        case 0x2:
          s.fragments += payload;
          if (s.fragments.size() > config_.max_frame_bytes) {
            broker_.send_status(s.client, "MalformedFrame", "message too large");
            s.fragments.clear();
          } else if (fin) {
            broker_.handle_frame(s.client, s.fragments);
            s.fragments.clear();
          }
          break;
        case 0x8:
          s.out += websocket_frame(payload.substr(0, 2), 0x8);
          s.close_after_write = true;
          return;
        case 0x9:
          s.out += websocket_frame(payload, 0xA);
          break;
        default:
          break;
      }
    }
  }

  void flush_broker() {
    for (auto& [fd, s] : sessions_) {
      if (!s->client || s->close_after_write) continue;
      for (auto& e : broker_.drain(s->client)) {
        if (s->mode == Mode::WebSocket) {
          s->out += websocket_frame(e.frame);
        } else {
          s->out += e.frame;
          s->out += '\n';
        }
      }
    }
  }

  void write_to(Session& s) {
    while (!s.out.empty()) {
      const ssize_t n = ::send(s.fd, s.out.data(), s.out.size(), MSG_NOSIGNAL);
      if (n > 0) {
        s.out.erase(0, static_cast<std::size_t>(n));
        continue;
      }
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR)) return;
      s.closed = true;
      return;
    }
    if (s.close_after_write) s.closed = true;
  }

  void reap() {
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->second->closed) {
        if (it->second->client) broker_.disconnect(it->second->client);
        ::close(it->first);
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void close_all() {
    for (auto& [fd, s] : sessions_) {
      if (s->client) broker_.disconnect(s->client);
      ::close(fd);
    }
    sessions_.clear();
  }

  std::map<int, std::unique_ptr<Session>>& sessions() { return sessions_; }

 private:
  Broker& broker_;
  const BridgeConfig& config_;
  std::map<int, std::unique_ptr<Session>> sessions_;
};

}  // namespace

BridgeServer::BridgeServer(Broker& broker, BridgeConfig config) : broker_(broker), config_(std::move(config)) {}

BridgeServer::~BridgeServer() { stop(); }

void BridgeServer::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(config_.port));
  if (::inet_pton(AF_INET, config_.bind_address.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw std::runtime_error("invalid bind address '" + config_.bind_address + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
    const std::string err = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on " + config_.bind_address + ":" + std::to_string(config_.port) +
                             ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  set_nonblocking(listen_fd_);
  if (::pipe(wake_pipe_) < 0) throw std::runtime_error("pipe failed");
  set_nonblocking(wake_pipe_[0]);
  set_nonblocking(wake_pipe_[1]);
  broker_.set_notify([this](ClientId) { wake(); });
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void BridgeServer::wake() {
  const char c = 1;
  [[maybe_unused]] const auto n = ::write(wake_pipe_[1], &c, 1);
}

void BridgeServer::stop() {
  if (!running_) return;
  running_ = false;
  wake();
  if (thread_.joinable()) thread_.join();
  broker_.set_notify({});
  ::close(listen_fd_);
  ::close(wake_pipe_[0]);
  ::close(wake_pipe_[1]);
  listen_fd_ = wake_pipe_[0] = wake_pipe_[1] = -1;
}

void BridgeServer::loop() {
  Loop loop(broker_, config_);
  std::vector<pollfd> fds;
  while (running_) {
    loop.flush_broker();
    fds.clear();
    fds.push_back({listen_fd_, POLLIN, 0});
    fds.push_back({wake_pipe_[0], POLLIN, 0});
    for (auto& [fd, s] : loop.sessions()) {
      short events = POLLIN;
      if (!s->out.empty()) events |= POLLOUT;
      fds.push_back({fd, events, 0});
    }
    if (::poll(fds.data(), fds.size(), 200) < 0 && errno != EINTR) break;
    if (fds[1].revents & POLLIN) {
      char buf[256];
      while (::read(wake_pipe_[0], buf, sizeof buf) > 0) {
      }
    }
    if (fds[0].revents & POLLIN) loop.accept_all(listen_fd_);
    for (std::size_t i = 2; i < fds.size(); ++i) {
      auto it = loop.sessions().find(fds[i].fd);
      if (it == loop.sessions().end()) continue;
      Session& s = *it->second;
      if (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) loop.read_from(s);
    }
    loop.flush_broker();
    for (auto& [fd, s] : loop.sessions()) loop.write_to(*s);
    loop.reap();
  }
  loop.close_all();
}

}  // namespace procnav
