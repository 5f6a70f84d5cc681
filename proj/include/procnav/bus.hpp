#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "procnav/serialization.hpp"

namespace procnav {

enum class Op { Advertise, Unadvertise, Publish, Subscribe, Unsubscribe, Status };

std::string_view to_string(Op op);
std::optional<Op> parse_op(std::string_view name);

/// One wire frame. `msg` is the payload object; `id` is an optional
/// correlation string echoed back in status replies.
struct BusMessage {
  Op op{Op::Publish};
  std::string topic;
  std::string type;
  Json msg = Json::object();
  std::optional<std::string> id;

  friend bool operator==(const BusMessage&, const BusMessage&) = default;
};

class BusError : public std::runtime_error {
 public:
  enum class Kind { MalformedFrame, UnknownOp, SchemaViolation };
  BusError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(BusError::Kind k);

/// `(/[a-z0-9_]+)+`
bool valid_topic(std::string_view topic);

/// Compact JSON object with keys in the order op, topic, type, msg, id.
/// No trailing newline; the stream transport appends one per frame.
std::string codec_encode(const BusMessage& m);
/// Throws BusError.
BusMessage codec_decode(std::string_view bytes);

BusMessage make_status(std::string_view level, std::string_view code, std::string_view text,
                       std::string_view topic = "", std::optional<std::string> id = {});

using ClientId = std::uint64_t;

struct TopicEntry {
  std::string type;  // empty until the first advertise
  std::set<ClientId> publishers;
  std::set<ClientId> subscribers;
  bool latch{false};
  std::optional<std::string> latched;  // last published frame, encoded
};

using TopicTable = std::map<std::string, TopicEntry>;

/// A queued outbound frame together with the client that caused it
/// (0 for frames generated by the broker itself).
struct Envelope {
  std::string frame;
  ClientId origin{0};
};

/// Payload check for one message type; returns an error text or nothing.
using SchemaCheck = std::function<std::optional<std::string>(const Json&)>;

/// Schema checks for the simulator's message types.
std::map<std::string, SchemaCheck> standard_schemas();

/// Thread-safe topic table with per-client outbound queues. Network sessions
/// and in-process nodes are both plain clients.
class Broker {
 public:
  explicit Broker(std::size_t queue_limit = 1024);

  ClientId connect();
  /// Removes the client from every topic; latched values stay.
  void disconnect(ClientId client);

  /// Marks a topic as latched regardless of how it is advertised.
  void latch_topic(const std::string& topic);
  /// Fixes a topic's type ahead of any advertise.
  void declare_topic(const std::string& topic, const std::string& type);
  void register_schema(const std::string& type, SchemaCheck check);

  /// Decodes one frame and dispatches it. Decode errors are answered with a
  /// status frame to the sender.
  void handle_frame(ClientId from, std::string_view bytes);
  void dispatch(ClientId from, const BusMessage& m);

  /// Queues a status frame for one client.
  void send_status(ClientId to, std::string_view code, std::string_view text, std::string_view topic = "",
                   std::optional<std::string> id = {}, std::string_view level = "error");

  /// Takes every queued frame for the client. If frames were dropped since the
  /// last drain, a QueueOverflow status comes first.
  std::vector<Envelope> drain(ClientId client);
  std::size_t pending(ClientId client) const;

  /// Called (under the broker lock) whenever a client's queue grows.
  void set_notify(std::function<void(ClientId)> notify);

  TopicTable topics() const;
  std::size_t client_count() const;

 private:
  struct Client {
    std::deque<Envelope> queue;
    std::uint64_t dropped{0};
  };

  void enqueue(ClientId to, Envelope e);
  void error(ClientId to, std::string_view code, std::string_view text, const BusMessage& m);

  mutable std::mutex mutex_;
  std::size_t queue_limit_;
  ClientId next_id_{1};
  std::map<ClientId, Client> clients_;
  TopicTable topics_;
  std::set<std::string> latched_topics_;
  std::map<std::string, SchemaCheck> schemas_;
  std::function<void(ClientId)> notify_;
};

}  // namespace procnav
