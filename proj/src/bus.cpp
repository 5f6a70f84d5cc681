#include "procnav/bus.hpp"

#include <array>
#include <utility>

namespace procnav {

namespace {

constexpr std::array<std::pair<Op, std::string_view>, 6> kOps = {{
    {Op::Advertise, "advertise"},
    {Op::Unadvertise, "unadvertise"},
    {Op::Publish, "publish"},
    {Op::Subscribe, "subscribe"},
    {Op::Unsubscribe, "unsubscribe"},
    {Op::Status, "status"},
}};

bool topic_char(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'; }

}  // namespace

std::string_view to_string(Op op) {
  for (const auto& [o, name] : kOps)
    if (o == op) return name;
  return "?";
}

std::optional<Op> parse_op(std::string_view name) {
  for (const auto& [o, n] : kOps)
    if (n == name) return o;
  return std::nullopt;
}

std::string_view to_string(BusError::Kind k) {
  switch (k) {
    case BusError::Kind::MalformedFrame: return "MalformedFrame";
    case BusError::Kind::UnknownOp: return "UnknownOp";
    case BusError::Kind::SchemaViolation: return "SchemaViolation";
  }
  return "?";
}

bool valid_topic(std::string_view topic) {
  if (topic.empty() || topic.front() != '/') return false;
  bool segment_empty = true;
  for (std::size_t i = 1; i < topic.size(); ++i) {
    if (topic[i] == '/') {
      if (segment_empty) return false;
      segment_empty = true;
    } else if (topic_char(topic[i])) {
      segment_empty = false;
    } else {
      return false;
    }
  }
  return !segment_empty;
}

std::string codec_encode(const BusMessage& m) {
  Json j;
  j["op"] = to_string(m.op);
  j["topic"] = m.topic;
  j["type"] = m.type;
  j["msg"] = m.msg;
  if (m.id) j["id"] = *m.id;
  return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

BusMessage codec_decode(std::string_view bytes) {
  using K = BusError::Kind;
  Json j;
  try {
    j = Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::exception& e) {
    throw BusError(K::MalformedFrame, std::string("frame is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw BusError(K::MalformedFrame, "frame is not a JSON object");
  const auto op_it = j.find("op");
  if (op_it == j.end() || !op_it->is_string()) throw BusError(K::SchemaViolation, "field 'op' must be a string");
  const auto op = parse_op(op_it->get<std::string>());
  if (!op) throw BusError(K::UnknownOp, "unknown op '" + op_it->get<std::string>() + "'");

  BusMessage m;
  m.op = *op;
  const auto topic = j.find("topic");
  if (topic == j.end() || !topic->is_string()) throw BusError(K::SchemaViolation, "field 'topic' must be a string");
  m.topic = topic->get<std::string>();
  if (m.op != Op::Status && !valid_topic(m.topic))
    throw BusError(K::SchemaViolation, "invalid topic name '" + m.topic + "'");
  if (const auto t = j.find("type"); t != j.end()) {
    if (!t->is_string()) throw BusError(K::SchemaViolation, "field 'type' must be a string");
    m.type = t->get<std::string>();
  }
  if (const auto msg = j.find("msg"); msg != j.end()) {
    if (!msg->is_object()) throw BusError(K::SchemaViolation, "field 'msg' must be an object");
    m.msg = *msg;
  }
  if (const auto id = j.find("id"); id != j.end()) {
    if (!id->is_string()) throw BusError(K::SchemaViolation, "field 'id' must be a string");
    m.id = id->get<std::string>();
  }
  return m;
}

BusMessage make_status(std::string_view level, std::string_view code, std::string_view text,
                       std::string_view topic, std::optional<std::string> id) {
  BusMessage m;
  m.op = Op::Status;
  m.topic = topic;
  m.type = "status";
  m.msg = Json::object();
  m.msg["level"] = level;
  m.msg["code"] = code;
  m.msg["text"] = text;
  m.id = std::move(id);
  return m;
}

// ---------------------------------------------------------------------------
// Schemas

namespace {

std::optional<std::string> need_number(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) return std::string("'") + key + "' must be a number";
  return std::nullopt;
}

std::optional<std::string> need_numbers(const Json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (auto e = need_number(j, k)) return e;
  return std::nullopt;
}

std::optional<std::string> need_object(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_object()) return std::string("'") + key + "' must be an object";
  return std::nullopt;
}

}  // namespace

std::map<std::string, SchemaCheck> standard_schemas() {
  std::map<std::string, SchemaCheck> s;
  s["std/String"] = [](const Json& j) -> std::optional<std::string> {
    const auto it = j.find("data");
    if (it == j.end() || !it->is_string()) return "'data' must be a string";
    return std::nullopt;
  };
  s["sim/Twist"] = [](const Json& j) { return need_numbers(j, {"linear", "angular"}); };
  s["sim/Odometry"] = [](const Json& j) -> std::optional<std::string> {
    if (auto e = need_number(j, "stamp")) return e;
    if (auto e = need_object(j, "pose")) return e;
    if (auto e = need_object(j, "twist")) return e;
    if (auto e = need_numbers(j["pose"], {"x", "y", "theta"})) return "pose: " + *e;
    return need_numbers(j["twist"], {"linear", "angular"});
  };
  s["sim/LaserScan"] = [](const Json& j) -> std::optional<std::string> {
    if (auto e = need_numbers(j, {"stamp", "angle_min", "angle_increment", "range_max"})) return e;
    const auto it = j.find("ranges");
    if (it == j.end() || !it->is_array()) return "'ranges' must be an array";
    for (const auto& r : *it)
      if (!r.is_number()) return "'ranges' must hold numbers";
    return std::nullopt;
  };
  s["sim/EnvironmentSpec"] = [](const Json& j) -> std::optional<std::string> {
    try {
      validate_spec(spec_from_json(j));
    } catch (const std::exception& e) {
      return e.what();
    }
    return std::nullopt;
  };
  auto any_object = [](const Json&) -> std::optional<std::string> { return std::nullopt; };
  s["sim/World"] = any_object;
  s["sim/TraceRecord"] = [](const Json& j) { return need_numbers(j, {"tick", "t"}); };
  s["sim/PlannerResponse"] = any_object;
  return s;
}

// ---------------------------------------------------------------------------
// Broker

Broker::Broker(std::size_t queue_limit) : queue_limit_(queue_limit == 0 ? 1 : queue_limit) {}

ClientId Broker::connect() {
  std::lock_guard lock(mutex_);
  const ClientId id = next_id_++;
  clients_[id];
  return id;
}

void Broker::disconnect(ClientId client) {
  std::lock_guard lock(mutex_);
  clients_.erase(client);
  for (auto it = topics_.begin(); it != topics_.end();) {
    it->second.publishers.erase(client);
    it->second.subscribers.erase(client);
    const auto& e = it->second;
    if (e.publishers.empty() && e.subscribers.empty() && !e.latched) {
      it = topics_.erase(it);
    } else {
      ++it;
    }
  }
}

void Broker::latch_topic(const std::string& topic) {
  std::lock_guard lock(mutex_);
  latched_topics_.insert(topic);
  if (auto it = topics_.find(topic); it != topics_.end()) it->second.latch = true;
}

void Broker::declare_topic(const std::string& topic, const std::string& type) {
  std::lock_guard lock(mutex_);
  auto& t = topics_[topic];
  if (t.type.empty()) t.type = type;
  if (latched_topics_.count(topic)) t.latch = true;
}

void Broker::register_schema(const std::string& type, SchemaCheck check) {
  std::lock_guard lock(mutex_);
  schemas_[type] = std::move(check);
}

void Broker::set_notify(std::function<void(ClientId)> notify) {
  std::lock_guard lock(mutex_);
  notify_ = std::move(notify);
}

void Broker::enqueue(ClientId to, Envelope e) {
  const auto it = clients_.find(to);
  if (it == clients_.end()) return;
  auto& c = it->second;
  c.queue.push_back(std::move(e));
  while (c.queue.size() > queue_limit_) {
    c.queue.pop_front();
    ++c.dropped;
  }
  if (notify_) notify_(to);
}

void Broker::error(ClientId to, std::string_view code, std::string_view text, const BusMessage& m) {
  enqueue(to, {codec_encode(make_status("error", code, text, m.topic, m.id)), 0});
}

void Broker::send_status(ClientId to, std::string_view code, std::string_view text, std::string_view topic,
                         std::optional<std::string> id, std::string_view level) {
  std::lock_guard lock(mutex_);
  enqueue(to, {codec_encode(make_status(level, code, text, topic, std::move(id))), 0});
}

void Broker::handle_frame(ClientId from, std::string_view bytes) {
  BusMessage m;
  try {
    m = codec_decode(bytes);
  } catch (const BusError& e) {
    std::lock_guard lock(mutex_);
    enqueue(from, {codec_encode(make_status("error", to_string(e.kind()), e.what())), 0});
    return;
  }
  try {
    dispatch(from, m);
  } catch (const std::exception& e) {
    send_status(from, "InternalError", e.what(), m.topic, m.id);
  }
}

void Broker::dispatch(ClientId from, const BusMessage& m) {
  std::lock_guard lock(mutex_);
  if (!clients_.count(from)) return;
  if (m.op != Op::Status && !valid_topic(m.topic)) {
    error(from, "SchemaViolation", "invalid topic name '" + m.topic + "'", m);
    return;
  }
  switch (m.op) {
    case Op::Advertise: {
      if (m.type.empty()) return error(from, "SchemaViolation", "advertise requires a type", m);
      auto& t = topics_[m.topic];
      if (!t.type.empty() && t.type != m.type)
        return error(from, "SchemaViolation", "topic " + m.topic + " already has type " + t.type, m);
      t.type = m.type;
      t.publishers.insert(from);
      const auto latch = m.msg.find("latch");
      if (latched_topics_.count(m.topic) || (latch != m.msg.end() && latch->is_boolean() && latch->get<bool>()))
        t.latch = true;
      return;
    }
    case Op::Unadvertise: {
      if (auto it = topics_.find(m.topic); it != topics_.end()) it->second.publishers.erase(from);
      return;
    }
    case Op::Subscribe: {
      auto& t = topics_[m.topic];
      if (latched_topics_.count(m.topic)) t.latch = true;
      if (!m.type.empty() && !t.type.empty() && m.type != t.type)
        return error(from, "SchemaViolation", "topic " + m.topic + " has type " + t.type, m);
      t.subscribers.insert(from);
      if (t.latched) enqueue(from, {*t.latched, 0});
      return;
    }
    case Op::Unsubscribe: {
      if (auto it = topics_.find(m.topic); it != topics_.end()) it->second.subscribers.erase(from);
      return;
    }
    case Op::Status:
      return;
    case Op::Publish: {
      const auto it = topics_.find(m.topic);
      if (it == topics_.end() || !it->second.publishers.count(from))
        return error(from, "NotAdvertised", "publish on " + m.topic + " before advertise", m);
      auto& t = it->second;
      if (!m.type.empty() && m.type != t.type)
        return error(from, "SchemaViolation", "topic " + m.topic + " has type " + t.type, m);
      if (const auto s = schemas_.find(t.type); s != schemas_.end()) {
        if (const auto problem = s->second(m.msg))
          return error(from, "SchemaViolation", t.type + ": " + *problem, m);
      }
      BusMessage out = m;
      out.type = t.type;
      std::string frame = codec_encode(out);
      for (const ClientId sub : t.subscribers) enqueue(sub, {frame, from});
      if (t.latch) t.latched = std::move(frame);
      return;
    }
  }
}

std::vector<Envelope> Broker::drain(ClientId client) {
  std::lock_guard lock(mutex_);
  std::vector<Envelope> out;
  const auto it = clients_.find(client);
  if (it == clients_.end()) return out;
  auto& c = it->second;
  if (c.dropped) {
    out.push_back({codec_encode(make_status("warning", "QueueOverflow",
                                            "dropped " + std::to_string(c.dropped) + " oldest frames")),
                   0});
    c.dropped = 0;
  }
  out.insert(out.end(), std::make_move_iterator(c.queue.begin()), std::make_move_iterator(c.queue.end()));
  c.queue.clear();
  return out;
}

std::size_t Broker::pending(ClientId client) const {
  std::lock_guard lock(mutex_);
  const auto it = clients_.find(client);
  return it == clients_.end() ? 0 : it->second.queue.size();
}

TopicTable Broker::topics() const {
  std::lock_guard lock(mutex_);
  return topics_;
}

std::size_t Broker::client_count() const {
  std::lock_guard lock(mutex_);
  return clients_.size();
}

}  // namespace procnav
