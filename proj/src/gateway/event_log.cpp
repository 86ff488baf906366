#include "dcx/gateway/event_log.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "dcx/error.hpp"

namespace dcx::gateway {

namespace {

constexpr std::string_view kKindNames[] = {"session", "fault", "calibration", "decision", "settings"};

[[noreturn]] void corrupt(std::uint64_t seq, const std::string& what) {
  throw Error(Errc::CorruptLog, "seq " + std::to_string(seq) + ": " + what);
}

void require(const Json& payload, std::uint64_t seq, std::initializer_list<const char*> keys) {
  if (!payload.is_object()) corrupt(seq, "payload is not an object");
  for (const char* k : keys) {
    if (!payload.contains(k)) corrupt(seq, std::string("payload lacks ") + k);
  }
}

void apply_session_outcome(Json& state, const Json& p) {
  state["sessions"][p["session_id"].get<std::string>()] = p["summary"];
  for (const auto& [trx, cfg] : p["devices"].items()) state["devices"][trx] = cfg;
  if (p.contains("claims") && !p["claims"].is_null()) {
    const int ch = p["claims"]["channel"].get<int>();
    for (const auto& link : p["claims"]["links"]) {
      auto& slot = state["occupancy"][link.get<std::string>()];
      if (slot.is_null()) slot = Json::array();
      auto channels = slot.get<std::vector<int>>();
      channels.push_back(ch);
      std::sort(channels.begin(), channels.end());
      channels.erase(std::unique(channels.begin(), channels.end()), channels.end());
      slot = channels;
    }
  }
}

}  // namespace

std::string_view to_string(EventKind k) noexcept { return kKindNames[static_cast<int>(k)]; }

Json to_json(const EventRecord& r) {
  return Json{{"seq", r.seq},
              {"timestamp", r.timestamp},
              {"kind", to_string(r.kind)},
              {"payload", r.payload},
              {"digest", r.digest}};
}

EventRecord event_from_json(const Json& j) {
  const std::uint64_t seq = j.is_object() && j.contains("seq") && j["seq"].is_number_unsigned() ? j["seq"].get<std::uint64_t>() : 0;
  if (!j.is_object()) corrupt(seq, "record is not an object");
  for (const char* k : {"seq", "timestamp", "kind", "payload", "digest"}) {
    if (!j.contains(k)) corrupt(seq, std::string("record lacks ") + k);
  }
  EventRecord r;
  try {
    r.seq = j["seq"].get<std::uint64_t>();
    r.timestamp = j["timestamp"].get<std::uint64_t>();
    const auto kind = j["kind"].get<std::string>();
    auto it = std::find(std::begin(kKindNames), std::end(kKindNames), kind);
    if (it == std::end(kKindNames)) corrupt(seq, "unknown kind " + kind);
    r.kind = static_cast<EventKind>(it - std::begin(kKindNames));
    r.payload = j["payload"];
    r.digest = j["digest"].get<std::string>();
  } catch (const Json::exception& e) {
    corrupt(seq, e.what());
  }
  return r;
}

Json initial_state() {
  return Json{{"sessions", Json::object()},     {"faults", Json::object()},   {"calibrations", Json::object()},
              {"optimizations", Json::object()}, {"settings", Json::object()}, {"occupancy", Json::object()},
              {"devices", Json::object()}};
}

void apply_event(Json& state, const EventRecord& r) {
  const auto& p = r.payload;
  try {
    switch (r.kind) {
      case EventKind::Session:
      case EventKind::Decision:
        require(p, r.seq, {"session_id", "entry"});
        if (p.contains("summary")) {
          require(p, r.seq, {"devices"});
          apply_session_outcome(state, p);
        }
        break;
      case EventKind::Fault:
        require(p, r.seq, {"op"});
        if (p["op"] == "set") {
          require(p, r.seq, {"fault"});
          state["faults"][p["fault"]["id"].get<std::string>()] = p["fault"];
        } else if (p["op"] == "clear") {
          require(p, r.seq, {"id"});
          state["faults"].erase(p["id"].get<std::string>());
        } else {
          corrupt(r.seq, "unknown fault op");
        }
        break;
      case EventKind::Calibration:
        require(p, r.seq, {"id", "link_id", "result"});
        state["calibrations"][p["id"].get<std::string>()] = Json{{"link_id", p["link_id"]}, {"result", p["result"]}};
        break;
      case EventKind::Settings:
        require(p, r.seq, {"id", "link_id", "result"});
        state["optimizations"][p["id"].get<std::string>()] = Json{{"link_id", p["link_id"]}, {"result", p["result"]}};
        for (const auto& s : p["result"]["settings"]) {
          state["settings"][p["link_id"].get<std::string>()][s["id"].get<std::string>()] =
              Json{{"gain_db", s["gain_db"]}, {"tilt_db", s["tilt_db"]}};
        }
        break;
    }
  } catch (const Json::exception& e) {
    corrupt(r.seq, e.what());
  }
}

std::string state_digest(const Json& state) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : state.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EventLog::EventLog(const std::filesystem::path& sink) : sink_(sink, std::ios::trunc) {
  if (!sink_) throw Error(Errc::NotFound, "cannot open event log " + sink.string());
}

const EventRecord& EventLog::append(EventKind kind, Json payload, const Json& state_after) {
  EventRecord r;
  r.seq = last_seq() + 1;
  r.timestamp = r.seq;
  r.kind = kind;
  r.payload = std::move(payload);
  r.digest = state_digest(state_after);
  if (sink_.is_open()) {
    sink_ << to_json(r).dump() << '\n';
    sink_.flush();
  }
  records_.push_back(std::move(r));
  return records_.back();
}

std::vector<EventRecord> EventLog::since(std::uint64_t seq) const {
  std::vector<EventRecord> out;
  for (const auto& r : records_) {
    if (r.seq > seq) out.push_back(r);
  }
  return out;
}

std::string EventLog::to_ndjson() const {
  std::string out;
  for (const auto& r : records_) out += to_json(r).dump() + "\n";
  return out;
}

ReplayResult replay_events(std::string_view ndjson) {
  ReplayResult out{initial_state(), 0, {}};
  std::istringstream in{std::string(ndjson)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      corrupt(out.last_seq + 1, std::string("unparsable record: ") + e.what());
    }
    const auto r = event_from_json(j);
    if (r.seq != out.last_seq + 1) corrupt(out.last_seq + 1, "gap, next record has seq " + std::to_string(r.seq));
    apply_event(out.state, r);
    if (state_digest(out.state) != r.digest) corrupt(r.seq, "state digest mismatch");
    out.last_seq = r.seq;
  }
  out.digest = state_digest(out.state);
  return out;
}

ReplayResult replay_events_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::NotFound, path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return replay_events(ss.str());
}

}  // namespace dcx::gateway
