#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dcx::gateway {

using Json = nlohmann::json;

enum class EventKind { Session, Fault, Calibration, Decision, Settings };

std::string_view to_string(EventKind k) noexcept;

struct EventRecord {
  std::uint64_t seq = 0;
  std::uint64_t timestamp = 0;  // logical clock
  EventKind kind = EventKind::Session;
  Json payload;
  std::string digest;  // state digest after applying this record
};

Json to_json(const EventRecord& r);
/// Throws CorruptLog on schema violations.
EventRecord event_from_json(const Json& j);

/// Session and decision events carry one protocol log entry each; the last
/// event of a batch also carries the outcome (summary, devices, claims).
/// Control-plane state that is a pure fold over the event log.
///   sessions      id -> session summary
///   faults        id -> active fault
///   calibrations  id -> {link_id, result}
///   optimizations id -> {link_id, result}
///   settings      link -> edfa -> {gain_db, tilt_db}
///   occupancy     link -> sorted claimed channels
///   devices       trx -> configuration
Json initial_state();
/// Throws CorruptLog when the payload does not fit the kind.
void apply_event(Json& state, const EventRecord& r);
/// FNV-1a 64 of the compact state dump, as 16 hex digits.
std::string state_digest(const Json& state);

/// Append-only record store; optionally mirrored line by line to a file,
/// flushed before append returns.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(const std::filesystem::path& sink);

  const EventRecord& append(EventKind kind, Json payload, const Json& state_after);
  const std::vector<EventRecord>& records() const { return records_; }
  std::vector<EventRecord> since(std::uint64_t seq) const;
  std::uint64_t last_seq() const { return records_.empty() ? 0 : records_.back().seq; }
  std::string to_ndjson() const;

 private:
  std::vector<EventRecord> records_;
  std::ofstream sink_;
};

struct ReplayResult {
  Json state;
  std::uint64_t last_seq = 0;
  std::string digest;
};

/// Folds an NDJSON log from the initial state. Verifies gapless sequence
/// numbers starting at 1 and every recorded digest. Throws CorruptLog naming
/// the offending seq.
ReplayResult replay_events(std::string_view ndjson);
ReplayResult replay_events_file(const std::filesystem::path& path);

}  // namespace dcx::gateway
