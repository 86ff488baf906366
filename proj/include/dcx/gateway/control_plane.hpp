#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dcx/gateway/event_log.hpp"
#include "dcx/linetwin/twin.hpp"
#include "dcx/monitor/calibration.hpp"
#include "dcx/monitor/gain_tilt.hpp"
#include "dcx/monitor/nf_fault.hpp"
#include "dcx/netmodel/topology.hpp"
#include "dcx/protocol/session.hpp"

namespace dcx::gateway {

struct PlaneConfig {
  std::uint64_t seed = 1;
  double launch_dbm = 0.0;          // flat per-channel launch on every link
  double monitor_noise_db = 0.1;    // telemetry noise for calibration and NF checks
  double profile_noise_db = 0.0;    // default noise of synthesized power profiles
  double resolution_km = linetwin::kDefaultResolutionKm;
  std::optional<std::filesystem::path> event_log_path;
};

/// Seed from DCX_SEED when set and numeric, otherwise `fallback`.
std::uint64_t seed_from_env(std::uint64_t fallback);

/// splitmix64 of the seed mixed with a salt and a counter.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt, std::uint64_t counter);

/// Single writer over the twin, occupancy, devices, sessions and the event
/// log. Every public member takes the lock; mutations append their events
/// before returning.
class ControlPlane {
 public:
  ControlPlane(netmodel::Topology topology, PlaneConfig config);
  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  const netmodel::Topology& topology() const { return topology_; }
  const PlaneConfig& config() const { return config_; }

  // Mutations.
  Json create_session(const std::string& site_a, const std::string& site_b, const protocol::Policy& policy);
  /// Throws NotFound and NotPending.
  Json decide(const std::string& session_id, protocol::Verdict verdict, const std::string& reason);
  /// Returns the assigned id. Throws UnknownLink and ValidationError.
  std::string inject_fault(linetwin::FaultSpec fault);
  /// Throws UnknownFault.
  void clear_fault(const std::string& id);
  /// Returns {id, link_id, result}. Throws UnknownLink, Underdetermined.
  Json calibrate(const std::string& link_id);
  /// Optimizes gain/tilt against the latest calibration of the link and
  /// applies the settings. Throws UnknownLink and NoBaseline.
  Json optimize(const std::string& link_id);

  // Reads.
  /// Summary plus the message log. Throws NotFound.
  Json session(const std::string& id) const;
  Json sessions(std::optional<protocol::State> filter = std::nullopt) const;
  /// Throws NotFound.
  Json calibration(const std::string& id) const;
  monitor::CalibrationResult calibration_result(const std::string& id) const;
  /// Id of the newest calibration of the link, if any.
  std::optional<std::string> latest_calibration(const std::string& link_id) const;
  linetwin::PowerProfile profile(const std::string& link_id, std::optional<double> resolution_km = std::nullopt,
                                 std::optional<double> noise_sigma_db = std::nullopt,
                                 std::optional<int> channel = std::nullopt) const;
  /// Per-channel GSNR at the link output and accumulated at each EDFA, dB.
  Json gsnr(const std::string& link_id) const;
  /// Fresh operating-point telemetry compared with a stored calibration.
  monitor::NfFaultResult detect_nf_fault(const std::string& link_id, const std::string& calibration_id,
                                         const monitor::NfFaultOptions& options = {}) const;

  /// Ground truth: topology links with current settings and active faults.
  linetwin::LineTwin twin() const;
  /// Declared link with the current amplifier settings; what the controller believes.
  netmodel::OpticalLink priors(const std::string& link_id) const;
  std::vector<double> launch(const std::string& link_id) const;

  Json state() const;
  std::string digest() const;
  std::vector<EventRecord> events_since(std::uint64_t seq) const;
  std::uint64_t last_seq() const;
  std::string event_log_ndjson() const;

 private:
  const EventRecord& append(EventKind kind, Json payload);
  void require_link(const std::string& link_id) const;
  linetwin::LineTwin twin_locked() const;
  protocol::ProbeFn probe_for(const std::string& rx_trx) const;
  Json session_outcome(const protocol::Session& s) const;
  /// One event per protocol log entry from `first`; the last carries the outcome.
  void append_session_events(EventKind kind, const protocol::Session& s, std::size_t first, const Json& extra);

  netmodel::Topology topology_;
  PlaneConfig config_;
  mutable std::recursive_mutex mu_;
  Json state_;
  EventLog log_;
  protocol::OccupancyCoordinator occupancy_;
  protocol::DeviceRegistry devices_;
  std::map<std::string, std::unique_ptr<protocol::Session>> sessions_;
};

}  // namespace dcx::gateway
