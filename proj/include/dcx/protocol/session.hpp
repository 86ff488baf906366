#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcx/modes/modes.hpp"
#include "dcx/netmodel/topology.hpp"
#include "dcx/protocol/messages.hpp"
#include "dcx/qot/budget.hpp"
#include "dcx/routing/routing.hpp"

namespace dcx::protocol {

enum class State {
  Idle,
  Registering,
  Authenticated,
  CatalogExchanged,
  Probing,
  QotEstimated,
  ModeSelected,
  Configured,
  PendingApproval,
  Committed,
  RolledBack,
  Errored,
};

std::string_view to_string(State s) noexcept;
std::optional<State> parse_state(std::string_view s) noexcept;
bool is_terminal(State s) noexcept;
/// Edges of the session state graph shared by user agents and the carrier.
bool allowed_transition(State from, State to) noexcept;

enum class ModeSelectionSide { Carrier, User };

struct Policy {
  bool auto_approve = false;
  ModeSelectionSide selection = ModeSelectionSide::Carrier;
  std::optional<std::string> route_id;
  double margin_db = modes::kDefaultMarginDb;
  int max_pops = routing::kDefaultMaxPops;
  routing::SegmentPolicy segments = routing::SegmentPolicy::PerLink;
};

Json to_json(const Policy& p);
/// Throws ValidationError on unknown keys or bad values.
Policy policy_from_json(const Json& j);

/// Configuration held by one transceiver.
struct TrxConfig {
  std::string mode_id;
  int channel = -1;
  std::string route_id;
  bool enabled = false;

  bool operator==(const TrxConfig&) const = default;
};

/// Transceiver settings of the network. Byte-stable serialization.
class DeviceRegistry {
 public:
  explicit DeviceRegistry(const netmodel::Topology& t);
  const TrxConfig& get(const std::string& trx_id) const;
  void set(const std::string& trx_id, const TrxConfig& c);
  std::string serialize() const;
  std::string serialize(const std::string& trx_id) const;
  const std::map<std::string, TrxConfig>& all() const { return configs_; }

 private:
  std::map<std::string, TrxConfig> configs_;
};

Json to_json(const TrxConfig& c);
TrxConfig trx_config_from_json(const Json& j);

/// Single owner of spectrum occupancy; claims happen only at commit.
class OccupancyCoordinator {
 public:
  routing::Occupancy snapshot() const;
  /// Throws SpectrumConflict when any link already holds the channel.
  void claim(const std::vector<std::string>& links, int channel);
  void release(const std::vector<std::string>& links, int channel);
  /// Mark every channel of the links occupied.
  void fill(const std::vector<std::string>& links, int channel_count);

 private:
  mutable std::mutex mu_;
  routing::Occupancy occupancy_;
};

struct ProbeMeasurement {
  double snr_meas = 0.0;  // linear, total SNR seen by the probe receiver
  double rx_power_dbm = 0.0;
};

/// Measurement performed by the receiving user on one segment with the probe mode.
using ProbeFn = std::function<ProbeMeasurement(const routing::Segment&, const modes::TrxMode& probe, int channel)>;

struct UserAgentState {
  Party role = Party::UserA;
  State state = State::Idle;
  std::string session_id;
  std::string site_id;
  std::string peer_site_id;
  std::string trx_id;
  std::string serial;
  std::optional<std::string> config_snapshot;  // pre-session TrxConfig serialization
  std::string mode_id;
  std::string error;
};

struct CarrierSession {
  State state = State::Idle;
  std::string session_id;
  std::string site_a;
  std::string site_b;
  Policy policy;
  std::set<Party> registered;
  std::map<Party, std::string> trx_ids;
  bool path_requested = false;
  std::map<Party, modes::ModeCatalog> catalogs;
  std::vector<modes::TrxMode> common;
  std::optional<modes::TrxMode> probe;
  std::optional<routing::RouteCandidate> route;
  std::vector<routing::Segment> segments;
  std::vector<qot::SegmentQot> segment_qot;
  double gsnr_e2e = 0.0;
  double rx_power_dbm = 0.0;
  std::optional<modes::TrxMode> mode;
  std::optional<routing::SpectrumAssignment> spectrum;
  std::set<Party> acks;
  bool occupancy_claimed = false;
  int transitions = 0;
  std::string error_code;
  std::string error_detail;
};

struct UserContext {
  const netmodel::Topology& topology;
  DeviceRegistry& devices;
  ProbeFn probe;
};

struct CarrierContext {
  const netmodel::Topology& topology;
  OccupancyCoordinator& occupancy;
};

struct UserStep {
  UserAgentState state;
  std::vector<ProtocolMessage> out;
};

struct CarrierStep {
  CarrierSession state;
  std::vector<ProtocolMessage> out;
};

UserAgentState make_user_agent(const netmodel::Topology& t, Party role, const std::string& session_id,
                               const std::string& site_id, const std::string& peer_site_id);
CarrierSession make_carrier_session(const std::string& session_id, const std::string& site_a,
                                    const std::string& site_b, const Policy& policy);

/// `inbound` == nullptr is the start event.
UserStep user_agent_step(const UserAgentState& s, const ProtocolMessage* inbound, UserContext& ctx);
CarrierStep carrier_step(const CarrierSession& s, const ProtocolMessage& inbound, CarrierContext& ctx);

struct SessionLogEntry {
  std::uint64_t seq = 0;
  std::uint64_t timestamp = 0;  // logical clock
  std::string direction;        // "UA_A->CARRIER"
  ProtocolMessage message;
  State resulting_state = State::Idle;  // of the receiver
};

Json to_json(const SessionLogEntry& e);
SessionLogEntry log_entry_from_json(const Json& j);

/// Picks the index of the next queued message to deliver.
using Scheduler = std::function<std::size_t(std::size_t queue_size)>;

enum class Verdict { Approve, Rollback };

/// Both user agents, the carrier and the approval gate of one provisioning
/// session, connected by an in-memory ordered channel.
class Session {
 public:
  Session(std::string id, const netmodel::Topology& topology, OccupancyCoordinator& occupancy,
          DeviceRegistry& devices, ProbeFn probe, const std::string& site_a, const std::string& site_b,
          Policy policy);

  /// Emits both registrations and runs until no message is in flight.
  void start(const Scheduler& scheduler = {});
  /// Throws NotPending unless the carrier awaits approval.
  void decide(Verdict verdict, const std::string& reason, const Scheduler& scheduler = {});

  const std::string& id() const { return id_; }
  State state() const { return carrier_.state; }
  const CarrierSession& carrier() const { return carrier_; }
  const UserAgentState& user(Party role) const { return role == Party::UserA ? ua_a_ : ua_b_; }
  const std::vector<SessionLogEntry>& log() const { return log_; }
  std::vector<std::string> log_lines() const;
  Json summary() const;

 private:
  void pump(const Scheduler& scheduler);
  void deliver(const ProtocolMessage& m);

  std::string id_;
  const netmodel::Topology& topology_;
  OccupancyCoordinator& occupancy_;
  DeviceRegistry& devices_;
  ProbeFn probe_;
  UserAgentState ua_a_;
  UserAgentState ua_b_;
  CarrierSession carrier_;
  std::deque<ProtocolMessage> queue_;
  std::vector<SessionLogEntry> log_;
};

struct ProvisioningResult {
  State state = State::Idle;
  std::string error_code;
  std::string error_detail;
  std::vector<SessionLogEntry> log;
};

/// Runs a session to a terminal state or to PendingApproval (without auto-approve).
ProvisioningResult run_provisioning(const netmodel::Topology& topology, OccupancyCoordinator& occupancy,
                                    DeviceRegistry& devices, const ProbeFn& probe, const std::string& site_a,
                                    const std::string& site_b, const Policy& policy,
                                    const std::string& session_id = "s1");

/// Probe measurement from fixed per-segment GSNR values (dB), seen through the
/// receiving transceiver's noise model at the given Rx power.
ProbeFn fixed_probe(std::vector<double> segment_gsnr_db, const qot::TrxNoiseModel& rx_model,
                    double rx_power_dbm = -10.0);

}  // namespace dcx::protocol
