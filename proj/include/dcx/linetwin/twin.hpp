#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcx/netmodel/topology.hpp"
#include "dcx/qot/link_model.hpp"
#include "dcx/routing/routing.hpp"

namespace dcx::linetwin {

using netmodel::ChannelGrid;
using netmodel::OpticalLink;

inline constexpr double kDefaultGroupIndex = 1.468;
inline constexpr double kDefaultResolutionKm = 0.5;

enum class FaultKind { StepLoss, NfDegradation };

std::string_view to_string(FaultKind kind) noexcept;

struct FaultSpec {
  std::string id;
  FaultKind kind = FaultKind::StepLoss;
  std::string link_id;
  double distance_km = 0.0;  // step_loss
  std::string edfa_id;       // nf_degradation
  double magnitude_db = 0.0;

  bool operator==(const FaultSpec&) const = default;
};

/// Empty when the fault is well formed for this link.
std::string check_fault(const OpticalLink& link, const FaultSpec& fault);

qot::Perturbation perturbation_for(const std::string& link_id, std::span<const FaultSpec> faults);

struct EdfaTotals {
  std::string id;
  double total_in_dbm = 0.0;
  double total_out_dbm = 0.0;
};

/// Ground truth of one propagation. Per-channel powers per element live in
/// `trace` (mW); the helpers below give the dB view.
struct LineState {
  qot::LinkTrace trace;
  double length_km = 0.0;
  std::vector<EdfaTotals> edfa_totals;

  std::vector<double> element_in_dbm(std::size_t element) const;
  std::vector<double> element_out_dbm(std::size_t element) const;
  std::vector<double> output_dbm() const;
};

LineState propagate(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm,
                    std::span<const FaultSpec> faults = {});

struct PowerProfile {
  std::vector<double> distance_km;
  std::vector<double> relative_power_db;
  double resolution_km = kDefaultResolutionKm;
  std::optional<int> channel;  // nullopt: aggregate over all channels
  double noise_sigma_db = 0.0;

  std::size_t size() const { return distance_km.size(); }
};

/// Longitudinal signal power relative to the launch, sampled every
/// `resolution_km` from 0 to the link length. A sample at x includes every
/// lumped element located at positions <= x.
PowerProfile synthesize_profile(const OpticalLink& link, const LineState& state, double resolution_km,
                                double noise_sigma_db, std::uint64_t seed, std::optional<int> channel = std::nullopt);

/// Header `distance_km,relative_power_db`, one row per sample.
std::string profile_csv(const PowerProfile& profile);

struct EdfaTelemetry {
  std::string id;
  double gain_db = 0.0;
  double tilt_db = 0.0;
  std::optional<double> total_in_dbm;
  std::optional<double> total_out_dbm;
};

struct OsaChannel {
  int channel = 0;
  double power_dbm = 0.0;
  double osnr_db = 0.0;  // 12.5 GHz reference
};

struct TelemetrySnapshot {
  std::string operating_point_id;
  std::uint64_t timestamp = 0;
  std::vector<EdfaTelemetry> edfas;
  std::vector<OsaChannel> rx_osa;
  std::vector<double> tx_spectrum_dbm;
};

TelemetrySnapshot snapshot_telemetry(const OpticalLink& link, const LineState& state,
                                     const std::string& operating_point_id, std::uint64_t timestamp = 0);

/// Independent Gaussian error (dB) on every monitor reading.
TelemetrySnapshot add_monitor_noise(TelemetrySnapshot snapshot, double sigma_db, std::uint64_t seed);

/// Active faults keyed by id. Single writer; callers serialise mutation.
class FaultRegistry {
 public:
  std::string set_fault(const OpticalLink& link, FaultSpec fault);
  void clear_fault(const std::string& id);
  std::vector<FaultSpec> active(const std::string& link_id) const;
  std::vector<FaultSpec> all() const;

 private:
  std::map<std::string, FaultSpec> faults_;
  std::uint64_t next_id_ = 1;
};

/// Mutable twin of the line system: ground-truth links, current amplifier
/// settings and active faults.
class LineTwin {
 public:
  explicit LineTwin(const netmodel::Topology& topology);

  const OpticalLink& link(const std::string& id) const;
  ChannelGrid grid_for(const std::string& link_id) const;
  void set_edfa(const std::string& link_id, const std::string& edfa_id, double gain_db, double tilt_db);

  FaultRegistry& faults() { return faults_; }
  const FaultRegistry& faults() const { return faults_; }

  LineState propagate(const std::string& link_id, std::span<const double> launch_dbm) const;
  LineState propagate_flat(const std::string& link_id, double launch_dbm) const;

 private:
  ChannelGrid grid_;
  std::map<std::string, OpticalLink> links_;
  FaultRegistry faults_;
};

/// rtt = 2 L n / c + offset, in microseconds.
double measure_roundtrip_us(double length_km, double processing_offset_us = 0.0,
                            double n_group = kDefaultGroupIndex);
double measure_roundtrip_us(const netmodel::Topology& t, const routing::RouteCandidate& route,
                            double processing_offset_us = 0.0, double n_group = kDefaultGroupIndex);

}  // namespace dcx::linetwin
