#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dcx/qot/trx_model.hpp"

namespace dcx::netmodel {

enum class SiteKind { UDC, SDC, POP };
enum class LinkKind { AAL, CarrierLink };
enum class Modulation { QPSK, QAM16 };

std::string_view to_string(SiteKind kind) noexcept;
std::string_view to_string(LinkKind kind) noexcept;
std::string_view to_string(Modulation m) noexcept;

struct Site {
  std::string id;
  SiteKind kind = SiteKind::SDC;
  bool hosts_pop = false;
  std::vector<std::string> trx_ids;

  bool operator==(const Site&) const = default;
};

struct TrxUnit {
  std::string id;
  std::string serial;
  std::string site_id;
  std::string catalog_id;
  std::string noise_model_id;

  bool operator==(const TrxUnit&) const = default;
};

struct FiberSpan {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.2;
  double dispersion_ps_nm_km = 16.7;
  double gamma_per_w_km = 1.3;
  double conn_in_db = 0.0;
  double conn_out_db = 0.0;
  // Extra loss (dB, peak-to-peak) rising linearly with channel frequency.
  double loss_tilt_db = 0.0;

  double total_loss_db() const { return length_km * attenuation_db_per_km + conn_in_db + conn_out_db; }

  bool operator==(const FiberSpan&) const = default;
};

struct NfPoint {
  double gain_db = 0.0;
  double nf_db = 0.0;

  bool operator==(const NfPoint&) const = default;
};

struct DbRange {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const DbRange&) const = default;
};

struct MonitorFlags {
  bool input = true;
  bool output = true;

  bool operator==(const MonitorFlags&) const = default;
};

struct EdfaUnit {
  std::string id;
  double gain_db = 0.0;
  double tilt_db = 0.0;
  std::vector<NfPoint> nf_curve;
  DbRange gain_range_db;
  DbRange tilt_range_db;
  double max_total_out_dbm = 23.0;
  MonitorFlags monitors;

  /// Noise figure at the given gain; piecewise linear, clamped to the end segments.
  double nf_at(double gain_db) const;

  bool operator==(const EdfaUnit&) const = default;
};

struct RoadmUnit {
  std::string id;
  double insertion_loss_db = 0.0;

  bool operator==(const RoadmUnit&) const = default;
};

using LineElement = std::variant<FiberSpan, EdfaUnit, RoadmUnit>;

struct OpticalLink {
  std::string id;
  std::array<std::string, 2> endpoints;
  LinkKind kind = LinkKind::CarrierLink;
  std::vector<LineElement> elements;
  bool params_known = true;

  double length_km() const;
  std::vector<const EdfaUnit*> edfas() const;
  EdfaUnit* find_edfa(std::string_view edfa_id);
  const EdfaUnit* find_edfa(std::string_view edfa_id) const;
  bool connects(std::string_view a, std::string_view b) const;

  bool operator==(const OpticalLink&) const = default;
};

struct ChannelGrid {
  double center_thz = 193.4;
  double spacing_ghz = 75.0;
  int count = 64;
  double symbol_rate_gbaud = 64.0;

  double frequency_thz(int channel) const;
  /// Position of the channel across the band in [-0.5, 0.5]; 0 for a single channel.
  double normalized_offset(int channel) const;
  double occupied_bandwidth_ghz() const { return (count - 1) * spacing_ghz + symbol_rate_gbaud; }
  ChannelGrid single_channel() const;

  bool operator==(const ChannelGrid&) const = default;
};

struct ModeSpec {
  std::string id;
  double bitrate_gbps = 0.0;
  Modulation modulation = Modulation::QAM16;
  double symbol_rate_gbaud = 0.0;
  std::string fec;
  double fec_threshold_ber = 2.0e-2;
  double min_rx_dbm = -20.0;
  double max_rx_dbm = 0.0;

  bool operator==(const ModeSpec&) const = default;
};

struct CatalogSpec {
  std::string id;
  std::string probe_mode_id;
  std::vector<ModeSpec> modes;

  bool operator==(const CatalogSpec&) const = default;
};

struct TrxModelSpec {
  std::string id;
  qot::TrxNoiseModel model;

  bool operator==(const TrxModelSpec&) const = default;
};

/// Immutable after load; mutation means constructing a new Topology.
struct Topology {
  std::vector<Site> sites;
  std::vector<TrxUnit> trxs;
  std::vector<OpticalLink> links;
  ChannelGrid grid;
  std::set<std::string> allowlist;
  std::vector<CatalogSpec> catalogs;
  std::vector<TrxModelSpec> trx_models;

  const Site* find_site(std::string_view id) const;
  const TrxUnit* find_trx(std::string_view id) const;
  const TrxUnit* find_trx_by_serial(std::string_view serial) const;
  const OpticalLink* find_link(std::string_view id) const;
  const CatalogSpec* find_catalog(std::string_view id) const;
  const TrxModelSpec* find_trx_model(std::string_view id) const;

  /// Grid a link actually carries: AALs carry one data channel.
  ChannelGrid grid_for(const OpticalLink& link) const;

  bool operator==(const Topology&) const = default;
};

struct Violation {
  std::string entity;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

Topology load_topology(std::string_view text);
std::string serialize_topology(const Topology& t);
std::vector<Violation> validate_topology(const Topology& t);

/// Links whose endpoint set is {a, b}, ordered by id.
std::vector<const OpticalLink*> links_between(const Topology& t, std::string_view a, std::string_view b);

}  // namespace dcx::netmodel
