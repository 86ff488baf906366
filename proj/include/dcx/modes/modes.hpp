#pragma once

#include <string>
#include <vector>

#include "dcx/netmodel/topology.hpp"
#include "dcx/qot/ber.hpp"
#include "dcx/qot/trx_model.hpp"

namespace dcx::modes {

using netmodel::Modulation;

inline constexpr double kDefaultMarginDb = 1.0;
inline constexpr double kDefaultFecThresholdBer = 2.0e-2;

struct TrxMode {
  std::string id;
  double bitrate_gbps = 0.0;
  Modulation modulation = Modulation::QAM16;
  double symbol_rate_gbaud = 0.0;
  std::string fec;
  double fec_threshold_ber = kDefaultFecThresholdBer;
  double required_snr = 0.0;  // linear, always derived from the FEC threshold
  double min_rx_dbm = 0.0;
  double max_rx_dbm = 0.0;

  /// Interoperability key: vendor-specific ids are ignored.
  bool same_capability(const TrxMode& other) const;
};

TrxMode make_mode(const netmodel::ModeSpec& spec);

struct ModeCatalog {
  std::string trx_id;
  std::vector<TrxMode> modes;
  std::string probe_mode_id;

  const TrxMode* find(const std::string& mode_id) const;
};

ModeCatalog make_catalog(const std::string& trx_id, const netmodel::CatalogSpec& spec);
/// Catalog of a transceiver declared in the topology.
ModeCatalog catalog_for(const netmodel::Topology& t, const std::string& trx_id);

/// Bitrate descending, then required SNR ascending, then id.
void sort_modes(std::vector<TrxMode>& modes);

/// Modes of `a` that have a capability match in `b`, in canonical order.
std::vector<TrxMode> intersect_catalogs(const ModeCatalog& a, const ModeCatalog& b);

/// First mode in canonical order whose predicted total SNR clears the required
/// SNR by margin_db and whose Rx window holds p_in. Throws NoFeasibleMode.
TrxMode select_mode(std::vector<TrxMode> common, double gsnr_est, const qot::TrxNoiseModel& trx, double p_in_mw,
                    double margin_db = kDefaultMarginDb);

/// Shared probe mode when both catalogs name the same capability, otherwise the
/// common mode with the highest required SNR. Throws NoCommonMode.
TrxMode probe_plan(const ModeCatalog& a, const ModeCatalog& b);

}  // namespace dcx::modes
