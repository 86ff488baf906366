#include "dcx/modes/modes.hpp"

#include <algorithm>
#include <tuple>

#include "dcx/error.hpp"
#include "dcx/qot/budget.hpp"
#include "dcx/units.hpp"

namespace dcx::modes {

bool TrxMode::same_capability(const TrxMode& o) const {
  return bitrate_gbps == o.bitrate_gbps && modulation == o.modulation && symbol_rate_gbaud == o.symbol_rate_gbaud &&
         fec == o.fec;
}

TrxMode make_mode(const netmodel::ModeSpec& spec) {
  TrxMode m;
  m.id = spec.id;
  m.bitrate_gbps = spec.bitrate_gbps;
  m.modulation = spec.modulation;
  m.symbol_rate_gbaud = spec.symbol_rate_gbaud;
  m.fec = spec.fec;
  m.fec_threshold_ber = spec.fec_threshold_ber;
  m.required_snr = qot::snr_from_ber(spec.fec_threshold_ber, qot::constants_for(spec.modulation));
  m.min_rx_dbm = spec.min_rx_dbm;
  m.max_rx_dbm = spec.max_rx_dbm;
  return m;
}

const TrxMode* ModeCatalog::find(const std::string& mode_id) const {
  auto it = std::find_if(modes.begin(), modes.end(), [&](const TrxMode& m) { return m.id == mode_id; });
  return it == modes.end() ? nullptr : &*it;
}

ModeCatalog make_catalog(const std::string& trx_id, const netmodel::CatalogSpec& spec) {
  ModeCatalog c;
  c.trx_id = trx_id;
  c.probe_mode_id = spec.probe_mode_id;
  for (const auto& m : spec.modes) c.modes.push_back(make_mode(m));
  return c;
}

ModeCatalog catalog_for(const netmodel::Topology& t, const std::string& trx_id) {
  const auto* trx = t.find_trx(trx_id);
  if (!trx) throw Error(Errc::NotFound, "trx " + trx_id);
  const auto* spec = t.find_catalog(trx->catalog_id);
  if (!spec) throw Error(Errc::NotFound, "catalog " + trx->catalog_id);
  return make_catalog(trx_id, *spec);
}

void sort_modes(std::vector<TrxMode>& modes) {
  std::sort(modes.begin(), modes.end(), [](const TrxMode& a, const TrxMode& b) {
    return std::tuple(-a.bitrate_gbps, a.required_snr, a.id) < std::tuple(-b.bitrate_gbps, b.required_snr, b.id);
  });
}

std::vector<TrxMode> intersect_catalogs(const ModeCatalog& a, const ModeCatalog& b) {
  std::vector<TrxMode> out;
  for (const auto& m : a.modes) {
    const bool shared = std::any_of(b.modes.begin(), b.modes.end(), [&](const TrxMode& o) { return m.same_capability(o); });
    const bool dup = std::any_of(out.begin(), out.end(), [&](const TrxMode& o) { return m.same_capability(o); });
    if (shared && !dup) out.push_back(m);
  }
  sort_modes(out);
  return out;
}

TrxMode select_mode(std::vector<TrxMode> common, double gsnr_est, const qot::TrxNoiseModel& trx, double p_in_mw,
                    double margin_db) {
  if (common.empty()) throw Error(Errc::NoFeasibleMode, "no common modes");
  if (margin_db < 0.0) throw Error(Errc::OutOfRange, "negative margin");
  sort_modes(common);
  const double snr_db = units::lin_to_db(qot::total_snr(gsnr_est, trx, p_in_mw));
  const double p_in_dbm = units::mw_to_dbm(p_in_mw);
  for (const auto& m : common) {
    const bool snr_ok = snr_db - units::lin_to_db(m.required_snr) >= margin_db;
    const bool power_ok = p_in_dbm >= m.min_rx_dbm && p_in_dbm <= m.max_rx_dbm;
    if (snr_ok && power_ok) return m;
  }
  throw Error(Errc::NoFeasibleMode, "no mode clears margin " + std::to_string(margin_db) + " dB");
}

TrxMode probe_plan(const ModeCatalog& a, const ModeCatalog& b) {
  auto common = intersect_catalogs(a, b);
  if (common.empty()) throw Error(Errc::NoCommonMode, a.trx_id + "/" + b.trx_id);
  const auto* pa = a.find(a.probe_mode_id);
  const auto* pb = b.find(b.probe_mode_id);
  if (pa && pb && pa->same_capability(*pb)) {
    for (const auto& m : common) {
      if (m.same_capability(*pa)) return m;
    }
  }
  return *std::max_element(common.begin(), common.end(),
                           [](const TrxMode& x, const TrxMode& y) { return x.required_snr < y.required_snr; });
}

}  // namespace dcx::modes
