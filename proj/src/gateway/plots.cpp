#include "dcx/gateway/plots.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "dcx/error.hpp"
#include "dcx/qot/budget.hpp"
#include "dcx/qot/link_model.hpp"
#include "dcx/units.hpp"

namespace dcx::gateway {

namespace {

constexpr std::string_view kNames[] = {"profile", "accumulated_gsnr", "q_vs_power", "osnr_error_hist"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

const netmodel::OpticalLink& target_link(const ControlPlane& plane, const std::string& target) {
  const auto* link = plane.topology().find_link(target);
  if (!link) throw Error(Errc::UnknownTarget, target);
  return *link;
}

PlotTable accumulated_gsnr_table(const ControlPlane& plane, const std::string& link_id) {
  const auto j = plane.gsnr(link_id);
  PlotTable t{"edfa_id,channel,accumulated_gsnr_db\n", 0};
  for (const auto& a : j["accumulated"]) {
    const auto& values = a["gsnr_db"];
    for (std::size_t ch = 0; ch < values.size(); ++ch) {
      t.text += a["edfa_id"].get<std::string>() + "," + std::to_string(ch) + "," + fmt(values[ch].get<double>()) + "\n";
      ++t.rows;
    }
  }
  return t;
}

// Q of the centre channel for a flat launch, 16QAM, through the first declared
// transceiver noise model at 0 dBm received power. The sweep lifts the
// amplifier output limit so that every row is defined.
PlotTable q_vs_power_table(const ControlPlane& plane, const std::string& link_id, const PlotOptions& o) {
  if (!(o.p_step_db > 0.0) || o.p_max_dbm < o.p_min_dbm) throw Error(Errc::OutOfRange, "power sweep");
  const auto twin = plane.twin();
  auto link = twin.link(link_id);
  for (auto& el : link.elements) {
    if (auto* amp = std::get_if<netmodel::EdfaUnit>(&el)) amp->max_total_out_dbm = units::kInfinity;
  }
  const auto grid = twin.grid_for(link_id);
  const auto faults = twin.faults().active(link_id);
  const auto pert = linetwin::perturbation_for(link_id, faults);
  const auto centre = static_cast<std::size_t>(grid.count / 2);
  const auto& models = plane.topology().trx_models;
  const auto m = qot::constants_for(netmodel::Modulation::QAM16);
  const int n = static_cast<int>(std::floor((o.p_max_dbm - o.p_min_dbm) / o.p_step_db + 1e-9)) + 1;
  PlotTable t{"p_in_dbm,q_db\n", 0};
  for (int k = 0; k < n; ++k) {
    const double p = o.p_min_dbm + k * o.p_step_db;
    std::vector<double> launch(static_cast<std::size_t>(grid.count), p);
    const double g = qot::gsnr(qot::trace_link(link, grid, launch, pert)).at(centre);
    const double snr = models.empty() ? g : qot::total_snr(g, models.front().model, 1.0);
    t.text += fmt(p) + "," + fmt(qot::q_db_from_ber(qot::ber_from_snr(snr, m))) + "\n";
    ++t.rows;
  }
  return t;
}

}  // namespace

PlotKind parse_plot_kind(std::string_view name) {
  for (int k = 0; k < 4; ++k) {
    if (kNames[k] == name) return static_cast<PlotKind>(k);
  }
  throw Error(Errc::ValidationError, "plot kind " + std::string(name));
}

std::string_view to_string(PlotKind kind) noexcept { return kNames[static_cast<int>(kind)]; }

PlotTable osnr_error_histogram(std::span<const double> deltas_db, double bin_db) {
  if (!(bin_db > 0.0)) throw Error(Errc::OutOfRange, "bin width");
  PlotTable t{"bin_center_db,count\n", 0};
  if (deltas_db.empty()) return t;
  auto bin_of = [&](double v) { return static_cast<long>(std::floor(v / bin_db)); };
  long lo = bin_of(deltas_db[0]), hi = lo;
  for (double v : deltas_db) {
    lo = std::min(lo, bin_of(v));
    hi = std::max(hi, bin_of(v));
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(hi - lo + 1), 0);
  for (double v : deltas_db) ++counts[static_cast<std::size_t>(bin_of(v) - lo)];
  for (std::size_t i = 0; i < counts.size(); ++i) {
    t.text += fmt((static_cast<double>(lo + static_cast<long>(i)) + 0.5) * bin_db) + "," + std::to_string(counts[i]) + "\n";
    ++t.rows;
  }
  return t;
}

PlotTable plot_table(const ControlPlane& plane, PlotKind kind, const std::string& target, const PlotOptions& options) {
  switch (kind) {
    case PlotKind::Profile: {
      target_link(plane, target);
      const auto p = plane.profile(target, options.resolution_km, options.noise_sigma_db);
      return {linetwin::profile_csv(p), p.size()};
    }
    case PlotKind::AccumulatedGsnr:
      target_link(plane, target);
      return accumulated_gsnr_table(plane, target);
    case PlotKind::QVsPower:
      target_link(plane, target);
      return q_vs_power_table(plane, target, options);
    case PlotKind::OsnrErrorHist: {
      monitor::CalibrationResult c;
      try {
        c = plane.calibration_result(target);
      } catch (const Error& e) {
        if (e.code() == Errc::NotFound) throw Error(Errc::UnknownTarget, target);
        throw;
      }
      std::vector<double> deltas;
      for (const auto& r : c.residuals) deltas.push_back(r.delta_db);
      return osnr_error_histogram(deltas, options.hist_bin_db);
    }
  }
  throw Error(Errc::UnknownTarget, target);
}

void write_table(const PlotTable& table, const std::filesystem::path& out) {
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::NotFound, "cannot write " + out.string());
  f << table.text;
}

PlotTable emit_plot_data(const ControlPlane& plane, PlotKind kind, const std::string& target,
                         const std::filesystem::path& out, const PlotOptions& options) {
  auto t = plot_table(plane, kind, target, options);
  write_table(t, out);
  return t;
}

}  // namespace dcx::gateway
