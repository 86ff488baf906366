#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "dcx/gateway/control_plane.hpp"

namespace dcx::gateway {

enum class PlotKind { Profile, AccumulatedGsnr, QVsPower, OsnrErrorHist };

/// Throws ValidationError for unknown names.
PlotKind parse_plot_kind(std::string_view name);
std::string_view to_string(PlotKind kind) noexcept;

struct PlotOptions {
  std::optional<double> resolution_km;
  std::optional<double> noise_sigma_db;
  double p_min_dbm = -4.0;
  double p_max_dbm = 6.0;
  double p_step_db = 0.5;
  double hist_bin_db = 0.1;
};

struct PlotTable {
  std::string text;  // header line plus one line per row
  std::size_t rows = 0;
};

/// Targets: a link id for profile, accumulated_gsnr and q_vs_power; a
/// calibration id for osnr_error_hist. Throws UnknownTarget.
PlotTable plot_table(const ControlPlane& plane, PlotKind kind, const std::string& target,
                     const PlotOptions& options = {});

/// `bin_center_db,count` over bins of width bin_db covering every value.
PlotTable osnr_error_histogram(std::span<const double> deltas_db, double bin_db = 0.1);

/// Writes plot_table to `out`.
PlotTable emit_plot_data(const ControlPlane& plane, PlotKind kind, const std::string& target,
                         const std::filesystem::path& out, const PlotOptions& options = {});

void write_table(const PlotTable& table, const std::filesystem::path& out);

}  // namespace dcx::gateway
