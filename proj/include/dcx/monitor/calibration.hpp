#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcx/linetwin/twin.hpp"

namespace dcx::monitor {

using linetwin::TelemetrySnapshot;
using netmodel::ChannelGrid;
using netmodel::OpticalLink;

inline constexpr double kMinNfDb = 3.0;
inline constexpr double kMaxNfDb = 15.0;
inline constexpr double kOperatingPointStepDb = 2.0;

struct EdfaCalibration {
  std::string id;
  double nf_db = 0.0;         // at the gain of the first snapshot
  double nf_offset_db = 0.0;  // shift applied to the nominal nf_curve
  double nf_stderr_db = 0.0;
  bool identifiable = true;
};

/// Lumped extra loss of the spans between two consecutive monitor points,
/// attributed to the input connector of the first span in the group.
struct SpanCalibration {
  std::size_t element_index = 0;
  std::vector<std::size_t> lumped_with;  // further spans sharing this estimate
  double loss_db = 0.0;
  double stderr_db = 0.0;
};

struct OsnrResidual {
  std::string operating_point_id;
  int channel = 0;
  double delta_db = 0.0;  // measured - predicted
};

struct CalibrationResult {
  std::string link_id;
  std::vector<EdfaCalibration> edfas;
  std::vector<SpanCalibration> spans;
  std::vector<OsnrResidual> residuals;
  double residual_mean_db = 0.0;
  double residual_rms_db = 0.0;
  double residual_std_db = 0.0;
  std::vector<std::string> identifiability;
  int iterations = 0;

  const EdfaCalibration* find_edfa(std::string_view id) const;
};

/// Telemetry at the operating points used for calibration: the current
/// settings ("op0"), then each EDFA raised and lowered by step_db, clamped to
/// its gain range. Snapshot k carries monitor noise seeded with seed + k.
std::vector<TelemetrySnapshot> collect_operating_points(const OpticalLink& truth, const ChannelGrid& grid,
                                                        std::span<const linetwin::FaultSpec> faults,
                                                        std::span<const double> launch_dbm, double sigma_db,
                                                        std::uint64_t seed, double step_db = kOperatingPointStepDb);

/// Two-stage fit: span losses from total-power monitors, then a per-EDFA
/// multiplicative NF offset from edge OSNR by weighted least squares.
/// `priors` supplies element order, span lengths, fiber coefficients and
/// nominal NF curves; its connector losses are ignored.
/// Throws Underdetermined and InconsistentPriors.
CalibrationResult calibrate_line(std::span<const TelemetrySnapshot> snapshots, const OpticalLink& priors,
                                 const ChannelGrid& grid);

/// Priors with the calibrated losses and NF offsets substituted.
OpticalLink apply_calibration(const OpticalLink& priors, const CalibrationResult& calib);

/// Link with the gain/tilt settings reported in the snapshot.
OpticalLink at_operating_point(const OpticalLink& link, const TelemetrySnapshot& snapshot);

/// Forward model of the telemetry the link would report at the snapshot's
/// operating point and launch.
TelemetrySnapshot predict_telemetry(const OpticalLink& link, const ChannelGrid& grid,
                                    const TelemetrySnapshot& operating_point);

}  // namespace dcx::monitor
