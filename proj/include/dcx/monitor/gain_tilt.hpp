#pragma once

#include <span>
#include <string>
#include <vector>

#include "dcx/monitor/calibration.hpp"

namespace dcx::monitor {

struct GainTiltWeights {
  double lambda = 1.0;       // penalty per dB of mean-GSNR loss
  double lattice_db = 0.1;
  double min_improvement = 1e-9;
  int max_moves = 10000;
};

struct EdfaSetting {
  std::string id;
  double gain_db = 0.0;
  double tilt_db = 0.0;
};

struct GainTiltSetting {
  std::vector<EdfaSetting> settings;
  double flatness_db = 0.0;  // max - min accumulated GSNR at the final EDFA
  double mean_gsnr_db = 0.0;
  double objective = 0.0;
  double baseline_flatness_db = 0.0;
  double baseline_mean_gsnr_db = 0.0;
  std::vector<double> objective_history;  // one entry per accepted move, starting with the baseline
  int evaluations = 0;
};

struct GsnrSpread {
  double flatness_db = 0.0;
  double mean_db = 0.0;
};

/// Spread and mean (dB) of the accumulated GSNR at the last EDFA of the link.
GsnrSpread final_edfa_spread(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm);

/// Coordinate descent over per-EDFA gain and tilt on a lattice anchored at the
/// current settings, maximising -(spread) - lambda * max(0, baseline_mean - mean).
/// Throws InconsistentPriors when calib misses an EDFA and InfeasibleRanges when
/// an actuator range is empty.
GainTiltSetting optimize_gain_tilt(const OpticalLink& link, const CalibrationResult& calib, const ChannelGrid& grid,
                                   std::span<const double> launch_dbm, const GainTiltWeights& weights = {});

/// Link with the optimizer's settings applied.
OpticalLink apply_settings(const OpticalLink& link, const GainTiltSetting& setting);

}  // namespace dcx::monitor
