#pragma once

#include <span>
#include <string>
#include <vector>

#include "dcx/monitor/calibration.hpp"

namespace dcx::monitor {

struct OsnrErrorEntry {
  std::string operating_point_id;
  int channel = 0;
  double delta_db = 0.0;  // measured - predicted
  bool outlier = false;
};

struct OsnrErrorReport {
  std::vector<OsnrErrorEntry> entries;
  double mean_db = 0.0;
  double std_db = 0.0;
  double max_abs_db = 0.0;
  double baseline_mean_db = 0.0;
  double baseline_std_db = 0.0;  // floored, used for the outlier rule
  int outlier_count = 0;
};

struct NfRefit {
  std::string id;
  double nf_db = 0.0;
  double deviation_db = 0.0;  // refit minus calibrated
  double residual_rms_db = 0.0;
};

struct NfFaultOptions {
  double outlier_k = 3.0;
  double flag_threshold_db = 1.0;
  // A candidate must explain the data about as well as the best single-EDFA refit.
  double residual_tolerance = 0.1;
  double min_baseline_std_db = 0.01;
};

struct NfFaultResult {
  OsnrErrorReport report;
  std::vector<NfRefit> refits;  // empty when no outliers
  std::vector<std::string> flagged;
};

/// Compares OSNR telemetry against the baseline calibration. Outliers trigger a
/// one-EDFA-at-a-time NF refit; an EDFA is flagged when its refit raises NF by
/// more than flag_threshold_db and that refit is among the best explanations.
/// Throws NoBaseline and Underdetermined (fewer than 2 operating points).
NfFaultResult detect_nf_fault(std::span<const TelemetrySnapshot> snapshots, const CalibrationResult& baseline,
                              const OpticalLink& priors, const ChannelGrid& grid, const NfFaultOptions& options = {});

}  // namespace dcx::monitor
