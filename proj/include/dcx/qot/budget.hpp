#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dcx/qot/ber.hpp"
#include "dcx/qot/trx_model.hpp"

namespace dcx::qot {

/// Linear SNR terms; +inf marks an absent term.
struct SnrBudget {
  double snr_ase = std::numeric_limits<double>::infinity();
  double snr_nli = std::numeric_limits<double>::infinity();
  TrxNoiseModel trx;
  double p_in_mw = 1.0;
};

struct QotResult {
  double gsnr = 0.0;
  double gsnr_db = 0.0;
  double snr_total = 0.0;
  double snr_total_db = 0.0;
  double ber = 0.0;
  double q_db = 0.0;  // -inf when the BER is too close to 0.5 for a finite Q
};

QotResult combine_snr(const SnrBudget& b, const ModulationConstants& m);

/// Total SNR of a known GSNR seen through a transceiver at the given Rx power.
double total_snr(double gsnr, const TrxNoiseModel& trx, double p_in_mw);

struct SegmentQot {
  std::string segment_id;
  double snr_meas = 0.0;
  double gsnr = 0.0;
  std::string probe_mode;
};

/// 1/GSNR_e2e = sum of 1/GSNR_n. Throws EmptyList.
double concatenate_gsnr(std::span<const double> gsnrs);
double concatenate_gsnr(std::span<const SegmentQot> segments);

/// Removes the transceiver noise from a measured segment SNR. Throws
/// TrxDominated when the transceiver terms explain the whole measurement.
double deduce_segment_gsnr(double snr_meas, const TrxNoiseModel& trx, double p_in_mw);

struct TrxSample {
  double p_in_mw = 0.0;
  double snr_meas = 0.0;
};

struct TrxFit {
  TrxNoiseModel model;
  double residual_norm = 0.0;
};

/// Least squares of 1/SNR - 1/GSNR = a + b/P_in with a = 1/snr_trx_const and
/// b = 1/snr_p_coeff. `gsnr_known` may be +inf (back-to-back).
TrxFit fit_trx_model(std::span<const TrxSample> samples, double gsnr_known);

}  // namespace dcx::qot
