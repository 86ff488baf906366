#pragma once

#include <limits>

namespace dcx::qot {

/// Transceiver noise as two additive terms: a constant SNR and a coefficient
/// (1/mW) whose contribution is 1/(snr_p_coeff * P_in). Infinity disables a term.
struct TrxNoiseModel {
  double snr_trx_const = std::numeric_limits<double>::infinity();
  double snr_p_coeff = std::numeric_limits<double>::infinity();

  double inverse_snr(double p_in_mw) const { return 1.0 / snr_trx_const + 1.0 / (snr_p_coeff * p_in_mw); }

  bool operator==(const TrxNoiseModel&) const = default;
};

}  // namespace dcx::qot
