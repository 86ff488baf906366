#pragma once

#include "dcx/netmodel/topology.hpp"

namespace dcx::qot {

using netmodel::Modulation;

/// BER = kappa1 * erfc(sqrt(kappa2 * SNR)), SNR per symbol.
struct ModulationConstants {
  Modulation modulation = Modulation::QAM16;
  double kappa1 = 3.0 / 8.0;
  double kappa2 = 1.0 / 10.0;
};

/// 16QAM: (3/8, 1/10); QPSK: (1/2, 1/2).
ModulationConstants constants_for(Modulation m);

double ber_from_snr(double snr, const ModulationConstants& m);

/// Monotone bisection on [0, 1e6]; throws OutOfRange unless 0 < ber < kappa1.
double snr_from_ber(double ber, const ModulationConstants& m);

/// Q (dB) = 20 log10(sqrt(2) * erfcinv(2 ber)); throws OutOfRange outside (0, 0.5)
/// or when the linear Q collapses below 1e-6.
double q_db_from_ber(double ber);
double ber_from_q_db(double q_db);

}  // namespace dcx::qot
