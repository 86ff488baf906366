#include "dcx/qot/ber.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "dcx/error.hpp"

namespace dcx::qot {

ModulationConstants constants_for(Modulation m) {
  if (m == Modulation::QPSK) return {Modulation::QPSK, 0.5, 0.5};
  return {Modulation::QAM16, 3.0 / 8.0, 1.0 / 10.0};
}

double ber_from_snr(double snr, const ModulationConstants& m) {
  if (snr < 0.0) throw Error(Errc::OutOfRange, "snr < 0");
  return m.kappa1 * std::erfc(std::sqrt(m.kappa2 * snr));
}

double snr_from_ber(double ber, const ModulationConstants& m) {
  if (!(ber > 0.0) || !(ber < m.kappa1)) throw Error(Errc::OutOfRange, "ber=" + std::to_string(ber));
  double lo = 0.0;
  double hi = 1e6;
  if (ber_from_snr(hi, m) > ber) throw Error(Errc::OutOfRange, "ber below bracket");
  // ber_from_snr is strictly decreasing; stop on a relative residual of 1e-12
  // or when the bracket collapses to machine precision.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double resid = ber_from_snr(mid, m) - ber;
    if (std::abs(resid) <= 1e-12 * ber) return mid;
    if (resid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

double q_db_from_ber(double ber) {
  if (!(ber > 0.0) || !(ber < 0.5)) throw Error(Errc::OutOfRange, "ber=" + std::to_string(ber));
  const double q = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * ber);
  if (q < 1e-6) throw Error(Errc::OutOfRange, "Q below 1e-6");
  return 20.0 * std::log10(q);
}

double ber_from_q_db(double q_db) {
  const double q = std::pow(10.0, q_db / 20.0);
  return 0.5 * std::erfc(q / std::sqrt(2.0));
}

}  // namespace dcx::qot
