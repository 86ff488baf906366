#include "dcx/qot/budget.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::qot {

double total_snr(double gsnr, const TrxNoiseModel& trx, double p_in_mw) {
  return 1.0 / (1.0 / gsnr + trx.inverse_snr(p_in_mw));
}

QotResult combine_snr(const SnrBudget& b, const ModulationConstants& m) {
  QotResult r;
  r.gsnr = 1.0 / (1.0 / b.snr_ase + 1.0 / b.snr_nli);
  r.snr_total = total_snr(r.gsnr, b.trx, b.p_in_mw);
  r.gsnr_db = units::lin_to_db(r.gsnr);
  r.snr_total_db = units::lin_to_db(r.snr_total);
  r.ber = ber_from_snr(r.snr_total, m);
  try {
    r.q_db = q_db_from_ber(r.ber);
  } catch (const Error&) {
    r.q_db = -std::numeric_limits<double>::infinity();
  }
  return r;
}

double concatenate_gsnr(std::span<const double> gsnrs) {
  if (gsnrs.empty()) throw Error(Errc::EmptyList, "no segments");
  double inv = 0.0;
  for (double g : gsnrs) {
    if (!(g > 0.0)) throw Error(Errc::OutOfRange, "segment gsnr must be positive");
    inv += 1.0 / g;
  }
  return 1.0 / inv;
}

double concatenate_gsnr(std::span<const SegmentQot> segments) {
  std::vector<double> g;
  g.reserve(segments.size());
  for (const auto& s : segments) g.push_back(s.gsnr);
  return concatenate_gsnr(g);
}

double deduce_segment_gsnr(double snr_meas, const TrxNoiseModel& trx, double p_in_mw) {
  const double inv = 1.0 / snr_meas - trx.inverse_snr(p_in_mw);
  if (!(inv > 0.0)) throw Error(Errc::TrxDominated, "measured SNR explained by transceiver noise");
  return 1.0 / inv;
}

TrxFit fit_trx_model(std::span<const TrxSample> samples, double gsnr_known) {
  std::set<double> powers;
  for (const auto& s : samples) powers.insert(s.p_in_mw);
  if (samples.size() < 2 || powers.size() < 2) throw Error(Errc::Underdetermined, "need two distinct Rx powers");

  // Ordinary least squares on y = a + b x with x = 1/P_in.
  const double n = static_cast<double>(samples.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& s : samples) {
    const double x = 1.0 / s.p_in_mw;
    const double y = 1.0 / s.snr_meas - 1.0 / gsnr_known;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double det = n * sxx - sx * sx;
  const double b = (n * sxy - sx * sy) / det;
  const double a = (sy - b * sx) / n;
  if (!(a > 0.0) || !(b > 0.0)) throw Error(Errc::NonPhysical, "fitted transceiver terms must be positive");

  TrxFit fit;
  fit.model = {1.0 / a, 1.0 / b};
  double rss = 0.0;
  for (const auto& s : samples) {
    const double r = (1.0 / s.snr_meas - 1.0 / gsnr_known) - (a + b / s.p_in_mw);
    rss += r * r;
  }
  fit.residual_norm = std::sqrt(rss);
  return fit;
}

}  // namespace dcx::qot
