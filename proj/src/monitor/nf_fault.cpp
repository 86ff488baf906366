#include "dcx/monitor/nf_fault.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::monitor {

using netmodel::EdfaUnit;

namespace {

struct Prediction {
  std::vector<std::vector<double>> inv_osnr_by_edfa;  // [edfa][channel], 12.5 GHz reference
  std::vector<double> osnr_db;
};

Prediction predict(const OpticalLink& link, const ChannelGrid& grid, const TelemetrySnapshot& s) {
  const auto at = at_operating_point(link, s);
  const auto trace = qot::trace_link(at, grid, s.tx_spectrum_dbm);
  const double to_ref = units::kOsnrReferenceGhz / grid.spacing_ghz;
  Prediction p;
  p.osnr_db = qot::osnr_db(trace);
  for (const auto& rec : trace.elements) {
    if (rec.kind != qot::ElementKind::Edfa) continue;
    std::vector<double> share(rec.ase_added_mw.size());
    for (std::size_t i = 0; i < share.size(); ++i) share[i] = rec.ase_added_mw[i] / rec.out.sig_mw[i] * to_ref;
    p.inv_osnr_by_edfa.push_back(std::move(share));
  }
  return p;
}

OpticalLink shift_nf(const OpticalLink& link, const std::string& id, double delta_db) {
  OpticalLink out = link;
  for (auto& p : out.find_edfa(id)->nf_curve) p.nf_db += delta_db;
  return out;
}

double rms_error_db(std::span<const TelemetrySnapshot> snapshots, const OpticalLink& link, const ChannelGrid& grid,
                    double bias_db) {
  double sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto& s : snapshots) {
    const auto p = predict(link, grid, s);
    for (std::size_t i = 0; i < s.rx_osa.size(); ++i) {
      const double d = s.rx_osa[i].osnr_db - p.osnr_db[i] - bias_db;
      sum_sq += d * d;
      ++n;
    }
  }
  return std::sqrt(sum_sq / static_cast<double>(n));
}

// Scalar NF multiplier for one EDFA with the rest held at baseline, by relative
// least squares on inverse OSNR; iterated for gain-control coupling.
double refit_multiplier(std::span<const TelemetrySnapshot> snapshots, const OpticalLink& link,
                        const ChannelGrid& grid, std::size_t edfa_index, const std::string& id) {
  double total = 1.0;
  for (int it = 0; it < 50; ++it) {
    const auto trial = shift_nf(link, id, units::lin_to_db(total));
    double num = 0.0, den = 0.0;
    for (const auto& s : snapshots) {
      const auto p = predict(trial, grid, s);
      for (std::size_t i = 0; i < s.rx_osa.size(); ++i) {
        const double y = 1.0 / units::db_to_lin(s.rx_osa[i].osnr_db);
        const double a = p.inv_osnr_by_edfa[edfa_index][i];
        double b = 0.0;
        for (std::size_t k = 0; k < p.inv_osnr_by_edfa.size(); ++k) {
          if (k != edfa_index) b += p.inv_osnr_by_edfa[k][i];
        }
        num += (a / y) * (1.0 - b / y);
        den += (a / y) * (a / y);
      }
    }
    const double u = den > 0.0 ? std::max(num / den, 1e-3) : 1.0;
    total *= u;
    if (std::abs(std::log(u)) < 1e-12) break;
  }
  return total;
}

}  // namespace

NfFaultResult detect_nf_fault(std::span<const TelemetrySnapshot> snapshots, const CalibrationResult& baseline,
                              const OpticalLink& priors, const ChannelGrid& grid, const NfFaultOptions& options) {
  const auto amps = priors.edfas();
  if (baseline.edfas.empty() && !amps.empty()) throw Error(Errc::NoBaseline, "no baseline calibration for " + priors.id);
  for (const auto* amp : amps) {
    if (!baseline.find_edfa(amp->id)) throw Error(Errc::NoBaseline, "baseline lacks " + amp->id);
  }
  if (snapshots.size() < 2) throw Error(Errc::Underdetermined, "need at least 2 operating points");

  const auto calibrated = apply_calibration(priors, baseline);
  NfFaultResult result;
  auto& report = result.report;
  report.baseline_mean_db = baseline.residual_mean_db;
  report.baseline_std_db = std::max(baseline.residual_std_db, options.min_baseline_std_db);

  double sum = 0.0, sum_sq = 0.0;
  for (const auto& s : snapshots) {
    if (s.rx_osa.size() != static_cast<std::size_t>(grid.count)) {
      throw Error(Errc::InconsistentPriors, "snapshot " + s.operating_point_id + " does not match the grid");
    }
    const auto p = predict(calibrated, grid, s);
    for (std::size_t i = 0; i < s.rx_osa.size(); ++i) {
      OsnrErrorEntry e{s.operating_point_id, static_cast<int>(i), s.rx_osa[i].osnr_db - p.osnr_db[i], false};
      e.outlier = std::abs(e.delta_db - report.baseline_mean_db) > options.outlier_k * report.baseline_std_db;
      report.outlier_count += e.outlier ? 1 : 0;
      report.max_abs_db = std::max(report.max_abs_db, std::abs(e.delta_db));
      sum += e.delta_db;
      sum_sq += e.delta_db * e.delta_db;
      report.entries.push_back(std::move(e));
    }
  }
  const auto n = static_cast<double>(report.entries.size());
  report.mean_db = sum / n;
  report.std_db = std::sqrt(std::max(0.0, sum_sq / n - report.mean_db * report.mean_db));
  if (report.outlier_count == 0) return result;

  double best_rms = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const auto& id = amps[k]->id;
    const double mult = refit_multiplier(snapshots, calibrated, grid, k, id);
    NfRefit r;
    r.id = id;
    r.deviation_db = units::lin_to_db(mult);
    r.nf_db = baseline.find_edfa(id)->nf_db + r.deviation_db;
    r.residual_rms_db = rms_error_db(snapshots, shift_nf(calibrated, id, r.deviation_db), grid,
                                     report.baseline_mean_db);
    best_rms = std::min(best_rms, r.residual_rms_db);
    result.refits.push_back(std::move(r));
  }
  for (const auto& r : result.refits) {
    if (r.deviation_db > options.flag_threshold_db &&
        r.residual_rms_db <= best_rms * (1.0 + options.residual_tolerance)) {
      result.flagged.push_back(r.id);
    }
  }
  return result;
}

}  // namespace dcx::monitor
