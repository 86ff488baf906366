#include "dcx/monitor/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::monitor {

using netmodel::EdfaUnit;
using netmodel::FiberSpan;

namespace {

constexpr std::size_t kLinkInput = static_cast<std::size_t>(-1);
constexpr std::size_t kReceiver = static_cast<std::size_t>(-2);

// Spans between two consecutive total-power monitor points. Points are the
// link input, EDFA input/output ports and the receiver OSA.
struct SpanGroup {
  std::size_t upstream = kLinkInput;  // EDFA element index or kLinkInput
  std::size_t downstream = kReceiver;  // EDFA element index or kReceiver
  std::vector<std::size_t> spans;
};

std::vector<SpanGroup> span_groups(const OpticalLink& link) {
  std::vector<SpanGroup> groups;
  SpanGroup current;
  for (std::size_t e = 0; e < link.elements.size(); ++e) {
    if (std::holds_alternative<FiberSpan>(link.elements[e])) {
      current.spans.push_back(e);
    } else if (std::holds_alternative<EdfaUnit>(link.elements[e])) {
      current.downstream = e;
      if (!current.spans.empty()) groups.push_back(current);
      current = SpanGroup{e, kReceiver, {}};
    }
  }
  if (!current.spans.empty()) groups.push_back(current);
  return groups;
}

double sum_mw(const std::vector<double>& dbm) {
  double total = 0.0;
  for (double p : dbm) total += units::dbm_to_mw(p);
  return total;
}

std::vector<double> launch_of(const TelemetrySnapshot& s) { return s.tx_spectrum_dbm; }

struct Working {
  OpticalLink link;                 // structural priors with current estimates
  std::vector<std::size_t> edfa_elements;
  std::vector<double> nf_mult;      // multiplicative NF offsets, linear
};

void set_group_loss(OpticalLink& link, const SpanGroup& g, double loss_db) {
  std::get<FiberSpan>(link.elements[g.spans.front()]).conn_in_db = loss_db;
}

void set_nf_offsets(OpticalLink& link, const OpticalLink& priors, const Working& w) {
  for (std::size_t k = 0; k < w.edfa_elements.size(); ++k) {
    const auto e = w.edfa_elements[k];
    auto& amp = std::get<EdfaUnit>(link.elements[e]);
    const auto& nominal = std::get<EdfaUnit>(priors.elements[e]);
    const double offset = units::lin_to_db(w.nf_mult[k]);
    for (std::size_t p = 0; p < amp.nf_curve.size(); ++p) amp.nf_curve[p].nf_db = nominal.nf_curve[p].nf_db + offset;
  }
}

double measured_total(const TelemetrySnapshot& s, std::size_t point, bool input_port, const OpticalLink& link,
                      const ChannelGrid& grid) {
  if (point == kLinkInput) return sum_mw(s.tx_spectrum_dbm);
  if (point == kReceiver) {
    const double to_slot = grid.spacing_ghz / units::kOsnrReferenceGhz;
    double total = 0.0;
    for (const auto& row : s.rx_osa) {
      const double sig = units::dbm_to_mw(row.power_dbm);
      total += sig * (1.0 + to_slot / units::db_to_lin(row.osnr_db));
    }
    return total;
  }
  const auto& id = std::get<EdfaUnit>(link.elements[point]).id;
  for (const auto& e : s.edfas) {
    if (e.id == id) return units::dbm_to_mw(input_port ? *e.total_in_dbm : *e.total_out_dbm);
  }
  throw Error(Errc::InconsistentPriors, "snapshot lacks " + id);
}

double model_total(const qot::LinkTrace& t, std::size_t point, bool input_port) {
  if (point == kLinkInput) return t.input.total_mw();
  if (point == kReceiver) return t.output().total_mw();
  const auto& rec = t.elements[point];
  return input_port ? rec.in.total_mw() : rec.out.total_mw();
}

void check_inputs(std::span<const TelemetrySnapshot> snapshots, const OpticalLink& priors, const ChannelGrid& grid) {
  if (snapshots.empty()) throw Error(Errc::Underdetermined, "no telemetry snapshots");
  const auto amps = priors.edfas();
  const auto n = static_cast<std::size_t>(grid.count);
  for (const auto& s : snapshots) {
    if (s.edfas.size() != amps.size()) {
      throw Error(Errc::InconsistentPriors, "snapshot " + s.operating_point_id + " reports " +
                                                std::to_string(s.edfas.size()) + " EDFAs, priors have " +
                                                std::to_string(amps.size()));
    }
    for (std::size_t k = 0; k < amps.size(); ++k) {
      if (s.edfas[k].id != amps[k]->id) {
        throw Error(Errc::InconsistentPriors, "EDFA order mismatch at " + s.edfas[k].id);
      }
    }
    if (s.rx_osa.size() != n || s.tx_spectrum_dbm.size() != n) {
      throw Error(Errc::InconsistentPriors, "snapshot " + s.operating_point_id + " does not match the grid");
    }
  }
  for (const auto& s : snapshots) {
    for (const auto& e : s.edfas) {
      if (!e.total_in_dbm) throw Error(Errc::Underdetermined, e.id + " has no input power monitor");
      if (!e.total_out_dbm) throw Error(Errc::Underdetermined, e.id + " has no output power monitor");
    }
  }
  std::set<std::vector<double>> distinct;
  for (const auto& s : snapshots) {
    std::vector<double> gains;
    for (const auto& e : s.edfas) gains.push_back(std::round(e.gain_db * 1e6) / 1e6);
    distinct.insert(gains);
  }
  const auto needed = std::max<std::size_t>(2, amps.size());
  if (distinct.size() < needed) {
    throw Error(Errc::Underdetermined, "need " + std::to_string(needed) + " distinct gain operating points, got " +
                                           std::to_string(distinct.size()));
  }
}

}  // namespace

const EdfaCalibration* CalibrationResult::find_edfa(std::string_view id) const {
  for (const auto& e : edfas) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

OpticalLink at_operating_point(const OpticalLink& link, const TelemetrySnapshot& snapshot) {
  OpticalLink out = link;
  for (const auto& t : snapshot.edfas) {
    auto* amp = out.find_edfa(t.id);
    if (!amp) throw Error(Errc::InconsistentPriors, "unknown EDFA " + t.id);
    amp->gain_db = t.gain_db;
    amp->tilt_db = t.tilt_db;
  }
  return out;
}

TelemetrySnapshot predict_telemetry(const OpticalLink& link, const ChannelGrid& grid,
                                    const TelemetrySnapshot& operating_point) {
  const auto at = at_operating_point(link, operating_point);
  const auto state = linetwin::propagate(at, grid, operating_point.tx_spectrum_dbm);
  return linetwin::snapshot_telemetry(at, state, operating_point.operating_point_id, operating_point.timestamp);
}

OpticalLink apply_calibration(const OpticalLink& priors, const CalibrationResult& calib) {
  OpticalLink out = priors;
  for (auto& el : out.elements) {
    if (auto* span = std::get_if<FiberSpan>(&el)) span->conn_in_db = span->conn_out_db = 0.0;
  }
  for (const auto& s : calib.spans) std::get<FiberSpan>(out.elements.at(s.element_index)).conn_in_db = s.loss_db;
  for (const auto& e : calib.edfas) {
    auto* amp = out.find_edfa(e.id);
    if (!amp) throw Error(Errc::InconsistentPriors, "calibration names unknown EDFA " + e.id);
    for (auto& p : amp->nf_curve) p.nf_db += e.nf_offset_db;
  }
  return out;
}

CalibrationResult calibrate_line(std::span<const TelemetrySnapshot> snapshots, const OpticalLink& priors,
                                 const ChannelGrid& grid) {
  check_inputs(snapshots, priors, grid);

  const auto groups = span_groups(priors);
  Working w;
  w.link = priors;
  for (auto& el : w.link.elements) {
    if (auto* span = std::get_if<FiberSpan>(&el)) span->conn_in_db = span->conn_out_db = 0.0;
  }
  for (std::size_t e = 0; e < priors.elements.size(); ++e) {
    if (std::holds_alternative<EdfaUnit>(priors.elements[e])) w.edfa_elements.push_back(e);
  }
  const auto n_amp = w.edfa_elements.size();
  const auto n_ch = static_cast<std::size_t>(grid.count);
  const auto n_op = snapshots.size();
  w.nf_mult.assign(n_amp, 1.0);

  std::vector<double> loss_db(groups.size(), 0.0);
  std::vector<double> loss_stderr(groups.size(), 0.0);
  const double to_ref = units::kOsnrReferenceGhz / grid.spacing_ghz;

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n_op * n_ch), static_cast<Eigen::Index>(n_amp));
  Eigen::VectorXd last_u = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_amp));
  CalibrationResult result;
  result.link_id = priors.id;

  constexpr int kMaxIterations = 200;
  for (int it = 1; it <= kMaxIterations; ++it) {
    result.iterations = it;
    std::vector<OpticalLink> links;
    std::vector<qot::LinkTrace> traces;
    for (const auto& s : snapshots) {
      links.push_back(at_operating_point(w.link, s));
      traces.push_back(qot::trace_link(links.back(), grid, launch_of(s)));
    }

    // Stage 1: lumped loss per span group from measured vs modelled total-power ratio.
    double max_loss_step = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& grp = groups[g];
      std::vector<double> estimates;
      for (std::size_t o = 0; o < n_op; ++o) {
        const double mu = measured_total(snapshots[o], grp.upstream, false, priors, grid);
        const double md = measured_total(snapshots[o], grp.downstream, true, priors, grid);
        const double pu = model_total(traces[o], grp.upstream, false);
        const double pd = model_total(traces[o], grp.downstream, true);
        estimates.push_back(loss_db[g] + units::lin_to_db(mu * (pd / pu) / md));
      }
      double mean = 0.0;
      for (double v : estimates) mean += v;
      mean /= static_cast<double>(n_op);
      double var = 0.0;
      for (double v : estimates) var += (v - mean) * (v - mean);
      loss_stderr[g] = n_op > 1 ? std::sqrt(var / static_cast<double>(n_op - 1) / static_cast<double>(n_op)) : 0.0;
      const double next = std::max(0.0, mean);
      max_loss_step = std::max(max_loss_step, std::abs(next - loss_db[g]));
      loss_db[g] = next;
      set_group_loss(w.link, grp, next);
    }

    // Stage 2: sum_k u_k c_ki = 1 where c_ki is EDFA k's share of the measured
    // inverse OSNR; u rescales the current NF multipliers.
    traces.clear();
    for (std::size_t o = 0; o < n_op; ++o) {
      links[o] = at_operating_point(w.link, snapshots[o]);
      traces.push_back(qot::trace_link(links[o], grid, launch_of(snapshots[o])));
    }
    for (std::size_t o = 0; o < n_op; ++o) {
      const auto& tr = traces[o];
      for (std::size_t k = 0; k < n_amp; ++k) {
        const auto& rec = tr.elements[w.edfa_elements[k]];
        for (std::size_t i = 0; i < n_ch; ++i) {
          const double osnr_meas = units::db_to_lin(snapshots[o].rx_osa[i].osnr_db);
          design(static_cast<Eigen::Index>(o * n_ch + i), static_cast<Eigen::Index>(k)) =
              rec.ase_added_mw[i] / rec.out.sig_mw[i] * to_ref * osnr_meas;
        }
      }
    }
    double max_nf_step = 0.0;
    if (n_amp > 0) {
      const Eigen::VectorXd ones = Eigen::VectorXd::Ones(design.rows());
      const Eigen::VectorXd u = design.colPivHouseholderQr().solve(ones);
      last_u = u;
      for (std::size_t k = 0; k < n_amp; ++k) {
        const double uk = u(static_cast<Eigen::Index>(k));
        const double next = w.nf_mult[k] * (uk > 0.0 ? uk : 1e-3);
        max_nf_step = std::max(max_nf_step, std::abs(units::lin_to_db(next / w.nf_mult[k])));
        w.nf_mult[k] = next;
      }
      set_nf_offsets(w.link, priors, w);
    }
    if (max_loss_step < 1e-12 && max_nf_step < 1e-12) break;
  }

  // Uncertainty and identifiability from the final design matrix.
  std::vector<double> nf_stderr(n_amp, 0.0);
  std::vector<bool> identifiable(n_amp, true);
  if (n_amp > 0) {
    Eigen::MatrixXd scaled = design;
    Eigen::VectorXd norms(scaled.cols());
    for (Eigen::Index k = 0; k < scaled.cols(); ++k) {
      norms(k) = scaled.col(k).norm();
      if (norms(k) > 0.0) scaled.col(k) /= norms(k);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    Eigen::MatrixXd inv_gram = Eigen::MatrixXd::Zero(scaled.cols(), scaled.cols());
    for (Eigen::Index j = 0; j < sv.size(); ++j) {
      if (sv(j) > 1e-14 * smax) inv_gram += svd.matrixV().col(j) * svd.matrixV().col(j).transpose() / (sv(j) * sv(j));
    }
    const Eigen::VectorXd resid = design * Eigen::VectorXd::Ones(design.cols()) - Eigen::VectorXd::Ones(design.rows());
    const double dof = std::max<double>(1.0, static_cast<double>(design.rows() - design.cols()));
    const double s2 = resid.squaredNorm() / dof;
    for (std::size_t k = 0; k < n_amp; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const double vif = inv_gram(kk, kk);
      const double sk = sv(sv.size() - 1);
      identifiable[k] = vif < 1e8 && sk > 1e-8 * smax;
      const double var_u = norms(kk) > 0.0 ? s2 * vif / (norms(kk) * norms(kk)) : 0.0;
      nf_stderr[k] = 10.0 / std::log(10.0) * std::sqrt(var_u);
    }
    if (sv(sv.size() - 1) <= 1e-8 * smax) {
      result.identifiability.push_back("NF design matrix is rank deficient (condition " +
                                       std::to_string(smax / std::max(sv(sv.size() - 1), 1e-300)) + ")");
    }
  }

  for (std::size_t k = 0; k < n_amp; ++k) {
    const auto& nominal = std::get<EdfaUnit>(priors.elements[w.edfa_elements[k]]);
    EdfaCalibration c;
    c.id = nominal.id;
    c.nf_offset_db = units::lin_to_db(w.nf_mult[k]);
    const double gain = snapshots.front().edfas[k].gain_db;
    c.nf_db = nominal.nf_at(gain) + c.nf_offset_db;
    if (c.nf_db < kMinNfDb || c.nf_db > kMaxNfDb) {
      const double clamped = std::clamp(c.nf_db, kMinNfDb, kMaxNfDb);
      result.identifiability.push_back(c.id + " NF clamped from " + std::to_string(c.nf_db) + " dB");
      c.nf_offset_db += clamped - c.nf_db;
      c.nf_db = clamped;
    }
    c.nf_stderr_db = nf_stderr[k];
    c.identifiable = identifiable[k];
    if (!c.identifiable) result.identifiability.push_back(c.id + " NF not identifiable");
    result.edfas.push_back(std::move(c));
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    SpanCalibration s;
    s.element_index = groups[g].spans.front();
    s.lumped_with.assign(groups[g].spans.begin() + 1, groups[g].spans.end());
    s.loss_db = loss_db[g];
    s.stderr_db = loss_stderr[g];
    if (!s.lumped_with.empty()) {
      result.identifiability.push_back("spans after element " + std::to_string(s.element_index) +
                                       " share one loss estimate");
    }
    result.spans.push_back(std::move(s));
  }

  const auto calibrated = apply_calibration(priors, result);
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& s : snapshots) {
    const auto at = at_operating_point(calibrated, s);
    const auto predicted = qot::osnr_db(qot::trace_link(at, grid, launch_of(s)));
    for (std::size_t i = 0; i < n_ch; ++i) {
      const double d = s.rx_osa[i].osnr_db - predicted[i];
      result.residuals.push_back({s.operating_point_id, static_cast<int>(i), d});
      sum += d;
      sum_sq += d * d;
    }
  }
  const auto count = static_cast<double>(result.residuals.size());
  result.residual_mean_db = sum / count;
  result.residual_rms_db = std::sqrt(sum_sq / count);
  result.residual_std_db = std::sqrt(std::max(0.0, sum_sq / count - result.residual_mean_db * result.residual_mean_db));
  return result;
}

std::vector<TelemetrySnapshot> collect_operating_points(const OpticalLink& truth, const ChannelGrid& grid,
                                                        std::span<const linetwin::FaultSpec> faults,
                                                        std::span<const double> launch_dbm, double sigma_db,
                                                        std::uint64_t seed, double step_db) {
  const auto amps = truth.edfas();
  std::vector<TelemetrySnapshot> out;
  for (std::size_t k = 0; k <= 2 * amps.size(); ++k) {
    OpticalLink link = truth;
    if (k > 0) {
      const auto* amp = amps[(k - 1) % amps.size()];
      const double step = k <= amps.size() ? step_db : -step_db;
      link.find_edfa(amp->id)->gain_db =
          std::clamp(amp->gain_db + step, amp->gain_range_db.min, amp->gain_range_db.max);
    }
    const auto state = linetwin::propagate(link, grid, launch_dbm, faults);
    auto snap = linetwin::snapshot_telemetry(link, state, "op" + std::to_string(k), k);
    out.push_back(sigma_db > 0.0 ? linetwin::add_monitor_noise(std::move(snap), sigma_db, seed + k) : std::move(snap));
  }
  return out;
}

}  // namespace dcx::monitor
