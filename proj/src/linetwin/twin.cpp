#include "dcx/linetwin/twin.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::linetwin {

std::string_view to_string(FaultKind kind) noexcept {
  return kind == FaultKind::StepLoss ? "step_loss" : "nf_degradation";
}

std::string check_fault(const OpticalLink& link, const FaultSpec& f) {
  if (f.link_id != link.id) return "fault targets link " + f.link_id;
  if (!(f.magnitude_db > 0.0 && f.magnitude_db <= 20.0)) return "magnitude_db must be in (0, 20]";
  if (f.kind == FaultKind::StepLoss) {
    if (f.distance_km < 0.0 || f.distance_km > link.length_km()) return "distance outside link";
  } else if (!link.find_edfa(f.edfa_id)) {
    return "unknown edfa " + f.edfa_id;
  }
  return {};
}

qot::Perturbation perturbation_for(const std::string& link_id, std::span<const FaultSpec> faults) {
  qot::Perturbation p;
  for (const auto& f : faults) {
    if (f.link_id != link_id) continue;
    if (f.kind == FaultKind::StepLoss) {
      p.losses.push_back({f.distance_km, f.magnitude_db});
    } else {
      p.nf_delta_db[f.edfa_id] += f.magnitude_db;
    }
  }
  return p;
}

namespace {
std::vector<double> to_dbm(const std::vector<double>& mw) {
  std::vector<double> out(mw.size());
  for (std::size_t i = 0; i < mw.size(); ++i) out[i] = units::mw_to_dbm(mw[i]);
  return out;
}
}  // namespace

std::vector<double> LineState::element_in_dbm(std::size_t element) const {
  return to_dbm(trace.elements.at(element).in.sig_mw);
}

std::vector<double> LineState::element_out_dbm(std::size_t element) const {
  return to_dbm(trace.elements.at(element).out.sig_mw);
}

std::vector<double> LineState::output_dbm() const { return to_dbm(trace.output().sig_mw); }

LineState propagate(const OpticalLink& link, const ChannelGrid& grid, std::span<const double> launch_dbm,
                    std::span<const FaultSpec> faults) {
  LineState state;
  state.trace = qot::trace_link(link, grid, launch_dbm, perturbation_for(link.id, faults));
  state.length_km = link.length_km();
  for (const auto& rec : state.trace.elements) {
    if (rec.kind != qot::ElementKind::Edfa) continue;
    state.edfa_totals.push_back(
        {rec.id, units::mw_to_dbm(rec.in.total_mw()), units::mw_to_dbm(rec.out.total_mw())});
  }
  return state;
}

PowerProfile synthesize_profile(const OpticalLink& link, const LineState& state, double resolution_km,
                                double noise_sigma_db, std::uint64_t seed, std::optional<int> channel) {
  if (!(resolution_km >= 0.1 && resolution_km <= 5.0)) throw Error(Errc::OutOfRange, "resolution_km in [0.1, 5]");
  const auto& trace = state.trace;
  const auto n = trace.input.size();
  if (channel && (*channel < 0 || static_cast<std::size_t>(*channel) >= n)) {
    throw Error(Errc::OutOfRange, "channel " + std::to_string(*channel));
  }

  auto reduce = [&](const std::vector<double>& per_channel) {
    if (channel) return per_channel[static_cast<std::size_t>(*channel)];
    double total = 0.0;
    for (double p : per_channel) total += p;
    return total;
  };
  const double reference = reduce(trace.input.sig_mw);

  PowerProfile profile;
  profile.resolution_km = resolution_km;
  profile.channel = channel;
  profile.noise_sigma_db = noise_sigma_db;

  const double length = link.length_km();
  const auto steps = static_cast<std::size_t>(std::floor(length / resolution_km + 1e-9));
  for (std::size_t k = 0; k <= steps; ++k) profile.distance_km.push_back(static_cast<double>(k) * resolution_km);
  if (length - profile.distance_km.back() > 1e-9) profile.distance_km.push_back(length);

  std::vector<double> p(n);
  for (double x : profile.distance_km) {
    const qot::ElementRecord* span = nullptr;
    for (const auto& rec : trace.elements) {
      if (rec.kind == qot::ElementKind::Span && x >= rec.start_km - 1e-9 && x < rec.end_km - 1e-9) {
        span = &rec;
        break;
      }
    }
    if (!span) {
      p = trace.output().sig_mw;
    } else {
      const double dx = std::max(0.0, x - span->start_km);
      double mid_db = 0.0;
      for (const auto& loss : span->mid_losses) {
        if (loss.distance_km <= x + 1e-9) mid_db += loss.loss_db;
      }
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = span->fiber_in_sig_mw[i] * std::exp(-span->alpha_per_km[i] * dx) * units::db_to_lin(-mid_db);
      }
    }
    profile.relative_power_db.push_back(units::lin_to_db(reduce(p) / reference));
  }

  if (noise_sigma_db > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma_db);
    for (auto& v : profile.relative_power_db) v += noise(rng);
  }
  return profile;
}

std::string profile_csv(const PowerProfile& profile) {
  std::ostringstream os;
  os << "distance_km,relative_power_db\n";
  char buf[64];
  for (std::size_t i = 0; i < profile.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.3f,%.6f\n", profile.distance_km[i], profile.relative_power_db[i]);
    os << buf;
  }
  return os.str();
}

TelemetrySnapshot snapshot_telemetry(const OpticalLink& link, const LineState& state,
                                     const std::string& operating_point_id, std::uint64_t timestamp) {
  TelemetrySnapshot snap;
  snap.operating_point_id = operating_point_id;
  snap.timestamp = timestamp;
  for (const auto& totals : state.edfa_totals) {
    const auto* amp = link.find_edfa(totals.id);
    EdfaTelemetry t;
    t.id = totals.id;
    t.gain_db = amp->gain_db;
    t.tilt_db = amp->tilt_db;
    if (amp->monitors.input) t.total_in_dbm = totals.total_in_dbm;
    if (amp->monitors.output) t.total_out_dbm = totals.total_out_dbm;
    snap.edfas.push_back(std::move(t));
  }
  const auto osnr = qot::osnr_db(state.trace);
  const auto& out = state.trace.output();
  for (std::size_t i = 0; i < out.size(); ++i) {
    snap.rx_osa.push_back({static_cast<int>(i), units::mw_to_dbm(out.sig_mw[i]), osnr[i]});
  }
  for (double p : state.trace.input.sig_mw) snap.tx_spectrum_dbm.push_back(units::mw_to_dbm(p));
  return snap;
}

TelemetrySnapshot add_monitor_noise(TelemetrySnapshot snap, double sigma_db, std::uint64_t seed) {
  if (sigma_db <= 0.0) return snap;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma_db);
  for (auto& e : snap.edfas) {
    if (e.total_in_dbm) *e.total_in_dbm += noise(rng);
    if (e.total_out_dbm) *e.total_out_dbm += noise(rng);
  }
  for (auto& row : snap.rx_osa) {
    row.power_dbm += noise(rng);
    row.osnr_db += noise(rng);
  }
  return snap;
}

std::string FaultRegistry::set_fault(const OpticalLink& link, FaultSpec fault) {
  if (auto why = check_fault(link, fault); !why.empty()) throw Error(Errc::ValidationError, why);
  if (fault.id.empty()) fault.id = "f" + std::to_string(next_id_++);
  if (faults_.count(fault.id)) throw Error(Errc::ValidationError, "duplicate fault id " + fault.id);
  const auto id = fault.id;
  faults_.emplace(id, std::move(fault));
  return id;
}

void FaultRegistry::clear_fault(const std::string& id) {
  if (!faults_.erase(id)) throw Error(Errc::UnknownFault, id);
}

std::vector<FaultSpec> FaultRegistry::active(const std::string& link_id) const {
  std::vector<FaultSpec> out;
  for (const auto& [id, f] : faults_) {
    if (f.link_id == link_id) out.push_back(f);
  }
  return out;
}

std::vector<FaultSpec> FaultRegistry::all() const {
  std::vector<FaultSpec> out;
  for (const auto& [id, f] : faults_) out.push_back(f);
  return out;
}

LineTwin::LineTwin(const netmodel::Topology& topology) : grid_(topology.grid) {
  for (const auto& l : topology.links) links_.emplace(l.id, l);
}

const OpticalLink& LineTwin::link(const std::string& id) const {
  auto it = links_.find(id);
  if (it == links_.end()) throw Error(Errc::UnknownLink, id);
  return it->second;
}

ChannelGrid LineTwin::grid_for(const std::string& link_id) const {
  return link(link_id).kind == netmodel::LinkKind::AAL ? grid_.single_channel() : grid_;
}

void LineTwin::set_edfa(const std::string& link_id, const std::string& edfa_id, double gain_db, double tilt_db) {
  auto it = links_.find(link_id);
  if (it == links_.end()) throw Error(Errc::UnknownLink, link_id);
  auto* amp = it->second.find_edfa(edfa_id);
  if (!amp) throw Error(Errc::NotFound, "edfa " + edfa_id);
  if (!amp->gain_range_db.contains(gain_db) || !amp->tilt_range_db.contains(tilt_db)) {
    throw Error(Errc::OutOfRange, edfa_id + " setting outside actuator range");
  }
  amp->gain_db = gain_db;
  amp->tilt_db = tilt_db;
}

LineState LineTwin::propagate(const std::string& link_id, std::span<const double> launch_dbm) const {
  const auto faults = faults_.active(link_id);
  return linetwin::propagate(link(link_id), grid_for(link_id), launch_dbm, faults);
}

LineState LineTwin::propagate_flat(const std::string& link_id, double launch_dbm) const {
  std::vector<double> launch(static_cast<std::size_t>(grid_for(link_id).count), launch_dbm);
  return propagate(link_id, launch);
}

double measure_roundtrip_us(double length_km, double processing_offset_us, double n_group) {
  return 2.0 * length_km * n_group / units::kSpeedOfLightKmPerS * 1e6 + processing_offset_us;
}

double measure_roundtrip_us(const netmodel::Topology& t, const routing::RouteCandidate& route,
                            double processing_offset_us, double n_group) {
  return measure_roundtrip_us(routing::route_length_km(t, route), processing_offset_us, n_group);
}

}  // namespace dcx::linetwin
