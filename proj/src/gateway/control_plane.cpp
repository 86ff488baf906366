#include "dcx/gateway/control_plane.hpp"

#include <cstdlib>

#include "dcx/error.hpp"
#include "dcx/gateway/reports.hpp"
#include "dcx/qot/budget.hpp"
#include "dcx/qot/link_model.hpp"
#include "dcx/units.hpp"

namespace dcx::gateway {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

const qot::TrxNoiseModel& noise_model_of(const netmodel::Topology& t, const std::string& trx_id) {
  const auto* trx = t.find_trx(trx_id);
  if (!trx) throw Error(Errc::NotFound, "transceiver " + trx_id);
  const auto* model = t.find_trx_model(trx->noise_model_id);
  if (!model) throw Error(Errc::NotFound, "noise model " + trx->noise_model_id);
  return model->model;
}

Json db_array(const std::vector<double>& lin) {
  Json a = Json::array();
  for (double v : lin) a.push_back(units::lin_to_db(v));
  return a;
}

}  // namespace

std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* v = std::getenv("DCX_SEED");
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const auto seed = std::strtoull(v, &end, 10);
  return *end == '\0' ? seed : fallback;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt, std::uint64_t counter) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : salt) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(splitmix64(seed ^ h) + counter);
}

ControlPlane::ControlPlane(netmodel::Topology topology, PlaneConfig config)
    : topology_(std::move(topology)), config_(std::move(config)), state_(initial_state()), devices_(topology_) {
  if (config_.event_log_path) log_ = EventLog(*config_.event_log_path);
}

const EventRecord& ControlPlane::append(EventKind kind, Json payload) {
  EventRecord probe;
  probe.seq = log_.last_seq() + 1;
  probe.kind = kind;
  probe.payload = payload;
  Json next = state_;
  apply_event(next, probe);
  const auto& r = log_.append(kind, std::move(payload), next);
  state_ = std::move(next);
  return r;
}

void ControlPlane::require_link(const std::string& link_id) const {
  if (!topology_.find_link(link_id)) throw Error(Errc::UnknownLink, link_id);
}

linetwin::LineTwin ControlPlane::twin_locked() const {
  linetwin::LineTwin t(topology_);
  for (const auto& [link, amps] : state_["settings"].items()) {
    for (const auto& [amp, s] : amps.items()) {
      t.set_edfa(link, amp, s["gain_db"].get<double>(), s["tilt_db"].get<double>());
    }
  }
  for (const auto& [id, f] : state_["faults"].items()) {
    const auto spec = fault_from_json(f);
    t.faults().set_fault(t.link(spec.link_id), spec);
  }
  return t;
}

linetwin::LineTwin ControlPlane::twin() const {
  std::lock_guard lock(mu_);
  return twin_locked();
}

netmodel::OpticalLink ControlPlane::priors(const std::string& link_id) const {
  std::lock_guard lock(mu_);
  require_link(link_id);
  netmodel::OpticalLink link = *topology_.find_link(link_id);
  if (state_["settings"].contains(link_id)) {
    for (const auto& [amp, s] : state_["settings"][link_id].items()) {
      auto* e = link.find_edfa(amp);
      e->gain_db = s["gain_db"].get<double>();
      e->tilt_db = s["tilt_db"].get<double>();
    }
  }
  return link;
}

std::vector<double> ControlPlane::launch(const std::string& link_id) const {
  require_link(link_id);
  const auto grid = topology_.grid_for(*topology_.find_link(link_id));
  return std::vector<double>(static_cast<std::size_t>(grid.count), config_.launch_dbm);
}

// Probe receiver at UA_B: segment GSNR from the twin seen through its noise model.
protocol::ProbeFn ControlPlane::probe_for(const std::string& rx_trx) const {
  auto twin = std::make_shared<linetwin::LineTwin>(twin_locked());
  const auto model = noise_model_of(topology_, rx_trx);
  const double launch_dbm = config_.launch_dbm;
  return [twin, model, launch_dbm](const routing::Segment& seg, const modes::TrxMode&, int channel) {
    std::vector<double> gsnrs;
    double rx_dbm = launch_dbm;
    for (const auto& link_id : seg.links) {
      const auto grid = twin->grid_for(link_id);
      const auto idx = static_cast<std::size_t>(grid.count == 1 ? 0 : channel);
      const auto state = twin->propagate_flat(link_id, launch_dbm);
      gsnrs.push_back(qot::gsnr(state.trace).at(idx));
      rx_dbm = state.output_dbm().at(idx);
    }
    const double g = qot::concatenate_gsnr(gsnrs);
    return protocol::ProbeMeasurement{qot::total_snr(g, model, units::dbm_to_mw(rx_dbm)), rx_dbm};
  };
}

Json ControlPlane::session_outcome(const protocol::Session& s) const {
  Json devices = Json::object();
  for (auto role : {protocol::Party::UserA, protocol::Party::UserB}) {
    const auto& trx = s.user(role).trx_id;
    devices[trx] = protocol::to_json(devices_.get(trx));
  }
  Json claims = nullptr;
  const auto& c = s.carrier();
  if (c.occupancy_claimed && c.route && c.spectrum) {
    claims = Json{{"links", routing::carrier_links(topology_, *c.route)}, {"channel", c.spectrum->channel_index}};
  }
  return Json{{"session_id", s.id()}, {"summary", s.summary()}, {"devices", devices}, {"claims", claims}};
}

void ControlPlane::append_session_events(EventKind kind, const protocol::Session& s, std::size_t first,
                                         const Json& extra) {
  const auto& log = s.log();
  for (std::size_t i = first; i < log.size(); ++i) {
    Json payload{{"session_id", s.id()}, {"entry", protocol::to_json(log[i])}};
    if (i + 1 == log.size()) {
      payload.update(session_outcome(s));
      payload.update(extra);
    }
    append(kind, std::move(payload));
  }
}

Json ControlPlane::create_session(const std::string& site_a, const std::string& site_b,
                                  const protocol::Policy& policy) {
  std::lock_guard lock(mu_);
  const auto id = "s" + std::to_string(sessions_.size() + 1);
  const auto* rx_site = topology_.find_site(site_b);
  if (!rx_site) throw Error(Errc::UnknownSite, site_b);
  if (rx_site->trx_ids.empty()) throw Error(Errc::ValidationError, site_b + " has no transceiver");
  auto s = std::make_unique<protocol::Session>(id, topology_, occupancy_, devices_,
                                               probe_for(rx_site->trx_ids.front()), site_a, site_b, policy);
  s->start();
  append_session_events(EventKind::Session, *s, 0, Json::object());
  const auto summary = s->summary();
  sessions_.emplace(id, std::move(s));
  return summary;
}

Json ControlPlane::decide(const std::string& session_id, protocol::Verdict verdict, const std::string& reason) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::NotFound, "session " + session_id);
  const auto before = it->second->log().size();
  it->second->decide(verdict, reason);
  Json extra{{"verdict", verdict == protocol::Verdict::Approve ? "approve" : "rollback"}, {"reason", reason}};
  append_session_events(EventKind::Decision, *it->second, before, extra);
  return it->second->summary();
}

std::string ControlPlane::inject_fault(linetwin::FaultSpec fault) {
  std::lock_guard lock(mu_);
  require_link(fault.link_id);
  if (fault.id.empty()) fault.id = "f" + std::to_string(log_.last_seq() + 1);
  if (state_["faults"].contains(fault.id)) throw Error(Errc::ValidationError, "duplicate fault id " + fault.id);
  if (auto why = linetwin::check_fault(*topology_.find_link(fault.link_id), fault); !why.empty()) {
    throw Error(Errc::ValidationError, why);
  }
  append(EventKind::Fault, Json{{"op", "set"}, {"fault", to_json(fault)}});
  return fault.id;
}

void ControlPlane::clear_fault(const std::string& id) {
  std::lock_guard lock(mu_);
  if (!state_["faults"].contains(id)) throw Error(Errc::UnknownFault, id);
  append(EventKind::Fault, Json{{"op", "clear"}, {"id", id}});
}

Json ControlPlane::calibrate(const std::string& link_id) {
  std::lock_guard lock(mu_);
  require_link(link_id);
  const auto t = twin_locked();
  const auto grid = t.grid_for(link_id);
  const auto faults = t.faults().active(link_id);
  const auto seed = derive_seed(config_.seed, "calibration:" + link_id, log_.last_seq() + 1);
  const auto snaps = monitor::collect_operating_points(t.link(link_id), grid, faults, launch(link_id),
                                                       config_.monitor_noise_db, seed);
  const auto result = monitor::calibrate_line(snaps, priors(link_id), grid);
  const auto id = "c" + std::to_string(log_.last_seq() + 1);
  Json payload{{"id", id}, {"link_id", link_id}, {"result", to_json(result)}};
  append(EventKind::Calibration, payload);
  return payload;
}

Json ControlPlane::optimize(const std::string& link_id) {
  std::lock_guard lock(mu_);
  require_link(link_id);
  const auto calib_id = latest_calibration(link_id);
  if (!calib_id) throw Error(Errc::NoBaseline, "no calibration for " + link_id);
  const auto calib = calibration_result(*calib_id);
  const auto link = priors(link_id);
  const auto setting = monitor::optimize_gain_tilt(link, calib, topology_.grid_for(link), launch(link_id));
  const auto id = "o" + std::to_string(log_.last_seq() + 1);
  Json payload{{"id", id}, {"link_id", link_id}, {"calibration_id", *calib_id}, {"result", to_json(setting)}};
  append(EventKind::Settings, payload);
  return payload;
}

Json ControlPlane::session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::NotFound, "session " + id);
  Json j = it->second->summary();
  Json log = Json::array();
  for (const auto& e : it->second->log()) log.push_back(protocol::to_json(e));
  j["log"] = log;
  return j;
}

Json ControlPlane::sessions(std::optional<protocol::State> filter) const {
  std::lock_guard lock(mu_);
  Json out = Json::array();
  for (std::size_t k = 1; k <= sessions_.size(); ++k) {
    const auto& s = *sessions_.at("s" + std::to_string(k));
    if (!filter || s.state() == *filter) out.push_back(s.summary());
  }
  return out;
}

Json ControlPlane::calibration(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (!state_["calibrations"].contains(id)) throw Error(Errc::NotFound, "calibration " + id);
  Json j = state_["calibrations"][id];
  j["id"] = id;
  return j;
}

monitor::CalibrationResult ControlPlane::calibration_result(const std::string& id) const {
  return calibration_from_json(calibration(id)["result"]);
}

std::optional<std::string> ControlPlane::latest_calibration(const std::string& link_id) const {
  std::lock_guard lock(mu_);
  std::optional<std::string> best;
  std::uint64_t best_seq = 0;
  for (const auto& [id, c] : state_["calibrations"].items()) {
    const auto seq = std::stoull(id.substr(1));
    if (c["link_id"] == link_id && seq >= best_seq) {
      best = id;
      best_seq = seq;
    }
  }
  return best;
}

linetwin::PowerProfile ControlPlane::profile(const std::string& link_id, std::optional<double> resolution_km,
                                             std::optional<double> noise_sigma_db,
                                             std::optional<int> channel) const {
  std::lock_guard lock(mu_);
  require_link(link_id);
  const auto t = twin_locked();
  const auto state = t.propagate(link_id, launch(link_id));
  const auto seed = derive_seed(config_.seed, "profile:" + link_id, log_.last_seq());
  return linetwin::synthesize_profile(t.link(link_id), state, resolution_km.value_or(config_.resolution_km),
                                      noise_sigma_db.value_or(config_.profile_noise_db), seed, channel);
}

Json ControlPlane::gsnr(const std::string& link_id) const {
  std::lock_guard lock(mu_);
  require_link(link_id);
  const auto t = twin_locked();
  const auto grid = t.grid_for(link_id);
  const auto faults = t.faults().active(link_id);
  const auto g = qot::link_gsnr(t.link(link_id), grid, launch(link_id), linetwin::perturbation_for(link_id, faults));
  Json freqs = Json::array();
  for (int ch = 0; ch < grid.count; ++ch) freqs.push_back(grid.frequency_thz(ch));
  Json acc = Json::array();
  for (const auto& a : g.accumulated) acc.push_back({{"edfa_id", a.edfa_id}, {"gsnr_db", db_array(a.gsnr)}});
  return Json{{"link_id", link_id}, {"frequency_thz", freqs}, {"gsnr_db", db_array(g.gsnr)}, {"accumulated", acc}};
}

monitor::NfFaultResult ControlPlane::detect_nf_fault(const std::string& link_id, const std::string& calibration_id,
                                                     const monitor::NfFaultOptions& options) const {
  std::lock_guard lock(mu_);
  require_link(link_id);
  const auto baseline = calibration_result(calibration_id);
  const auto t = twin_locked();
  const auto grid = t.grid_for(link_id);
  const auto faults = t.faults().active(link_id);
  const auto seed = derive_seed(config_.seed, "nf-check:" + link_id, log_.last_seq());
  const auto snaps = monitor::collect_operating_points(t.link(link_id), grid, faults, launch(link_id),
                                                       config_.monitor_noise_db, seed);
  return monitor::detect_nf_fault(snaps, baseline, priors(link_id), grid, options);
}

Json ControlPlane::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

std::string ControlPlane::digest() const {
  std::lock_guard lock(mu_);
  return state_digest(state_);
}

std::vector<EventRecord> ControlPlane::events_since(std::uint64_t seq) const {
  std::lock_guard lock(mu_);
  return log_.since(seq);
}

std::uint64_t ControlPlane::last_seq() const {
  std::lock_guard lock(mu_);
  return log_.last_seq();
}

std::string ControlPlane::event_log_ndjson() const {
  std::lock_guard lock(mu_);
  return log_.to_ndjson();
}

}  // namespace dcx::gateway
