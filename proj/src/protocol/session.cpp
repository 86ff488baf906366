#include "dcx/protocol/session.hpp"

#include <algorithm>
#include <array>

#include "dcx/error.hpp"
#include "dcx/units.hpp"

namespace dcx::protocol {

using modes::TrxMode;

namespace {

constexpr std::array<std::pair<State, std::string_view>, 12> kStates{{
    {State::Idle, "Idle"},
    {State::Registering, "Registering"},
    {State::Authenticated, "Authenticated"},
    {State::CatalogExchanged, "CatalogExchanged"},
    {State::Probing, "Probing"},
    {State::QotEstimated, "QotEstimated"},
    {State::ModeSelected, "ModeSelected"},
    {State::Configured, "Configured"},
    {State::PendingApproval, "PendingApproval"},
    {State::Committed, "Committed"},
    {State::RolledBack, "RolledBack"},
    {State::Errored, "Errored"},
}};

Json mode_to_json(const TrxMode& m) {
  return Json{{"id", m.id},
              {"bitrate_gbps", m.bitrate_gbps},
              {"modulation", netmodel::to_string(m.modulation)},
              {"symbol_rate_gbaud", m.symbol_rate_gbaud},
              {"fec", m.fec},
              {"fec_threshold_ber", m.fec_threshold_ber},
              {"min_rx_dbm", m.min_rx_dbm},
              {"max_rx_dbm", m.max_rx_dbm}};
}

TrxMode mode_from_json(const Json& j) {
  try {
    netmodel::ModeSpec spec;
    spec.id = j.at("id").get<std::string>();
    spec.bitrate_gbps = j.at("bitrate_gbps").get<double>();
    const auto mod = j.at("modulation").get<std::string>();
    if (mod == "QPSK") {
      spec.modulation = netmodel::Modulation::QPSK;
    } else if (mod == "16QAM") {
      spec.modulation = netmodel::Modulation::QAM16;
    } else {
      throw Error(Errc::ProtocolViolation, "unknown modulation " + mod);
    }
    spec.symbol_rate_gbaud = j.at("symbol_rate_gbaud").get<double>();
    spec.fec = j.at("fec").get<std::string>();
    spec.fec_threshold_ber = j.at("fec_threshold_ber").get<double>();
    spec.min_rx_dbm = j.at("min_rx_dbm").get<double>();
    spec.max_rx_dbm = j.at("max_rx_dbm").get<double>();
    return modes::make_mode(spec);
  } catch (const Json::exception& e) {
    throw Error(Errc::ProtocolViolation, std::string("mode: ") + e.what());
  }
}

Json catalog_to_json(const modes::ModeCatalog& c) {
  Json modes = Json::array();
  for (const auto& m : c.modes) modes.push_back(mode_to_json(m));
  return Json{{"trx_id", c.trx_id}, {"probe_mode_id", c.probe_mode_id}, {"modes", modes}};
}

modes::ModeCatalog catalog_from_json(const Json& j) {
  modes::ModeCatalog c;
  c.trx_id = j.at("trx_id").get<std::string>();
  c.probe_mode_id = j.at("probe_mode_id").get<std::string>();
  for (const auto& m : j.at("modes")) c.modes.push_back(mode_from_json(m));
  return c;
}

const TrxMode* find_capability(const modes::ModeCatalog& c, const TrxMode& m) {
  for (const auto& own : c.modes) {
    if (own.same_capability(m)) return &own;
  }
  return nullptr;
}

const qot::TrxNoiseModel& noise_model(const netmodel::Topology& t, const std::string& trx_id) {
  const auto* trx = t.find_trx(trx_id);
  if (!trx) throw Error(Errc::NotFound, "trx " + trx_id);
  const auto* model = t.find_trx_model(trx->noise_model_id);
  if (!model) throw Error(Errc::NotFound, "noise model " + trx->noise_model_id);
  return model->model;
}

void violation(const std::string& what) { throw Error(Errc::ProtocolViolation, what); }

void expect(bool cond, const ProtocolMessage& m, State s) {
  if (!cond) {
    violation(std::string(to_string(m.kind)) + " from " + std::string(to_string(m.from)) + " in state " +
              std::string(to_string(s)));
  }
}

template <typename S>
void advance(S& s, State to) {
  if (!allowed_transition(s.state, to)) {
    violation(std::string("transition ") + std::string(to_string(s.state)) + " -> " + std::string(to_string(to)));
  }
  s.state = to;
}

bool is_user(Party p) { return p == Party::UserA || p == Party::UserB; }

}  // namespace

std::string_view to_string(State s) noexcept {
  for (const auto& [k, name] : kStates) {
    if (k == s) return name;
  }
  return "?";
}

std::optional<State> parse_state(std::string_view s) noexcept {
  for (const auto& [k, name] : kStates) {
    if (name == s) return k;
  }
  return std::nullopt;
}

bool is_terminal(State s) noexcept { return s == State::Committed || s == State::RolledBack || s == State::Errored; }

bool allowed_transition(State from, State to) noexcept {
  if (is_terminal(from)) return false;
  if (to == State::Errored) return true;
  switch (from) {
    case State::Idle: return to == State::Registering;
    case State::Registering: return to == State::Authenticated;
    case State::Authenticated: return to == State::CatalogExchanged;
    case State::CatalogExchanged: return to == State::Probing || to == State::Configured;
    case State::Probing: return to == State::QotEstimated || to == State::Configured;
    case State::QotEstimated: return to == State::ModeSelected;
    case State::ModeSelected: return to == State::Configured;
    case State::Configured:
      return to == State::PendingApproval || to == State::Committed || to == State::RolledBack;
    case State::PendingApproval: return to == State::Committed || to == State::RolledBack;
    default: return false;
  }
}

Json to_json(const Policy& p) {
  Json j{{"auto_approve", p.auto_approve},
         {"selection", p.selection == ModeSelectionSide::Carrier ? "carrier" : "user"},
         {"margin_db", p.margin_db},
         {"max_pops", p.max_pops},
         {"segments", p.segments == routing::SegmentPolicy::PerLink ? "per_link" : "per_hop"}};
  j["route_id"] = p.route_id ? Json(*p.route_id) : Json(nullptr);
  return j;
}

Policy policy_from_json(const Json& j) {
  Policy p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw Error(Errc::ValidationError, "policy must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "auto_approve") {
        p.auto_approve = value.get<bool>();
      } else if (key == "selection") {
        const auto v = value.get<std::string>();
        if (v != "carrier" && v != "user") throw Error(Errc::ValidationError, "policy.selection: " + v);
        p.selection = v == "carrier" ? ModeSelectionSide::Carrier : ModeSelectionSide::User;
      } else if (key == "route_id") {
        if (!value.is_null()) p.route_id = value.get<std::string>();
      } else if (key == "margin_db") {
        p.margin_db = value.get<double>();
      } else if (key == "max_pops") {
        p.max_pops = value.get<int>();
      } else if (key == "segments") {
        const auto v = value.get<std::string>();
        if (v != "per_link" && v != "per_hop") throw Error(Errc::ValidationError, "policy.segments: " + v);
        p.segments = v == "per_link" ? routing::SegmentPolicy::PerLink : routing::SegmentPolicy::PerHop;
      } else {
        throw Error(Errc::ValidationError, "policy: unknown key " + key);
      }
    } catch (const Json::exception&) {
      throw Error(Errc::ValidationError, "policy." + key + " has the wrong type");
    }
  }
  return p;
}

Json to_json(const TrxConfig& c) {
  return Json{{"mode_id", c.mode_id}, {"channel", c.channel}, {"route_id", c.route_id}, {"enabled", c.enabled}};
}

TrxConfig trx_config_from_json(const Json& j) {
  return {j.at("mode_id").get<std::string>(), j.at("channel").get<int>(), j.at("route_id").get<std::string>(),
          j.at("enabled").get<bool>()};
}

DeviceRegistry::DeviceRegistry(const netmodel::Topology& t) {
  for (const auto& trx : t.trxs) configs_.emplace(trx.id, TrxConfig{});
}

const TrxConfig& DeviceRegistry::get(const std::string& trx_id) const {
  auto it = configs_.find(trx_id);
  if (it == configs_.end()) throw Error(Errc::NotFound, "trx " + trx_id);
  return it->second;
}

void DeviceRegistry::set(const std::string& trx_id, const TrxConfig& c) {
  auto it = configs_.find(trx_id);
  if (it == configs_.end()) throw Error(Errc::NotFound, "trx " + trx_id);
  it->second = c;
}

std::string DeviceRegistry::serialize() const {
  Json j = Json::object();
  for (const auto& [id, c] : configs_) j[id] = to_json(c);
  return j.dump();
}

std::string DeviceRegistry::serialize(const std::string& trx_id) const { return to_json(get(trx_id)).dump(); }

routing::Occupancy OccupancyCoordinator::snapshot() const {
  std::lock_guard lock(mu_);
  return occupancy_;
}

void OccupancyCoordinator::claim(const std::vector<std::string>& links, int channel) {
  std::lock_guard lock(mu_);
  for (const auto& l : links) {
    auto it = occupancy_.find(l);
    if (it != occupancy_.end() && it->second.count(channel)) {
      throw Error(Errc::SpectrumConflict, l + " channel " + std::to_string(channel));
    }
  }
  for (const auto& l : links) occupancy_[l].insert(channel);
}

void OccupancyCoordinator::release(const std::vector<std::string>& links, int channel) {
  std::lock_guard lock(mu_);
  for (const auto& l : links) {
    auto it = occupancy_.find(l);
    if (it == occupancy_.end()) continue;
    it->second.erase(channel);
    if (it->second.empty()) occupancy_.erase(it);
  }
}

void OccupancyCoordinator::fill(const std::vector<std::string>& links, int channel_count) {
  std::lock_guard lock(mu_);
  for (const auto& l : links) {
    for (int ch = 0; ch < channel_count; ++ch) occupancy_[l].insert(ch);
  }
}

UserAgentState make_user_agent(const netmodel::Topology& t, Party role, const std::string& session_id,
                               const std::string& site_id, const std::string& peer_site_id) {
  const auto* site = t.find_site(site_id);
  if (!site) throw Error(Errc::UnknownSite, site_id);
  if (!t.find_site(peer_site_id)) throw Error(Errc::UnknownSite, peer_site_id);
  if (site->trx_ids.empty()) throw Error(Errc::ValidationError, site_id + " has no transceiver");
  UserAgentState s;
  s.role = role;
  s.session_id = session_id;
  s.site_id = site_id;
  s.peer_site_id = peer_site_id;
  s.trx_id = site->trx_ids.front();
  s.serial = t.find_trx(s.trx_id)->serial;
  return s;
}

CarrierSession make_carrier_session(const std::string& session_id, const std::string& site_a,
                                    const std::string& site_b, const Policy& policy) {
  CarrierSession s;
  s.session_id = session_id;
  s.site_a = site_a;
  s.site_b = site_b;
  s.policy = policy;
  return s;
}

UserStep user_agent_step(const UserAgentState& s, const ProtocolMessage* inbound, UserContext& ctx) {
  UserStep r{s, {}};
  auto& u = r.state;
  auto send = [&](MessageKind kind, Json payload) {
    r.out.push_back(make_message(kind, u.session_id, u.role, Party::Carrier, std::move(payload)));
  };
  auto restore = [&] {
    if (u.config_snapshot) ctx.devices.set(u.trx_id, trx_config_from_json(Json::parse(*u.config_snapshot)));
  };
  auto configure = [&](const TrxMode& mode, int channel, const std::string& route_id) {
    if (!u.config_snapshot) u.config_snapshot = ctx.devices.serialize(u.trx_id);
    ctx.devices.set(u.trx_id, TrxConfig{mode.id, channel, route_id, true});
    u.mode_id = mode.id;
    advance(u, State::Configured);
    send(MessageKind::ConfigureAck, Json{{"trx_id", u.trx_id}, {"mode_id", mode.id}});
  };

  if (!inbound) {
    if (u.state != State::Idle) return r;
    advance(u, State::Registering);
    send(MessageKind::RegisterTrx, Json{{"serial", u.serial}, {"site_id", u.site_id}, {"trx_id", u.trx_id}});
    return r;
  }
  const auto& m = *inbound;
  if (is_terminal(u.state)) return r;

  try {
    if (m.session_id != u.session_id) violation("session id " + m.session_id);
    if (auto why = check_payload(m.kind, m.payload); !why.empty()) violation(why);
    const bool from_carrier = m.from == Party::Carrier;
    switch (m.kind) {
      case MessageKind::AuthResult:
        expect(from_carrier && u.state == State::Registering, m, u.state);
        if (!m.payload.at("ok").get<bool>()) {
          u.error = std::string(to_string(Errc::AuthFailed));
          advance(u, State::Errored);
          return r;
        }
        advance(u, State::Authenticated);
        if (u.role == Party::UserA) send(MessageKind::PathRequest, Json{{"site_a", u.site_id}, {"site_b", u.peer_site_id}});
        break;
      case MessageKind::CatalogRequest:
        expect(from_carrier && u.state == State::Authenticated, m, u.state);
        advance(u, State::CatalogExchanged);
        send(MessageKind::CatalogAdvert, catalog_to_json(modes::catalog_for(ctx.topology, u.trx_id)));
        break;
      case MessageKind::ProbeRequest: {
        expect(from_carrier && u.role == Party::UserB &&
                   (u.state == State::CatalogExchanged || u.state == State::Probing),
               m, u.state);
        if (u.state == State::CatalogExchanged) advance(u, State::Probing);
        const auto catalog = modes::catalog_for(ctx.topology, u.trx_id);
        const auto* probe = catalog.find(catalog.probe_mode_id);
        if (!probe) violation("probe mode missing");
        routing::Segment seg;
        seg.index = m.payload.at("segment").get<int>();
        seg.route_id = m.payload.value("route_id", "");
        seg.links = m.payload.at("links").get<std::vector<std::string>>();
        const auto meas = ctx.probe(seg, *probe, m.payload.at("channel").get<int>());
        send(MessageKind::ProbeResult, Json{{"segment", seg.index},
                                            {"snr_meas_db", units::lin_to_db(meas.snr_meas)},
                                            {"rx_power_dbm", meas.rx_power_dbm}});
        break;
      }
      case MessageKind::ModeProposal: {
        expect(from_carrier && u.role == Party::UserA && u.state == State::CatalogExchanged, m, u.state);
        const auto catalog = modes::catalog_for(ctx.topology, u.trx_id);
        std::vector<TrxMode> candidates;
        for (const auto& id : m.payload.at("mode_ids")) {
          if (const auto* mode = catalog.find(id.get<std::string>())) candidates.push_back(*mode);
        }
        const double gsnr = units::db_to_lin(m.payload.at("gsnr_db").get<double>());
        const double p_in = units::dbm_to_mw(m.payload.at("rx_power_dbm").get<double>());
        const auto mode = modes::select_mode(candidates, gsnr, noise_model(ctx.topology, u.trx_id), p_in,
                                             m.payload.value("margin_db", modes::kDefaultMarginDb));
        configure(mode, m.payload.at("channel").get<int>(), m.payload.value("route_id", ""));
        break;
      }
      case MessageKind::ConfigureTrx: {
        expect(from_carrier && (u.state == State::CatalogExchanged || u.state == State::Probing), m, u.state);
        if (!m.payload.contains("mode")) violation("ConfigureTrx without mode capability");
        const auto wanted = mode_from_json(m.payload.at("mode"));
        const auto catalog = modes::catalog_for(ctx.topology, u.trx_id);
        const auto* own = find_capability(catalog, wanted);
        if (!own) violation("mode " + wanted.id + " not supported by " + u.trx_id);
        configure(*own, m.payload.at("channel").get<int>(), m.payload.at("route_id").get<std::string>());
        break;
      }
      case MessageKind::Decision: {
        expect(from_carrier && u.state == State::Configured, m, u.state);
        if (m.payload.at("verdict") == "approve") {
          advance(u, State::Committed);
        } else {
          restore();
          advance(u, State::RolledBack);
        }
        break;
      }
      case MessageKind::Error:
        expect(from_carrier, m, u.state);
        u.error = m.payload.at("code").get<std::string>();
        restore();
        advance(u, State::Errored);
        break;
      default:
        expect(false, m, u.state);
    }
  } catch (const Error& e) {
    restore();
    u.error = std::string(to_string(e.code()));
    u.state = State::Errored;
    send(MessageKind::Error, Json{{"code", to_string(e.code())}, {"detail", e.detail()}});
  }
  return r;
}

CarrierStep carrier_step(const CarrierSession& s, const ProtocolMessage& m, CarrierContext& ctx) {
  CarrierStep r{s, {}};
  auto& c = r.state;
  if (is_terminal(c.state)) return r;

  auto send = [&](MessageKind kind, Party to, Json payload) {
    r.out.push_back(make_message(kind, c.session_id, Party::Carrier, to, std::move(payload)));
  };
  auto step_to = [&](State to) {
    advance(c, to);
    ++c.transitions;
  };
  auto probe_next = [&] {
    const auto i = c.segment_qot.size();
    send(MessageKind::ProbeRequest, Party::UserB,
         Json{{"segment", static_cast<int>(i)},
              {"route_id", c.route->id},
              {"links", c.segments[i].links},
              {"probe_mode_id", c.probe->id},
              {"channel", c.spectrum->channel_index}});
  };
  auto configure_payload = [&] {
    return Json{{"mode_id", c.mode->id},
                {"mode", mode_to_json(*c.mode)},
                {"channel", c.spectrum->channel_index},
                {"route_id", c.route->id}};
  };
  auto ack_matches = [&](Party from, const std::string& mode_id) {
    const auto* m = c.catalogs.at(from).find(mode_id);
    return m && m->same_capability(*c.mode);
  };
  auto request_commit = [&] {
    step_to(State::Configured);
    step_to(State::PendingApproval);
    send(MessageKind::CommitRequest, Party::Operator,
         Json{{"route_id", c.route->id},
              {"mode_id", c.mode->id},
              {"channel", c.spectrum->channel_index},
              {"gsnr_db", units::lin_to_db(c.gsnr_e2e)}});
  };

  try {
    if (m.session_id != c.session_id) violation("session id " + m.session_id);
    if (auto why = check_payload(m.kind, m.payload); !why.empty()) violation(why);
    switch (m.kind) {
      case MessageKind::RegisterTrx: {
        expect(is_user(m.from) && (c.state == State::Idle || c.state == State::Registering) &&
                   !c.registered.count(m.from),
               m, c.state);
        const auto serial = m.payload.at("serial").get<std::string>();
        const auto expected_site = m.from == Party::UserA ? c.site_a : c.site_b;
        const auto* trx = ctx.topology.find_trx_by_serial(serial);
        const bool ok = ctx.topology.allowlist.count(serial) && trx && trx->site_id == expected_site &&
                        m.payload.at("site_id") == expected_site;
        if (!ok) {
          send(MessageKind::AuthResult, m.from, Json{{"ok", false}, {"reason", "serial not authorised"}});
          throw Error(Errc::AuthFailed, serial);
        }
        if (c.state == State::Idle) step_to(State::Registering);
        c.registered.insert(m.from);
        c.trx_ids[m.from] = trx->id;
        send(MessageKind::AuthResult, m.from, Json{{"ok", true}, {"trx_id", trx->id}});
        if (c.registered.size() == 2) step_to(State::Authenticated);
        break;
      }
      case MessageKind::PathRequest:
        expect(m.from == Party::UserA && c.state == State::Authenticated && !c.path_requested, m, c.state);
        if (m.payload.at("site_a") != c.site_a || m.payload.at("site_b") != c.site_b) violation("path endpoints");
        c.path_requested = true;
        send(MessageKind::CatalogRequest, Party::UserA, Json::object());
        send(MessageKind::CatalogRequest, Party::UserB, Json::object());
        break;
      case MessageKind::CatalogAdvert: {
        expect(is_user(m.from) && c.state == State::Authenticated && c.path_requested && !c.catalogs.count(m.from),
               m, c.state);
        auto catalog = catalog_from_json(m.payload);
        if (catalog.trx_id != c.trx_ids.at(m.from)) violation("catalog for unexpected trx " + catalog.trx_id);
        c.catalogs.emplace(m.from, std::move(catalog));
        if (c.catalogs.size() < 2) break;
        step_to(State::CatalogExchanged);
        const auto& a = c.catalogs.at(Party::UserA);
        const auto& b = c.catalogs.at(Party::UserB);
        c.common = modes::intersect_catalogs(a, b);
        if (c.common.empty()) throw Error(Errc::NoInteroperableMode, a.trx_id + "/" + b.trx_id);
        c.probe = modes::probe_plan(a, b);

        const auto routes = routing::enumerate_routes(ctx.topology, c.site_a, c.site_b, c.policy.max_pops);
        const auto occupancy = ctx.occupancy.snapshot();
        for (const auto& route : routes) {
          if (c.policy.route_id && route.id != *c.policy.route_id) continue;
          try {
            c.spectrum = routing::assign_spectrum(ctx.topology, route, occupancy);
            c.route = route;
            break;
          } catch (const Error& e) {
            if (e.code() != Errc::SpectrumExhausted || c.policy.route_id) throw;
          }
        }
        if (!c.route) {
          if (c.policy.route_id) throw Error(Errc::NotFound, "route " + *c.policy.route_id);
          throw Error(Errc::SpectrumExhausted, c.site_a + "-" + c.site_b);
        }
        c.segments = routing::decompose_segments(ctx.topology, *c.route, c.policy.segments);
        step_to(State::Probing);
        probe_next();
        break;
      }
      case MessageKind::ProbeResult: {
        expect(m.from == Party::UserB && c.state == State::Probing &&
                   m.payload.at("segment").get<int>() == static_cast<int>(c.segment_qot.size()),
               m, c.state);
        const double snr = units::db_to_lin(m.payload.at("snr_meas_db").get<double>());
        const double rx_dbm = m.payload.at("rx_power_dbm").get<double>();
        const auto& model = noise_model(ctx.topology, c.trx_ids.at(Party::UserB));
        qot::SegmentQot q;
        q.segment_id = c.route->id + "#" + std::to_string(c.segment_qot.size());
        q.snr_meas = snr;
        q.gsnr = qot::deduce_segment_gsnr(snr, model, units::dbm_to_mw(rx_dbm));
        q.probe_mode = c.probe->id;
        c.segment_qot.push_back(q);
        c.rx_power_dbm = rx_dbm;
        if (c.segment_qot.size() < c.segments.size()) {
          probe_next();
          break;
        }
        c.gsnr_e2e = qot::concatenate_gsnr(std::span<const qot::SegmentQot>(c.segment_qot));
        step_to(State::QotEstimated);
        if (c.policy.selection == ModeSelectionSide::Carrier) {
          c.mode = modes::select_mode(c.common, c.gsnr_e2e, model, units::dbm_to_mw(rx_dbm), c.policy.margin_db);
          step_to(State::ModeSelected);
          send(MessageKind::ConfigureTrx, Party::UserA, configure_payload());
          send(MessageKind::ConfigureTrx, Party::UserB, configure_payload());
        } else {
          Json ids = Json::array();
          for (const auto& mode : c.common) ids.push_back(mode.id);
          send(MessageKind::ModeProposal, Party::UserA,
               Json{{"mode_ids", ids},
                    {"gsnr_db", units::lin_to_db(c.gsnr_e2e)},
                    {"rx_power_dbm", rx_dbm},
                    {"channel", c.spectrum->channel_index},
                    {"route_id", c.route->id},
                    {"margin_db", c.policy.margin_db}});
        }
        break;
      }
      case MessageKind::ConfigureAck: {
        expect(is_user(m.from) && !c.acks.count(m.from), m, c.state);
        const auto mode_id = m.payload.at("mode_id").get<std::string>();
        if (c.state == State::QotEstimated && c.policy.selection == ModeSelectionSide::User) {
          expect(m.from == Party::UserA, m, c.state);
          const auto* chosen = c.catalogs.at(Party::UserA).find(mode_id);
          const bool common = chosen && std::any_of(c.common.begin(), c.common.end(),
                                                    [&](const TrxMode& x) { return x.id == chosen->id; });
          if (!common) violation("mode " + mode_id + " was not proposed");
          c.mode = *chosen;
          step_to(State::ModeSelected);
          c.acks.insert(m.from);
          send(MessageKind::ConfigureTrx, Party::UserB, configure_payload());
          break;
        }
        expect(c.state == State::ModeSelected, m, c.state);
        if (!ack_matches(m.from, mode_id)) violation("ack for mode " + mode_id);
        c.acks.insert(m.from);
        if (c.acks.size() == 2) request_commit();
        break;
      }
      case MessageKind::Decision: {
        expect(m.from == Party::Operator && c.state == State::PendingApproval, m, c.state);
        const auto verdict = m.payload.at("verdict").get<std::string>();
        if (verdict == "approve") {
          ctx.occupancy.claim(routing::carrier_links(ctx.topology, *c.route), c.spectrum->channel_index);
          c.occupancy_claimed = true;
          for (auto& [link, confirmed] : c.spectrum->confirmed) confirmed = true;
          step_to(State::Committed);
        } else {
          step_to(State::RolledBack);
        }
        send(MessageKind::Decision, Party::UserA, m.payload);
        send(MessageKind::Decision, Party::UserB, m.payload);
        break;
      }
      case MessageKind::Error: {
        expect(is_user(m.from), m, c.state);
        c.error_code = m.payload.at("code").get<std::string>();
        c.error_detail = m.payload.at("detail").get<std::string>();
        step_to(State::Errored);
        const Party other = m.from == Party::UserA ? Party::UserB : Party::UserA;
        send(MessageKind::Error, other, m.payload);
        break;
      }
      default:
        expect(false, m, c.state);
    }
  } catch (const Error& e) {
    c.error_code = std::string(to_string(e.code()));
    c.error_detail = e.detail();
    c.state = State::Errored;
    ++c.transitions;
    const Json payload{{"code", c.error_code}, {"detail", c.error_detail}};
    send(MessageKind::Error, Party::UserA, payload);
    send(MessageKind::Error, Party::UserB, payload);
  }
  return r;
}

Json to_json(const SessionLogEntry& e) {
  return Json{{"seq", e.seq},
              {"timestamp", e.timestamp},
              {"direction", e.direction},
              {"message", to_json(e.message)},
              {"state", to_string(e.resulting_state)}};
}

SessionLogEntry log_entry_from_json(const Json& j) {
  SessionLogEntry e;
  try {
    e.seq = j.at("seq").get<std::uint64_t>();
    e.timestamp = j.at("timestamp").get<std::uint64_t>();
    e.direction = j.at("direction").get<std::string>();
    e.message = message_from_json(j.at("message"));
    const auto st = parse_state(j.at("state").get<std::string>());
    if (!st) throw Error(Errc::ProtocolViolation, "unknown state");
    e.resulting_state = *st;
  } catch (const Json::exception& ex) {
    throw Error(Errc::ProtocolViolation, std::string("log entry: ") + ex.what());
  }
  return e;
}

Session::Session(std::string id, const netmodel::Topology& topology, OccupancyCoordinator& occupancy,
                 DeviceRegistry& devices, ProbeFn probe, const std::string& site_a, const std::string& site_b,
                 Policy policy)
    : id_(std::move(id)),
      topology_(topology),
      occupancy_(occupancy),
      devices_(devices),
      probe_(std::move(probe)),
      ua_a_(make_user_agent(topology, Party::UserA, id_, site_a, site_b)),
      ua_b_(make_user_agent(topology, Party::UserB, id_, site_b, site_a)),
      carrier_(make_carrier_session(id_, site_a, site_b, policy)) {}

void Session::start(const Scheduler& scheduler) {
  UserContext uctx{topology_, devices_, probe_};
  for (auto* ua : {&ua_a_, &ua_b_}) {
    auto step = user_agent_step(*ua, nullptr, uctx);
    *ua = std::move(step.state);
    for (auto& m : step.out) queue_.push_back(std::move(m));
  }
  pump(scheduler);
}

void Session::decide(Verdict verdict, const std::string& reason, const Scheduler& scheduler) {
  if (carrier_.state != State::PendingApproval) {
    throw Error(Errc::NotPending, id_ + " is " + std::string(to_string(carrier_.state)));
  }
  queue_.push_back(make_message(MessageKind::Decision, id_, Party::Operator, Party::Carrier,
                                Json{{"verdict", verdict == Verdict::Approve ? "approve" : "rollback"},
                                     {"reason", reason}}));
  pump(scheduler);
}

void Session::pump(const Scheduler& scheduler) {
  while (true) {
    while (!queue_.empty()) {
      const std::size_t i = scheduler ? std::min(scheduler(queue_.size()), queue_.size() - 1) : 0;
      const auto m = queue_[i];
      queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(i));
      deliver(m);
    }
    // Nothing in flight: a session still awaiting a message would time out.
    if (is_terminal(carrier_.state) || carrier_.state == State::PendingApproval) break;
    carrier_.error_code = std::string(to_string(Errc::Timeout));
    carrier_.error_detail = "no message in flight in state " + std::string(to_string(carrier_.state));
    carrier_.state = State::Errored;
    ++carrier_.transitions;
    const Json payload{{"code", carrier_.error_code}, {"detail", carrier_.error_detail}};
    queue_.push_back(make_message(MessageKind::Error, id_, Party::Carrier, Party::UserA, payload));
    queue_.push_back(make_message(MessageKind::Error, id_, Party::Carrier, Party::UserB, payload));
  }
}

void Session::deliver(const ProtocolMessage& m) {
  std::vector<ProtocolMessage> out;
  State resulting = State::Idle;
  if (m.to == Party::Carrier) {
    CarrierContext cctx{topology_, occupancy_};
    auto step = carrier_step(carrier_, m, cctx);
    carrier_ = std::move(step.state);
    out = std::move(step.out);
    resulting = carrier_.state;
  } else if (m.to == Party::Operator) {
    if (m.kind == MessageKind::CommitRequest && carrier_.policy.auto_approve) {
      out.push_back(make_message(MessageKind::Decision, id_, Party::Operator, Party::Carrier,
                                 Json{{"verdict", "approve"}, {"reason", "auto_approve"}}));
    }
    resulting = carrier_.state;
  } else {
    auto& ua = m.to == Party::UserA ? ua_a_ : ua_b_;
    UserContext uctx{topology_, devices_, probe_};
    auto step = user_agent_step(ua, &m, uctx);
    ua = std::move(step.state);
    out = std::move(step.out);
    resulting = ua.state;
  }
  SessionLogEntry e;
  e.seq = log_.size() + 1;
  e.timestamp = e.seq;
  e.direction = std::string(to_string(m.from)) + "->" + std::string(to_string(m.to));
  e.message = m;
  e.resulting_state = resulting;
  log_.push_back(std::move(e));
  for (auto& o : out) queue_.push_back(std::move(o));
}

std::vector<std::string> Session::log_lines() const {
  std::vector<std::string> lines;
  for (const auto& e : log_) lines.push_back(to_json(e).dump());
  return lines;
}

Json Session::summary() const {
  Json j{{"session_id", id_},
         {"state", to_string(carrier_.state)},
         {"site_a", carrier_.site_a},
         {"site_b", carrier_.site_b},
         {"policy", to_json(carrier_.policy)},
         {"log_entries", log_.size()}};
  j["route_id"] = carrier_.route ? Json(carrier_.route->id) : Json(nullptr);
  j["mode_id"] = carrier_.mode ? Json(carrier_.mode->id) : Json(nullptr);
  j["channel"] = carrier_.spectrum ? Json(carrier_.spectrum->channel_index) : Json(nullptr);
  Json segs = Json::array();
  for (const auto& q : carrier_.segment_qot) {
    segs.push_back({{"segment_id", q.segment_id},
                    {"snr_meas_db", units::lin_to_db(q.snr_meas)},
                    {"gsnr_db", units::lin_to_db(q.gsnr)}});
  }
  j["segments"] = segs;
  j["gsnr_e2e_db"] = carrier_.segment_qot.empty() ? Json(nullptr) : Json(units::lin_to_db(carrier_.gsnr_e2e));
  if (!carrier_.error_code.empty()) j["error"] = {{"code", carrier_.error_code}, {"detail", carrier_.error_detail}};
  return j;
}

ProvisioningResult run_provisioning(const netmodel::Topology& topology, OccupancyCoordinator& occupancy,
                                    DeviceRegistry& devices, const ProbeFn& probe, const std::string& site_a,
                                    const std::string& site_b, const Policy& policy, const std::string& session_id) {
  Session s(session_id, topology, occupancy, devices, probe, site_a, site_b, policy);
  s.start();
  return {s.state(), s.carrier().error_code, s.carrier().error_detail, s.log()};
}

ProbeFn fixed_probe(std::vector<double> segment_gsnr_db, const qot::TrxNoiseModel& rx_model, double rx_power_dbm) {
  return [gsnr_db = std::move(segment_gsnr_db), rx_model, rx_power_dbm](const routing::Segment& seg,
                                                                        const modes::TrxMode&, int) {
    if (seg.index < 0 || static_cast<std::size_t>(seg.index) >= gsnr_db.size()) {
      throw Error(Errc::MissingSegmentData, "segment " + std::to_string(seg.index));
    }
    const double gsnr = units::db_to_lin(gsnr_db[static_cast<std::size_t>(seg.index)]);
    return ProbeMeasurement{qot::total_snr(gsnr, rx_model, units::dbm_to_mw(rx_power_dbm)), rx_power_dbm};
  };
}

}  // namespace dcx::protocol
