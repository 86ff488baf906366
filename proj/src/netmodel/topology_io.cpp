// JSON topology documents. Field names are normative and carry their units;
// unknown keys are rejected at every level.

#include <cmath>
#include <initializer_list>
#include <limits>

#include "json.hpp"

#include "dcx/error.hpp"
#include "dcx/netmodel/topology.hpp"

namespace dcx::netmodel {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(Errc::ParseError, path + ": expected object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw Error(Errc::ParseError, path + "." + key + ": unknown key");
  }
}

const json& field(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(Errc::ParseError, path + "." + key + ": missing");
  return *it;
}

double number(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (!v.is_number()) throw Error(Errc::ParseError, path + "." + key + ": expected number");
  return v.get<double>();
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? number(obj, path, key) : fallback;
}

// null encodes an absent (infinite) SNR term.
double snr_term(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (!v.is_number()) throw Error(Errc::ParseError, path + "." + key + ": expected number or null");
  return v.get<double>();
}

std::string text(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (!v.is_string()) throw Error(Errc::ParseError, path + "." + key + ": expected string");
  return v.get<std::string>();
}

bool boolean_or(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) throw Error(Errc::ParseError, path + "." + key + ": expected boolean");
  return v.get<bool>();
}

const json& array(const json& obj, const std::string& path, const char* key) {
  const auto& v = field(obj, path, key);
  if (!v.is_array()) throw Error(Errc::ParseError, path + "." + key + ": expected array");
  return v;
}

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

DbRange read_range(const json& obj, const std::string& path, const char* key) {
  const auto& v = array(obj, path, key);
  if (v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw Error(Errc::ParseError, path + "." + key + ": expected [min, max]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

SiteKind read_site_kind(const std::string& s, const std::string& path) {
  if (s == "UDC") return SiteKind::UDC;
  if (s == "SDC") return SiteKind::SDC;
  if (s == "POP") return SiteKind::POP;
  throw Error(Errc::ParseError, path + ".kind: unknown site kind '" + s + "'");
}

Modulation read_modulation(const std::string& s, const std::string& path) {
  if (s == "QPSK") return Modulation::QPSK;
  if (s == "16QAM") return Modulation::QAM16;
  throw Error(Errc::ParseError, path + ".modulation: unknown modulation '" + s + "'");
}

Site read_site(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "kind", "hosts_pop", "trx_ids"});
  Site s;
  s.id = text(j, path, "id");
  s.kind = read_site_kind(text(j, path, "kind"), path);
  s.hosts_pop = boolean_or(j, path, "hosts_pop", false);
  if (j.contains("trx_ids")) {
    const auto& ids = array(j, path, "trx_ids");
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!ids[i].is_string()) throw Error(Errc::ParseError, idx(path + ".trx_ids", i) + ": expected string");
      s.trx_ids.push_back(ids[i].get<std::string>());
    }
  }
  return s;
}

TrxUnit read_trx(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "serial", "site_id", "catalog_id", "noise_model_id"});
  return TrxUnit{text(j, path, "id"), text(j, path, "serial"), text(j, path, "site_id"),
                 text(j, path, "catalog_id"), text(j, path, "noise_model_id")};
}

LineElement read_element(const json& j, const std::string& path) {
  const auto type = text(j, path, "type");
  if (type == "span") {
    check_keys(j, path, {"type", "length_km", "attenuation_db_per_km", "dispersion_ps_nm_km", "gamma_per_w_km",
                         "conn_in_db", "conn_out_db", "loss_tilt_db"});
    FiberSpan s;
    s.length_km = number(j, path, "length_km");
    s.attenuation_db_per_km = number_or(j, path, "attenuation_db_per_km", s.attenuation_db_per_km);
    s.dispersion_ps_nm_km = number_or(j, path, "dispersion_ps_nm_km", s.dispersion_ps_nm_km);
    s.gamma_per_w_km = number_or(j, path, "gamma_per_w_km", s.gamma_per_w_km);
    s.conn_in_db = number_or(j, path, "conn_in_db", 0.0);
    s.conn_out_db = number_or(j, path, "conn_out_db", 0.0);
    s.loss_tilt_db = number_or(j, path, "loss_tilt_db", 0.0);
    return s;
  }
  if (type == "edfa") {
    check_keys(j, path, {"type", "id", "gain_db", "tilt_db", "nf_curve", "gain_range_db", "tilt_range_db",
                         "max_total_out_dbm", "monitors"});
    EdfaUnit e;
    e.id = text(j, path, "id");
    e.gain_db = number(j, path, "gain_db");
    e.tilt_db = number_or(j, path, "tilt_db", 0.0);
    const auto& curve = array(j, path, "nf_curve");
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const auto p = idx(path + ".nf_curve", i);
      check_keys(curve[i], p, {"gain_db", "nf_db"});
      e.nf_curve.push_back({number(curve[i], p, "gain_db"), number(curve[i], p, "nf_db")});
    }
    e.gain_range_db = read_range(j, path, "gain_range_db");
    e.tilt_range_db = j.contains("tilt_range_db") ? read_range(j, path, "tilt_range_db") : DbRange{0.0, 0.0};
    e.max_total_out_dbm = number(j, path, "max_total_out_dbm");
    if (j.contains("monitors")) {
      const auto& m = j.at("monitors");
      check_keys(m, path + ".monitors", {"input", "output"});
      e.monitors.input = boolean_or(m, path + ".monitors", "input", true);
      e.monitors.output = boolean_or(m, path + ".monitors", "output", true);
    }
    return e;
  }
  if (type == "roadm") {
    check_keys(j, path, {"type", "id", "insertion_loss_db"});
    return RoadmUnit{text(j, path, "id"), number(j, path, "insertion_loss_db")};
  }
  throw Error(Errc::ParseError, path + ".type: unknown element type '" + type + "'");
}

OpticalLink read_link(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "kind", "endpoints", "elements", "params_known"});
  OpticalLink link;
  link.id = text(j, path, "id");
  const auto kind = text(j, path, "kind");
  if (kind == "AAL") {
    link.kind = LinkKind::AAL;
  } else if (kind == "CarrierLink") {
    link.kind = LinkKind::CarrierLink;
  } else {
    throw Error(Errc::ParseError, path + ".kind: unknown link kind '" + kind + "'");
  }
  const auto& ends = array(j, path, "endpoints");
  if (ends.size() != 2 || !ends[0].is_string() || !ends[1].is_string()) {
    throw Error(Errc::ParseError, path + ".endpoints: expected two site ids");
  }
  link.endpoints = {ends[0].get<std::string>(), ends[1].get<std::string>()};
  const auto& elems = array(j, path, "elements");
  for (std::size_t i = 0; i < elems.size(); ++i) link.elements.push_back(read_element(elems[i], idx(path + ".elements", i)));
  link.params_known = boolean_or(j, path, "params_known", link.kind != LinkKind::AAL);
  return link;
}

ChannelGrid read_grid(const json& j) {
  check_keys(j, "grid", {"center_thz", "spacing_ghz", "count", "symbol_rate_gbaud"});
  ChannelGrid g;
  g.center_thz = number(j, "grid", "center_thz");
  g.spacing_ghz = number(j, "grid", "spacing_ghz");
  const auto& count = field(j, "grid", "count");
  if (!count.is_number_integer()) throw Error(Errc::ParseError, "grid.count: expected integer");
  g.count = count.get<int>();
  g.symbol_rate_gbaud = number(j, "grid", "symbol_rate_gbaud");
  return g;
}

ModeSpec read_mode(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "bitrate_gbps", "modulation", "symbol_rate_gbaud", "fec", "fec_threshold_ber",
                       "min_rx_dbm", "max_rx_dbm"});
  ModeSpec m;
  m.id = text(j, path, "id");
  m.bitrate_gbps = number(j, path, "bitrate_gbps");
  m.modulation = read_modulation(text(j, path, "modulation"), path);
  m.symbol_rate_gbaud = number(j, path, "symbol_rate_gbaud");
  m.fec = text(j, path, "fec");
  m.fec_threshold_ber = number_or(j, path, "fec_threshold_ber", m.fec_threshold_ber);
  m.min_rx_dbm = number(j, path, "min_rx_dbm");
  m.max_rx_dbm = number(j, path, "max_rx_dbm");
  return m;
}

CatalogSpec read_catalog(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "probe_mode_id", "modes"});
  CatalogSpec c;
  c.id = text(j, path, "id");
  c.probe_mode_id = text(j, path, "probe_mode_id");
  const auto& modes = array(j, path, "modes");
  for (std::size_t i = 0; i < modes.size(); ++i) c.modes.push_back(read_mode(modes[i], idx(path + ".modes", i)));
  return c;
}

TrxModelSpec read_trx_model(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "snr_trx_const", "snr_p_coeff_per_mw"});
  TrxModelSpec m;
  m.id = text(j, path, "id");
  m.model.snr_trx_const = snr_term(j, path, "snr_trx_const");
  m.model.snr_p_coeff = snr_term(j, path, "snr_p_coeff_per_mw");
  return m;
}

json snr_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

json element_json(const LineElement& e) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FiberSpan>) {
          return {{"type", "span"},
                  {"length_km", x.length_km},
                  {"attenuation_db_per_km", x.attenuation_db_per_km},
                  {"dispersion_ps_nm_km", x.dispersion_ps_nm_km},
                  {"gamma_per_w_km", x.gamma_per_w_km},
                  {"conn_in_db", x.conn_in_db},
                  {"conn_out_db", x.conn_out_db},
                  {"loss_tilt_db", x.loss_tilt_db}};
        } else if constexpr (std::is_same_v<T, EdfaUnit>) {
          json curve = json::array();
          for (const auto& p : x.nf_curve) curve.push_back({{"gain_db", p.gain_db}, {"nf_db", p.nf_db}});
          return {{"type", "edfa"},
                  {"id", x.id},
                  {"gain_db", x.gain_db},
                  {"tilt_db", x.tilt_db},
                  {"nf_curve", curve},
                  {"gain_range_db", {x.gain_range_db.min, x.gain_range_db.max}},
                  {"tilt_range_db", {x.tilt_range_db.min, x.tilt_range_db.max}},
                  {"max_total_out_dbm", x.max_total_out_dbm},
                  {"monitors", {{"input", x.monitors.input}, {"output", x.monitors.output}}}};
        } else {
          return {{"type", "roadm"}, {"id", x.id}, {"insertion_loss_db", x.insertion_loss_db}};
        }
      },
      e);
}

}  // namespace

Topology load_topology(std::string_view text_doc) {
  json doc;
  try {
    doc = json::parse(text_doc);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
  check_keys(doc, "$", {"sites", "trxs", "links", "grid", "allowlist", "catalogs", "trx_models"});

  Topology t;
  const auto& sites = array(doc, "$", "sites");
  for (std::size_t i = 0; i < sites.size(); ++i) t.sites.push_back(read_site(sites[i], idx("sites", i)));
  if (doc.contains("trxs")) {
    const auto& trxs = array(doc, "$", "trxs");
    for (std::size_t i = 0; i < trxs.size(); ++i) t.trxs.push_back(read_trx(trxs[i], idx("trxs", i)));
  }
  const auto& links = array(doc, "$", "links");
  for (std::size_t i = 0; i < links.size(); ++i) t.links.push_back(read_link(links[i], idx("links", i)));
  t.grid = read_grid(field(doc, "$", "grid"));
  if (doc.contains("allowlist")) {
    const auto& allow = array(doc, "$", "allowlist");
    for (std::size_t i = 0; i < allow.size(); ++i) {
      if (!allow[i].is_string()) throw Error(Errc::ParseError, idx("allowlist", i) + ": expected string");
      t.allowlist.insert(allow[i].get<std::string>());
    }
  }
  if (doc.contains("catalogs")) {
    const auto& cats = array(doc, "$", "catalogs");
    for (std::size_t i = 0; i < cats.size(); ++i) t.catalogs.push_back(read_catalog(cats[i], idx("catalogs", i)));
  }
  if (doc.contains("trx_models")) {
    const auto& models = array(doc, "$", "trx_models");
    for (std::size_t i = 0; i < models.size(); ++i) {
      t.trx_models.push_back(read_trx_model(models[i], idx("trx_models", i)));
    }
  }

  const auto violations = validate_topology(t);
  if (!violations.empty()) throw Error(Errc::ValidationError, violations.front().entity);
  return t;
}

std::string serialize_topology(const Topology& t) {
  json doc;
  doc["sites"] = json::array();
  for (const auto& s : t.sites) {
    doc["sites"].push_back(
        {{"id", s.id}, {"kind", to_string(s.kind)}, {"hosts_pop", s.hosts_pop}, {"trx_ids", s.trx_ids}});
  }
  doc["trxs"] = json::array();
  for (const auto& x : t.trxs) {
    doc["trxs"].push_back({{"id", x.id},
                           {"serial", x.serial},
                           {"site_id", x.site_id},
                           {"catalog_id", x.catalog_id},
                           {"noise_model_id", x.noise_model_id}});
  }
  doc["links"] = json::array();
  for (const auto& l : t.links) {
    json elems = json::array();
    for (const auto& e : l.elements) elems.push_back(element_json(e));
    doc["links"].push_back({{"id", l.id},
                            {"kind", to_string(l.kind)},
                            {"endpoints", {l.endpoints[0], l.endpoints[1]}},
                            {"elements", elems},
                            {"params_known", l.params_known}});
  }
  doc["grid"] = {{"center_thz", t.grid.center_thz},
                 {"spacing_ghz", t.grid.spacing_ghz},
                 {"count", t.grid.count},
                 {"symbol_rate_gbaud", t.grid.symbol_rate_gbaud}};
  doc["allowlist"] = t.allowlist;
  doc["catalogs"] = json::array();
  for (const auto& c : t.catalogs) {
    json modes = json::array();
    for (const auto& m : c.modes) {
      modes.push_back({{"id", m.id},
                       {"bitrate_gbps", m.bitrate_gbps},
                       {"modulation", to_string(m.modulation)},
                       {"symbol_rate_gbaud", m.symbol_rate_gbaud},
                       {"fec", m.fec},
                       {"fec_threshold_ber", m.fec_threshold_ber},
                       {"min_rx_dbm", m.min_rx_dbm},
                       {"max_rx_dbm", m.max_rx_dbm}});
    }
    doc["catalogs"].push_back({{"id", c.id}, {"probe_mode_id", c.probe_mode_id}, {"modes", modes}});
  }
  doc["trx_models"] = json::array();
  for (const auto& m : t.trx_models) {
    doc["trx_models"].push_back({{"id", m.id},
                                 {"snr_trx_const", snr_json(m.model.snr_trx_const)},
                                 {"snr_p_coeff_per_mw", snr_json(m.model.snr_p_coeff)}});
  }
  return doc.dump(2);
}

}  // namespace dcx::netmodel
