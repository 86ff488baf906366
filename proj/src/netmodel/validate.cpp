#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "dcx/netmodel/topology.hpp"

namespace dcx::netmodel {

namespace {

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

void check_span(const FiberSpan& s, const std::string& path, std::vector<Violation>& out) {
  if (!(s.length_km > 0.0 && s.length_km <= 500.0)) out.push_back({path, "span-length"});
  if (!(s.attenuation_db_per_km >= 0.1 && s.attenuation_db_per_km <= 1.0)) out.push_back({path, "span-attenuation"});
  if (!(s.conn_in_db >= 0.0 && s.conn_in_db <= 5.0 && s.conn_out_db >= 0.0 && s.conn_out_db <= 5.0)) {
    out.push_back({path, "span-connector-loss"});
  }
  if (!(s.gamma_per_w_km >= 0.0)) out.push_back({path, "span-gamma"});
}

void check_edfa(const EdfaUnit& e, const std::string& path, std::vector<Violation>& out) {
  if (e.gain_range_db.min > e.gain_range_db.max || !e.gain_range_db.contains(e.gain_db)) {
    out.push_back({path + "(" + e.id + ")", "gain-target-in-range"});
  }
  if (e.tilt_range_db.min > e.tilt_range_db.max || !e.tilt_range_db.contains(e.tilt_db)) {
    out.push_back({path + "(" + e.id + ")", "tilt-in-range"});
  }
  bool curve_ok = e.nf_curve.size() >= 2;
  for (std::size_t i = 1; curve_ok && i < e.nf_curve.size(); ++i) {
    curve_ok = e.nf_curve[i].gain_db > e.nf_curve[i - 1].gain_db;
  }
  if (!curve_ok) out.push_back({path + "(" + e.id + ")", "nf-curve"});
}

}  // namespace

std::vector<Violation> validate_topology(const Topology& t) {
  std::vector<Violation> out;

  std::map<std::string, std::size_t> site_index;
  for (std::size_t i = 0; i < t.sites.size(); ++i) {
    const auto& s = t.sites[i];
    if (s.id.empty() || !site_index.emplace(s.id, i).second) out.push_back({idx("sites", i), "unique-id"});
    if (s.hosts_pop && s.kind != SiteKind::UDC) out.push_back({idx("sites", i), "hosts-pop-requires-udc"});
  }

  std::set<std::string> trx_ids;
  for (std::size_t i = 0; i < t.trxs.size(); ++i) {
    const auto& x = t.trxs[i];
    const auto path = idx("trxs", i);
    if (x.id.empty() || !trx_ids.insert(x.id).second) out.push_back({path, "unique-id"});
    if (x.serial.empty()) out.push_back({path + ".serial", "serial-non-empty"});
    if (!t.find_site(x.site_id)) out.push_back({path + ".site_id", "site-exists"});
    if (!t.find_catalog(x.catalog_id)) out.push_back({path + ".catalog_id", "catalog-exists"});
    if (!t.find_trx_model(x.noise_model_id)) out.push_back({path + ".noise_model_id", "noise-model-exists"});
  }
  for (std::size_t i = 0; i < t.sites.size(); ++i) {
    for (const auto& id : t.sites[i].trx_ids) {
      const auto* trx = t.find_trx(id);
      if (!trx || trx->site_id != t.sites[i].id) out.push_back({idx("sites", i) + ".trx_ids", "trx-ref"});
    }
  }

  std::set<std::string> link_ids;
  std::set<std::string> element_ids;
  std::set<std::string> pops_with_carrier_link;
  for (std::size_t i = 0; i < t.links.size(); ++i) {
    const auto& l = t.links[i];
    const auto path = idx("links", i);
    if (l.id.empty() || !link_ids.insert(l.id).second) out.push_back({path, "unique-id"});

    const auto* a = t.find_site(l.endpoints[0]);
    const auto* b = t.find_site(l.endpoints[1]);
    if (!a || !b) {
      out.push_back({path + ".endpoints", "endpoint-exists"});
    } else if (a->id == b->id) {
      out.push_back({path + ".endpoints", "distinct-endpoints"});
    } else if (l.kind == LinkKind::CarrierLink) {
      if (a->kind != SiteKind::POP || b->kind != SiteKind::POP) {
        out.push_back({path + ".endpoints", "carrier-link-joins-pops"});
      } else {
        pops_with_carrier_link.insert(a->id);
        pops_with_carrier_link.insert(b->id);
      }
    } else if ((a->kind == SiteKind::POP) == (b->kind == SiteKind::POP)) {
      out.push_back({path + ".endpoints", "aal-attaches-pop"});
    }

    if (l.elements.empty()) out.push_back({path + ".elements", "non-empty"});
    for (std::size_t j = 0; j < l.elements.size(); ++j) {
      const auto epath = idx(path + ".elements", j);
      if (const auto* span = std::get_if<FiberSpan>(&l.elements[j])) {
        check_span(*span, epath, out);
      } else if (const auto* amp = std::get_if<EdfaUnit>(&l.elements[j])) {
        if (amp->id.empty() || !element_ids.insert(amp->id).second) out.push_back({epath, "unique-id"});
        check_edfa(*amp, epath, out);
      } else if (const auto* roadm = std::get_if<RoadmUnit>(&l.elements[j])) {
        if (roadm->id.empty() || !element_ids.insert(roadm->id).second) out.push_back({epath, "unique-id"});
        if (!(roadm->insertion_loss_db >= 0.0 && roadm->insertion_loss_db <= 25.0)) {
          out.push_back({epath, "roadm-insertion-loss"});
        }
      }
    }
  }

  // A lone POP has nothing to link to.
  const auto pop_count = std::count_if(t.sites.begin(), t.sites.end(), [](const Site& s) { return s.kind == SiteKind::POP; });
  for (std::size_t i = 0; i < t.sites.size() && pop_count > 1; ++i) {
    if (t.sites[i].kind == SiteKind::POP && !pops_with_carrier_link.count(t.sites[i].id)) {
      out.push_back({idx("sites", i), "pop-has-carrier-link"});
    }
  }

  const auto& g = t.grid;
  if (!(g.count > 0 && g.count <= 128)) out.push_back({"grid.count", "grid-count"});
  if (!(g.center_thz > 0.0 && g.symbol_rate_gbaud > 0.0)) out.push_back({"grid", "grid-positive"});
  if (!(g.spacing_ghz >= g.symbol_rate_gbaud)) out.push_back({"grid.spacing_ghz", "grid-spacing"});

  std::set<std::string> catalog_ids;
  for (std::size_t i = 0; i < t.catalogs.size(); ++i) {
    const auto& c = t.catalogs[i];
    const auto path = idx("catalogs", i);
    if (c.id.empty() || !catalog_ids.insert(c.id).second) out.push_back({path, "unique-id"});
    std::set<std::string> mode_ids;
    for (std::size_t j = 0; j < c.modes.size(); ++j) {
      const auto& m = c.modes[j];
      const auto mpath = idx(path + ".modes", j);
      if (m.id.empty() || !mode_ids.insert(m.id).second) out.push_back({mpath, "unique-mode-id"});
      if (!(m.fec_threshold_ber > 0.0 && m.fec_threshold_ber < 0.375)) out.push_back({mpath, "fec-threshold"});
      if (!(m.min_rx_dbm < m.max_rx_dbm)) out.push_back({mpath, "rx-window"});
      if (!(m.symbol_rate_gbaud > 0.0 && m.bitrate_gbps > 0.0)) out.push_back({mpath, "mode-positive"});
    }
    if (!mode_ids.count(c.probe_mode_id)) out.push_back({path + ".probe_mode_id", "probe-mode-present"});
  }

  std::set<std::string> model_ids;
  for (std::size_t i = 0; i < t.trx_models.size(); ++i) {
    const auto& m = t.trx_models[i];
    if (m.id.empty() || !model_ids.insert(m.id).second) out.push_back({idx("trx_models", i), "unique-id"});
    if (!(m.model.snr_trx_const > 0.0 && m.model.snr_p_coeff > 0.0)) {
      out.push_back({idx("trx_models", i), "positive-terms"});
    }
  }

  // POP graph over carrier links must be connected.
  std::vector<std::size_t> pops;
  for (std::size_t i = 0; i < t.sites.size(); ++i) {
    if (t.sites[i].kind == SiteKind::POP) pops.push_back(i);
  }
  if (pops.size() > 1) {
    UnionFind uf(t.sites.size());
    for (const auto& l : t.links) {
      if (l.kind != LinkKind::CarrierLink) continue;
      auto ia = site_index.find(l.endpoints[0]);
      auto ib = site_index.find(l.endpoints[1]);
      if (ia != site_index.end() && ib != site_index.end()) uf.unite(ia->second, ib->second);
    }
    const auto root = uf.find(pops.front());
    bool connected = std::all_of(pops.begin(), pops.end(), [&](std::size_t p) { return uf.find(p) == root; });
    if (!connected) out.push_back({"topology", "pop-graph-connectivity"});
  }
  return out;
}

}  // namespace dcx::netmodel
