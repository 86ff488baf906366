#include "dcx/netmodel/topology.hpp"

#include <algorithm>
#include <cmath>

#include "dcx/error.hpp"

namespace dcx::netmodel {

std::string_view to_string(SiteKind kind) noexcept {
  switch (kind) {
    case SiteKind::UDC: return "UDC";
    case SiteKind::SDC: return "SDC";
    case SiteKind::POP: return "POP";
  }
  return "?";
}

std::string_view to_string(LinkKind kind) noexcept {
  return kind == LinkKind::AAL ? "AAL" : "CarrierLink";
}

std::string_view to_string(Modulation m) noexcept {
  return m == Modulation::QPSK ? "QPSK" : "16QAM";
}

double EdfaUnit::nf_at(double gain) const {
  if (nf_curve.empty()) return 0.0;
  if (nf_curve.size() == 1) return nf_curve.front().nf_db;
  // Clamped extrapolation: the end segments are extended linearly.
  std::size_t hi = 1;
  while (hi + 1 < nf_curve.size() && gain > nf_curve[hi].gain_db) ++hi;
  const auto& a = nf_curve[hi - 1];
  const auto& b = nf_curve[hi];
  const double t = (gain - a.gain_db) / (b.gain_db - a.gain_db);
  return a.nf_db + t * (b.nf_db - a.nf_db);
}

double OpticalLink::length_km() const {
  double total = 0.0;
  for (const auto& e : elements) {
    if (const auto* span = std::get_if<FiberSpan>(&e)) total += span->length_km;
  }
  return total;
}

std::vector<const EdfaUnit*> OpticalLink::edfas() const {
  std::vector<const EdfaUnit*> out;
  for (const auto& e : elements) {
    if (const auto* amp = std::get_if<EdfaUnit>(&e)) out.push_back(amp);
  }
  return out;
}

EdfaUnit* OpticalLink::find_edfa(std::string_view edfa_id) {
  for (auto& e : elements) {
    if (auto* amp = std::get_if<EdfaUnit>(&e); amp && amp->id == edfa_id) return amp;
  }
  return nullptr;
}

const EdfaUnit* OpticalLink::find_edfa(std::string_view edfa_id) const {
  return const_cast<OpticalLink*>(this)->find_edfa(edfa_id);
}

bool OpticalLink::connects(std::string_view a, std::string_view b) const {
  return (endpoints[0] == a && endpoints[1] == b) || (endpoints[0] == b && endpoints[1] == a);
}

double ChannelGrid::frequency_thz(int channel) const {
  return center_thz + (channel - (count - 1) / 2.0) * spacing_ghz * 1e-3;
}

double ChannelGrid::normalized_offset(int channel) const {
  if (count <= 1) return 0.0;
  return (channel - (count - 1) / 2.0) / static_cast<double>(count - 1);
}

ChannelGrid ChannelGrid::single_channel() const {
  ChannelGrid g = *this;
  g.count = 1;
  return g;
}

namespace {
template <typename T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  auto it = std::find_if(items.begin(), items.end(), [&](const T& x) { return x.id == id; });
  return it == items.end() ? nullptr : &*it;
}
}  // namespace

const Site* Topology::find_site(std::string_view id) const { return find_by_id(sites, id); }
const TrxUnit* Topology::find_trx(std::string_view id) const { return find_by_id(trxs, id); }
const OpticalLink* Topology::find_link(std::string_view id) const { return find_by_id(links, id); }
const CatalogSpec* Topology::find_catalog(std::string_view id) const { return find_by_id(catalogs, id); }
const TrxModelSpec* Topology::find_trx_model(std::string_view id) const { return find_by_id(trx_models, id); }

const TrxUnit* Topology::find_trx_by_serial(std::string_view serial) const {
  auto it = std::find_if(trxs.begin(), trxs.end(), [&](const TrxUnit& x) { return x.serial == serial; });
  return it == trxs.end() ? nullptr : &*it;
}

ChannelGrid Topology::grid_for(const OpticalLink& link) const {
  return link.kind == LinkKind::AAL ? grid.single_channel() : grid;
}

std::vector<const OpticalLink*> links_between(const Topology& t, std::string_view a, std::string_view b) {
  if (!t.find_site(a)) throw Error(Errc::UnknownSite, std::string(a));
  if (!t.find_site(b)) throw Error(Errc::UnknownSite, std::string(b));
  std::vector<const OpticalLink*> out;
  for (const auto& link : t.links) {
    if (link.connects(a, b)) out.push_back(&link);
  }
  std::sort(out.begin(), out.end(), [](const auto* x, const auto* y) { return x->id < y->id; });
  return out;
}

}  // namespace dcx::netmodel
