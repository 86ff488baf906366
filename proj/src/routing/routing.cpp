#include "dcx/routing/routing.hpp"

#include <algorithm>
#include <functional>
#include <tuple>

#include "dcx/error.hpp"
#include "dcx/qot/budget.hpp"

namespace dcx::routing {

using netmodel::LinkKind;
using netmodel::SiteKind;
using netmodel::Topology;

namespace {

// Lowest-id link of the given kind joining a and b, or nullptr.
const netmodel::OpticalLink* link_of_kind(const Topology& t, const std::string& a, const std::string& b,
                                          LinkKind kind) {
  for (const auto* l : netmodel::links_between(t, a, b)) {
    if (l->kind == kind) return l;
  }
  return nullptr;
}

// POPs reachable from a user site over an access link, sorted by POP id.
std::vector<std::string> attached_pops(const Topology& t, const std::string& site) {
  std::vector<std::string> pops;
  for (const auto& l : t.links) {
    if (l.kind != LinkKind::AAL) continue;
    for (int k = 0; k < 2; ++k) {
      if (l.endpoints[k] == site) pops.push_back(l.endpoints[1 - k]);
    }
  }
  std::sort(pops.begin(), pops.end());
  pops.erase(std::unique(pops.begin(), pops.end()), pops.end());
  return pops;
}

std::string route_id(const std::string& a, const std::vector<std::string>& pops, const std::string& b) {
  std::string id = a + ":";
  for (std::size_t i = 0; i < pops.size(); ++i) id += (i ? "-" : "") + pops[i];
  return id + ":" + b;
}

}  // namespace

std::vector<RouteCandidate> enumerate_routes(const Topology& t, const std::string& a, const std::string& b,
                                             int max_pops) {
  if (!t.find_site(a)) throw Error(Errc::UnknownSite, a);
  if (!t.find_site(b)) throw Error(Errc::UnknownSite, b);
  if (a == b) throw Error(Errc::OutOfRange, "route endpoints must differ");
  if (max_pops < 2) throw Error(Errc::OutOfRange, "max_pops must be >= 2");
  const auto first = attached_pops(t, a);
  const auto last = attached_pops(t, b);
  if (first.empty()) throw Error(Errc::NoAalAttachment, a);
  if (last.empty()) throw Error(Errc::NoAalAttachment, b);

  std::vector<std::string> pops;
  for (const auto& s : t.sites) {
    if (s.kind == SiteKind::POP) pops.push_back(s.id);
  }
  std::sort(pops.begin(), pops.end());

  std::vector<RouteCandidate> out;
  std::vector<std::string> path;
  std::function<void()> extend = [&]() {
    const auto tail = path.back();
    if (path.size() >= 2 && std::binary_search(last.begin(), last.end(), tail)) {
      RouteCandidate r;
      r.site_a = a;
      r.site_b = b;
      r.pop_sequence = path;
      r.id = route_id(a, path, b);
      r.link_sequence.push_back(link_of_kind(t, a, path.front(), LinkKind::AAL)->id);
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        r.link_sequence.push_back(link_of_kind(t, path[i], path[i + 1], LinkKind::CarrierLink)->id);
      }
      r.link_sequence.push_back(link_of_kind(t, path.back(), b, LinkKind::AAL)->id);
      r.hop_count = static_cast<int>(r.link_sequence.size());
      out.push_back(std::move(r));
    }
    if (static_cast<int>(path.size()) >= max_pops) return;
    for (const auto& p : pops) {
      if (std::find(path.begin(), path.end(), p) != path.end()) continue;
      if (!link_of_kind(t, tail, p, LinkKind::CarrierLink)) continue;
      path.push_back(p);
      extend();
      path.pop_back();
    }
  };
  for (const auto& p : first) {
    path = {p};
    extend();
  }
  std::stable_sort(out.begin(), out.end(), [](const RouteCandidate& x, const RouteCandidate& y) {
    return std::tuple(x.pop_sequence.size(), x.pop_sequence) < std::tuple(y.pop_sequence.size(), y.pop_sequence);
  });
  return out;
}

std::string check_route(const Topology& t, const RouteCandidate& r) {
  const auto& pops = r.pop_sequence;
  if (pops.size() < 2) return "fewer than two POPs";
  for (std::size_t i = 0; i < pops.size(); ++i) {
    const auto* s = t.find_site(pops[i]);
    if (!s || s->kind != SiteKind::POP) return "not a POP: " + pops[i];
    for (std::size_t j = i + 1; j < pops.size(); ++j) {
      if (pops[i] == pops[j]) return "repeated POP " + pops[i];
    }
  }
  if (r.link_sequence.size() != pops.size() + 1) return "link count mismatch";
  auto joins = [&](const std::string& link_id, const std::string& x, const std::string& y, LinkKind kind) {
    const auto* l = t.find_link(link_id);
    return l && l->kind == kind && l->connects(x, y);
  };
  if (!joins(r.link_sequence.front(), r.site_a, pops.front(), LinkKind::AAL)) return "bad first access link";
  if (!joins(r.link_sequence.back(), pops.back(), r.site_b, LinkKind::AAL)) return "bad last access link";
  for (std::size_t i = 0; i + 1 < pops.size(); ++i) {
    if (!joins(r.link_sequence[i + 1], pops[i], pops[i + 1], LinkKind::CarrierLink)) return "bad carrier link";
  }
  return {};
}

std::vector<Segment> decompose_segments(const Topology& t, const RouteCandidate& r, SegmentPolicy policy) {
  std::vector<Segment> out;
  if (policy == SegmentPolicy::PerLink) {
    for (const auto& l : r.link_sequence) out.push_back({r.id, static_cast<int>(out.size()), {l}});
    return out;
  }
  // Per hop: consecutive links sharing the same node pair form one segment.
  std::vector<std::string> nodes{r.site_a};
  nodes.insert(nodes.end(), r.pop_sequence.begin(), r.pop_sequence.end());
  nodes.push_back(r.site_b);
  for (std::size_t i = 0; i < r.link_sequence.size(); ++i) {
    const auto* link = t.find_link(r.link_sequence[i]);
    const bool same_hop = !out.empty() && link && i > 0 && link->connects(nodes[i - 1], nodes[i]);
    if (same_hop) {
      out.back().links.push_back(r.link_sequence[i]);
    } else {
      out.push_back({r.id, static_cast<int>(out.size()), {r.link_sequence[i]}});
    }
  }
  return out;
}

std::vector<std::string> carrier_links(const Topology& t, const RouteCandidate& r) {
  std::vector<std::string> out;
  for (const auto& id : r.link_sequence) {
    const auto* l = t.find_link(id);
    if (!l) throw Error(Errc::UnknownLink, id);
    if (l->kind == LinkKind::CarrierLink) out.push_back(id);
  }
  return out;
}

SpectrumAssignment assign_spectrum(const Topology& t, const RouteCandidate& r, const Occupancy& occupancy) {
  const auto links = carrier_links(t, r);
  for (int ch = 0; ch < t.grid.count; ++ch) {
    const bool free = std::all_of(links.begin(), links.end(), [&](const std::string& id) {
      auto it = occupancy.find(id);
      return it == occupancy.end() || !it->second.count(ch);
    });
    if (free) {
      SpectrumAssignment a;
      a.route_id = r.id;
      a.channel_index = ch;
      for (const auto& id : links) a.confirmed[id] = false;
      return a;
    }
  }
  throw Error(Errc::SpectrumExhausted, r.id);
}

std::vector<RankedRoute> rank_routes(const std::vector<RouteCandidate>& candidates,
                                     const std::map<std::string, std::vector<double>>& segment_gsnr) {
  std::vector<RankedRoute> out;
  for (const auto& c : candidates) {
    auto it = segment_gsnr.find(c.id);
    if (it == segment_gsnr.end() || it->second.empty()) throw Error(Errc::MissingSegmentData, c.id);
    out.push_back({c, qot::concatenate_gsnr(it->second)});
  }
  std::sort(out.begin(), out.end(), [](const RankedRoute& x, const RankedRoute& y) {
    return std::tuple(-x.e2e_gsnr, x.route.hop_count, x.route.id) < std::tuple(-y.e2e_gsnr, y.route.hop_count, y.route.id);
  });
  return out;
}

double route_length_km(const Topology& t, const RouteCandidate& r) {
  double total = 0.0;
  for (const auto& id : r.link_sequence) {
    const auto* l = t.find_link(id);
    if (!l) throw Error(Errc::UnknownLink, id);
    total += l->length_km();
  }
  return total;
}

}  // namespace dcx::routing
