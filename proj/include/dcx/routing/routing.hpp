#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dcx/netmodel/topology.hpp"

namespace dcx::routing {

inline constexpr int kDefaultMaxPops = 3;

struct RouteCandidate {
  std::string id;
  std::string site_a;
  std::string site_b;
  std::vector<std::string> pop_sequence;
  std::vector<std::string> link_sequence;  // AAL_a, carrier links..., AAL_b
  int hop_count = 0;                       // links traversed

  bool operator==(const RouteCandidate&) const = default;
};

enum class SegmentPolicy { PerLink, PerHop };

struct Segment {
  std::string route_id;
  int index = 0;
  std::vector<std::string> links;
};

using Occupancy = std::map<std::string, std::set<int>>;

struct SpectrumAssignment {
  std::string route_id;
  int channel_index = -1;
  std::map<std::string, bool> confirmed;  // carrier link -> confirmed at commit
};

struct RankedRoute {
  RouteCandidate route;
  double e2e_gsnr = 0.0;
};

/// All simple POP sequences of length 2..max_pops joining the two user sites,
/// ordered by length then lexicographically by POP ids. Parallel links between
/// the same pair resolve to the lowest link id.
std::vector<RouteCandidate> enumerate_routes(const netmodel::Topology& t, const std::string& a, const std::string& b,
                                             int max_pops = kDefaultMaxPops);

/// Independent structural check of a candidate; empty string when valid.
std::string check_route(const netmodel::Topology& t, const RouteCandidate& r);

std::vector<Segment> decompose_segments(const netmodel::Topology& t, const RouteCandidate& r,
                                        SegmentPolicy policy = SegmentPolicy::PerLink);

/// Carrier links of the route (access links excluded).
std::vector<std::string> carrier_links(const netmodel::Topology& t, const RouteCandidate& r);

/// First-fit with continuity across every carrier link. Throws SpectrumExhausted.
SpectrumAssignment assign_spectrum(const netmodel::Topology& t, const RouteCandidate& r, const Occupancy& occupancy);

/// Sorted by end-to-end GSNR descending, then fewer hops, then id.
/// `segment_gsnr` maps route id to its per-segment linear GSNRs.
std::vector<RankedRoute> rank_routes(const std::vector<RouteCandidate>& candidates,
                                     const std::map<std::string, std::vector<double>>& segment_gsnr);

/// Total fiber length of the route.
double route_length_km(const netmodel::Topology& t, const RouteCandidate& r);

}  // namespace dcx::routing
