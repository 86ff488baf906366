#include <gtest/gtest.h>

#include "dcx/error.hpp"
#include "dcx/netmodel/topology.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
using namespace dcx::netmodel;

namespace {

const char* kMinimal = R"({
  "grid": {"center_thz": 193.4, "spacing_ghz": 75.0, "count": 64, "symbol_rate_gbaud": 64.0},
  "sites": [{"id": "A", "kind": "UDC"}, {"id": "P1", "kind": "POP"}],
  "links": [{"id": "AAL-A", "kind": "AAL", "endpoints": ["A", "P1"],
             "elements": [{"type": "span", "length_km": 10.0}]}]
})";

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NotFound;
}

std::string detail_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.detail();
  }
  return {};
}

}  // namespace

TEST(LoadTopology, MinimalDocument) {
  const auto t = load_topology(kMinimal);
  EXPECT_EQ(t.sites.size(), 2u);
  EXPECT_EQ(t.links.size(), 1u);
  EXPECT_EQ(t.grid.count, 64);
}

TEST(LoadTopology, MissingSiteReferenceNamesTheLink) {
  std::string doc = kMinimal;
  doc.replace(doc.find(R"(["A", "P1"])"), 11, R"(["X", "P1"])");
  EXPECT_EQ(code_of([&] { load_topology(doc); }), Errc::ValidationError);
  EXPECT_EQ(detail_of([&] { load_topology(doc); }), "links[0].endpoints");
}

TEST(LoadTopology, UnknownKeyIsParseError) {
  std::string doc = kMinimal;
  doc.insert(1, R"("colour": "blue", )");
  EXPECT_EQ(code_of([&] { load_topology(doc); }), Errc::ParseError);
}

TEST(LoadTopology, MalformedJsonIsParseError) { EXPECT_EQ(code_of([] { load_topology("{"); }), Errc::ParseError); }

TEST(LoadTopology, FullMeshFixture) {
  const auto t = dcx::testing::load_fixture("mesh5.json");
  int pops = 0, carrier = 0;
  for (const auto& s : t.sites) pops += s.kind == SiteKind::POP;
  for (const auto& l : t.links) carrier += l.kind == LinkKind::CarrierLink;
  EXPECT_EQ(pops, 5);
  EXPECT_EQ(carrier, 10);
}

TEST(LoadTopology, SerializeRoundTrip) {
  for (const char* name : {"mesh5.json", "line4x80.json", "tilted4.json", "minimal.json"}) {
    const auto t = dcx::testing::load_fixture(name);
    EXPECT_EQ(load_topology(serialize_topology(t)), t) << name;
    EXPECT_EQ(serialize_topology(load_topology(serialize_topology(t))), serialize_topology(t)) << name;
  }
}

TEST(Validate, FixturesAreClean) {
  for (const char* name : {"mesh5.json", "line4x80.json", "tilted4.json", "minimal.json"}) {
    EXPECT_TRUE(validate_topology(dcx::testing::load_fixture(name)).empty()) << name;
  }
}

TEST(Validate, GainOutsideRangeNamesTheAmplifier) {
  auto t = dcx::testing::load_fixture("line4x80.json");
  auto* link = const_cast<OpticalLink*>(t.find_link("L4x80"));
  link->find_edfa("edfa2")->gain_db = 40.0;
  const auto v = validate_topology(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].entity.find("edfa2"), std::string::npos);
  EXPECT_EQ(v[0].rule, "gain-target-in-range");
}

TEST(Validate, DisconnectedPopGraph) {
  auto t = dcx::testing::load_fixture("mesh5.json");
  // Keep P1-P2 and P3-P4-P5 as two islands.
  std::erase_if(t.links, [](const OpticalLink& l) {
    if (l.kind != LinkKind::CarrierLink) return false;
    const bool left = (l.connects("P1", "P2"));
    const bool right = l.connects("P3", "P4") || l.connects("P4", "P5") || l.connects("P3", "P5");
    return !(left || right);
  });
  const auto v = validate_topology(t);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "pop-graph-connectivity");
}

TEST(Validate, OracleAgreesOnRandomDeletions) {
  // Connectivity by repeated relaxation, independent of the validator.
  const auto base = dcx::testing::load_fixture("mesh5.json");
  std::vector<const OpticalLink*> carrier;
  for (const auto& l : base.links) {
    if (l.kind == LinkKind::CarrierLink) carrier.push_back(&l);
  }
  for (unsigned mask = 0; mask < (1u << carrier.size()); mask += 7) {
    auto t = base;
    std::set<std::string> drop;
    for (std::size_t i = 0; i < carrier.size(); ++i) {
      if (mask & (1u << i)) drop.insert(carrier[i]->id);
    }
    std::erase_if(t.links, [&](const OpticalLink& l) { return drop.count(l.id) > 0; });
    std::set<std::string> reached{"P1"};
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& l : t.links) {
        if (l.kind != LinkKind::CarrierLink) continue;
        for (int k = 0; k < 2; ++k) {
          if (reached.count(l.endpoints[k]) && reached.insert(l.endpoints[1 - k]).second) grew = true;
        }
      }
    }
    const bool connected = reached.size() == 5;
    bool flagged = false, isolated = false;
    for (const auto& v : validate_topology(t)) {
      flagged |= v.rule == "pop-graph-connectivity";
      isolated |= v.rule == "pop-has-carrier-link";
    }
    EXPECT_EQ(flagged, !connected) << mask;
    if (connected) EXPECT_FALSE(isolated);
  }
}

TEST(LinksBetween, AdjacentNonAdjacentAndParallel) {
  auto t = dcx::testing::load_fixture("mesh5.json");
  EXPECT_EQ(links_between(t, "P1", "P2").size(), 1u);
  EXPECT_TRUE(links_between(t, "A", "P2").empty());
  auto twin = *t.find_link("C12");
  twin.id = "C12b";
  t.links.push_back(twin);
  const auto both = links_between(t, "P2", "P1");
  ASSERT_EQ(both.size(), 2u);
  EXPECT_EQ(both[0]->id, "C12");
  EXPECT_EQ(both[1]->id, "C12b");
  EXPECT_EQ(code_of([&] { links_between(t, "P1", "nowhere"); }), Errc::UnknownSite);
}

TEST(ChannelGrid, FrequenciesAndOffsets) {
  ChannelGrid g;
  EXPECT_NEAR(g.frequency_thz(0) + g.frequency_thz(63), 2 * 193.4, 1e-9);
  EXPECT_NEAR(g.frequency_thz(1) - g.frequency_thz(0), 0.075, 1e-12);
  EXPECT_DOUBLE_EQ(g.normalized_offset(0), -0.5);
  EXPECT_DOUBLE_EQ(g.normalized_offset(63), 0.5);
  EXPECT_DOUBLE_EQ(g.single_channel().normalized_offset(0), 0.0);
  EXPECT_DOUBLE_EQ(g.occupied_bandwidth_ghz(), 63 * 75.0 + 64.0);
}

TEST(Edfa, NfCurveInterpolatesAndClamps) {
  const auto e = dcx::testing::sloped_edfa("x", 16.0, 6.0);
  EXPECT_DOUBLE_EQ(e.nf_at(10.0), 6.0);
  EXPECT_DOUBLE_EQ(e.nf_at(14.0), 5.5);
  EXPECT_DOUBLE_EQ(e.nf_at(18.0), 5.0);
  // Outside the curve the end segments are extended.
  EXPECT_DOUBLE_EQ(e.nf_at(30.0), 4.5 - 0.5 * 5.0 / 7.0);
  EXPECT_DOUBLE_EQ(e.nf_at(5.0), 6.0 + 5.0 / 8.0);
}
