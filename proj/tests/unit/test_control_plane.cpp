#include <gtest/gtest.h>

#include <cstdlib>
#include <functional>

#include "dcx/error.hpp"
#include "dcx/gateway/control_plane.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
using namespace dcx::gateway;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NotFound;
}

ControlPlane mesh(std::uint64_t seed = 1) {
  PlaneConfig cfg;
  cfg.seed = seed;
  return ControlPlane(dcx::testing::load_fixture("mesh5.json"), cfg);
}

linetwin::FaultSpec step(const std::string& link, double km, double db) {
  linetwin::FaultSpec f;
  f.link_id = link;
  f.distance_km = km;
  f.magnitude_db = db;
  return f;
}

}  // namespace

TEST(Seeds, DeriveIsStableAndSalted) {
  EXPECT_EQ(derive_seed(1, "a", 0), derive_seed(1, "a", 0));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(1, "b", 0));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(1, "a", 1));
  EXPECT_NE(derive_seed(1, "a", 0), derive_seed(2, "a", 0));
}

TEST(Seeds, EnvOverride) {
  ::setenv("DCX_SEED", "42", 1);
  EXPECT_EQ(seed_from_env(7), 42u);
  ::setenv("DCX_SEED", "x", 1);
  EXPECT_EQ(seed_from_env(7), 7u);
  ::unsetenv("DCX_SEED");
  EXPECT_EQ(seed_from_env(7), 7u);
}

TEST(Plane, SessionLifecycleAndEvents) {
  auto plane = mesh();
  const auto s = plane.create_session("A", "B", protocol::Policy{});
  EXPECT_EQ(s.at("session_id"), "s1");
  EXPECT_EQ(s.at("state"), "PendingApproval");
  const auto before = plane.last_seq();
  EXPECT_EQ(before, plane.session("s1").at("log").size());
  EXPECT_EQ(plane.sessions(protocol::State::PendingApproval).size(), 1u);
  const auto after = plane.decide("s1", protocol::Verdict::Approve, "ok");
  EXPECT_EQ(after.at("state"), "Committed");
  EXPECT_EQ(plane.last_seq(), plane.session("s1").at("log").size());
  EXPECT_TRUE(plane.sessions(protocol::State::PendingApproval).empty());
  EXPECT_EQ(plane.state().at("devices").at("trxA").at("enabled"), true);
  EXPECT_FALSE(plane.state().at("occupancy").empty());
  EXPECT_EQ(code_of([&] { plane.decide("s1", protocol::Verdict::Approve, ""); }), Errc::NotPending);
  EXPECT_EQ(code_of([&] { plane.decide("s9", protocol::Verdict::Approve, ""); }), Errc::NotFound);
  EXPECT_EQ(code_of([&] { plane.session("s9"); }), Errc::NotFound);
  EXPECT_EQ(code_of([&] { plane.create_session("A", "Z", protocol::Policy{}); }), Errc::UnknownSite);
}

TEST(Plane, FaultsChangeTheTwinOnly) {
  auto plane = mesh();
  const auto clean = plane.profile("C12");
  const auto id = plane.inject_fault(step("C12", 20.0, 2.0));
  EXPECT_EQ(plane.twin().faults().all().size(), 1u);
  const auto hit = plane.profile("C12");
  EXPECT_NEAR(clean.relative_power_db[30] - hit.relative_power_db[30], 0.0, 1e-9);     // 15 km, before the step
  EXPECT_NEAR(clean.relative_power_db[60] - hit.relative_power_db[60], 2.0, 1e-6);     // 30 km, after it
  // Constant-gain amplifiers carry the drop to the link end.
  EXPECT_NEAR(clean.relative_power_db.back() - hit.relative_power_db.back(), 2.0, 0.05);
  EXPECT_EQ(plane.priors("C12"), *plane.topology().find_link("C12"));
  plane.clear_fault(id);
  EXPECT_TRUE(plane.twin().faults().all().empty());
  EXPECT_EQ(code_of([&] { plane.clear_fault(id); }), Errc::UnknownFault);
  EXPECT_EQ(code_of([&] { plane.inject_fault(step("nope", 1.0, 1.0)); }), Errc::UnknownLink);
  EXPECT_EQ(code_of([&] { plane.inject_fault(step("C12", 1e6, 1.0)); }), Errc::ValidationError);
}

TEST(Plane, CalibrateThenOptimize) {
  auto plane = mesh();
  EXPECT_EQ(code_of([&] { plane.optimize("C12"); }), Errc::NoBaseline);
  const auto c = plane.calibrate("C12");
  const std::string id = c.at("id");
  EXPECT_EQ(plane.latest_calibration("C12"), id);
  EXPECT_FALSE(plane.latest_calibration("C13").has_value());
  EXPECT_EQ(plane.calibration(id).at("link_id"), "C12");
  EXPECT_EQ(plane.calibration_result(id).edfas.size(), plane.topology().find_link("C12")->edfas().size());
  const auto o = plane.optimize("C12");
  EXPECT_EQ(o.at("calibration_id"), id);
  EXPECT_TRUE(plane.state().at("settings").contains("C12"));
  EXPECT_EQ(code_of([&] { plane.calibration("c999"); }), Errc::NotFound);
  EXPECT_EQ(code_of([&] { plane.calibrate("zz"); }), Errc::UnknownLink);
}

TEST(Plane, NfCheckOnHealthyLine) {
  auto plane = mesh(3);
  const std::string id = plane.calibrate("C12").at("id");
  EXPECT_TRUE(plane.detect_nf_fault("C12", id).flagged.empty());
}

TEST(Plane, GsnrReport) {
  auto plane = mesh();
  const auto g = plane.gsnr("C12");
  EXPECT_EQ(g.at("gsnr_db").size(), static_cast<std::size_t>(plane.topology().grid.count));
  EXPECT_EQ(g.at("accumulated").size(), plane.topology().find_link("C12")->edfas().size());
  EXPECT_EQ(code_of([&] { plane.gsnr("zz"); }), Errc::UnknownLink);
}

TEST(Plane, SameSeedSameLog) {
  auto run = [](std::uint64_t seed) {
    auto plane = mesh(seed);
    plane.create_session("A", "B", protocol::Policy{});
    plane.calibrate("C12");
    return plane.event_log_ndjson();
  };
  EXPECT_EQ(run(9), run(9));
  EXPECT_NE(run(9), run(10));
}
