#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numeric>

#include "dcx/error.hpp"
#include "dcx/linetwin/twin.hpp"
#include "dcx/routing/routing.hpp"
#include "dcx/units.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
using namespace dcx::linetwin;
using dcx::testing::amplified_line;
using dcx::testing::line_4x80;
using dcx::testing::span;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NotFound;
}

const ChannelGrid kGrid{};

std::vector<double> flat(double dbm, int n = kGrid.count) { return std::vector<double>(static_cast<std::size_t>(n), dbm); }

double total_dbm(const std::vector<double>& dbm) {
  double mw = 0.0;
  for (double p : dbm) mw += units::dbm_to_mw(p);
  return units::mw_to_dbm(mw);
}

FaultSpec step_at(double km, double db) {
  FaultSpec f;
  f.kind = FaultKind::StepLoss;
  f.link_id = "L4x80";
  f.distance_km = km;
  f.magnitude_db = db;
  return f;
}

}  // namespace

TEST(Propagate, AgcHoldsTotalGain) {
  const auto link = line_4x80();
  const auto s = propagate(link, kGrid, flat(0.0));
  ASSERT_EQ(s.edfa_totals.size(), 4u);
  for (const auto& t : s.edfa_totals) EXPECT_NEAR(t.total_out_dbm - t.total_in_dbm, 16.0, 1e-9);
  EXPECT_NEAR(s.length_km, 320.0, 1e-12);
}

TEST(Propagate, TransparentLineRestoresPower) {
  const auto s = propagate(line_4x80(), kGrid, flat(0.0));
  // ASE takes a small share of the held total, so the signal sits just below launch.
  for (double p : s.output_dbm()) {
    EXPECT_LT(p, 0.0);
    EXPECT_GT(p, -0.1);
  }
}

TEST(Propagate, TiltTiltsTheSpectrum) {
  auto link = line_4x80();
  link.find_edfa("edfa1")->tilt_db = 2.0;
  const auto out = propagate(link, kGrid, flat(0.0)).element_out_dbm(1);
  EXPECT_NEAR(out.back() - out.front(), 2.0, 1e-6);
  EXPECT_GT(out.back(), out.front());
}

TEST(Propagate, StepLossLowersEverythingDownstreamInTheSpan) {
  const auto link = line_4x80();
  const auto base = propagate(link, kGrid, flat(0.0));
  const std::vector<FaultSpec> faults{step_at(160.0, 2.0)};
  const auto hit = propagate(link, kGrid, flat(0.0), faults);
  // Third span starts at 160 km; its EDFA input drops by the step.
  EXPECT_NEAR(hit.edfa_totals[1].total_in_dbm, base.edfa_totals[1].total_in_dbm, 1e-9);
  EXPECT_NEAR(base.edfa_totals[2].total_in_dbm - hit.edfa_totals[2].total_in_dbm, 2.0, 1e-6);
}

TEST(Propagate, NfDegradationAddsNoiseOnly) {
  const auto link = line_4x80();
  FaultSpec f;
  f.kind = FaultKind::NfDegradation;
  f.link_id = "L4x80";
  f.edfa_id = "edfa2";
  f.magnitude_db = 3.0;
  const std::vector<FaultSpec> faults{f};
  const auto base = propagate(link, kGrid, flat(0.0));
  const auto hit = propagate(link, kGrid, flat(0.0), faults);
  const auto ob = qot::osnr_db(base.trace);
  const auto oh = qot::osnr_db(hit.trace);
  for (std::size_t i = 0; i < ob.size(); ++i) EXPECT_LT(oh[i], ob[i] - 0.5);
}

TEST(Faults, CheckAndRegistry) {
  const auto link = line_4x80();
  EXPECT_EQ(check_fault(link, step_at(100.0, 1.0)), "");
  EXPECT_NE(check_fault(link, step_at(400.0, 1.0)), "");
  EXPECT_NE(check_fault(link, step_at(100.0, 0.0)), "");
  EXPECT_NE(check_fault(link, step_at(100.0, 25.0)), "");
  FaultSpec bad;
  bad.kind = FaultKind::NfDegradation;
  bad.link_id = "L4x80";
  bad.edfa_id = "nope";
  bad.magnitude_db = 1.0;
  EXPECT_NE(check_fault(link, bad), "");

  FaultRegistry reg;
  const auto id = reg.set_fault(link, step_at(100.0, 1.0));
  EXPECT_EQ(id, "f1");
  EXPECT_EQ(reg.active("L4x80").size(), 1u);
  EXPECT_TRUE(reg.active("other").empty());
  auto dup = step_at(10.0, 1.0);
  dup.id = "f1";
  EXPECT_EQ(code_of([&] { reg.set_fault(link, dup); }), Errc::ValidationError);
  reg.clear_fault(id);
  EXPECT_TRUE(reg.all().empty());
  EXPECT_EQ(code_of([&] { reg.clear_fault(id); }), Errc::UnknownFault);
}

TEST(Profile, SampleGridAndSlope) {
  const auto link = line_4x80();
  const auto s = propagate(link, kGrid.single_channel(), flat(0.0, 1));
  const auto p = synthesize_profile(link, s, 0.5, 0.0, 1);
  ASSERT_EQ(p.size(), 641u);
  EXPECT_DOUBLE_EQ(p.distance_km.back(), 320.0);
  EXPECT_NEAR(p.relative_power_db[0], 0.0, 1e-12);
  EXPECT_NEAR(p.relative_power_db[100], -10.0, 1e-9);  // 50 km at 0.2 dB/km
  EXPECT_NEAR(p.relative_power_db[159], -15.9, 1e-9);
  EXPECT_NEAR(p.relative_power_db[160], 0.0, 0.01);  // after the first EDFA
}

TEST(Profile, StepShowsAtItsDistance) {
  const auto link = line_4x80();
  const std::vector<FaultSpec> faults{step_at(100.0, 2.0)};
  const auto s = propagate(link, kGrid.single_channel(), flat(0.0, 1), faults);
  const auto p = synthesize_profile(link, s, 0.5, 0.0, 1);
  EXPECT_NEAR(p.relative_power_db[199] - p.relative_power_db[200], 2.0 + 0.1, 1e-9);
}

TEST(Profile, NoiseIsSeeded) {
  const auto link = line_4x80();
  const auto s = propagate(link, kGrid, flat(0.0));
  const auto a = synthesize_profile(link, s, 1.0, 0.2, 7);
  const auto b = synthesize_profile(link, s, 1.0, 0.2, 7);
  const auto c = synthesize_profile(link, s, 1.0, 0.2, 8);
  EXPECT_EQ(a.relative_power_db, b.relative_power_db);
  EXPECT_NE(a.relative_power_db, c.relative_power_db);
  EXPECT_EQ(code_of([&] { synthesize_profile(link, s, 0.05, 0.0, 1); }), Errc::OutOfRange);
  EXPECT_EQ(code_of([&] { synthesize_profile(link, s, 1.0, 0.0, 1, 99); }), Errc::OutOfRange);
}

TEST(Profile, Csv) {
  PowerProfile p;
  p.distance_km = {0.0, 0.5};
  p.relative_power_db = {0.0, -0.1};
  EXPECT_EQ(profile_csv(p), "distance_km,relative_power_db\n0.000,0.000000\n0.500,-0.100000\n");
}

TEST(Telemetry, MonitorsAndNoise) {
  auto link = line_4x80();
  link.find_edfa("edfa2")->monitors.input = false;
  const auto s = propagate(link, kGrid, flat(0.0));
  const auto snap = snapshot_telemetry(link, s, "op0", 3);
  EXPECT_EQ(snap.timestamp, 3u);
  EXPECT_FALSE(snap.edfas[1].total_in_dbm.has_value());
  EXPECT_TRUE(snap.edfas[1].total_out_dbm.has_value());
  EXPECT_EQ(snap.rx_osa.size(), 64u);
  EXPECT_NEAR(total_dbm(snap.tx_spectrum_dbm), 10.0 * std::log10(64.0), 1e-9);
  const auto noisy = add_monitor_noise(snap, 0.1, 5);
  EXPECT_NE(noisy.rx_osa[0].power_dbm, snap.rx_osa[0].power_dbm);
  EXPECT_EQ(noisy.rx_osa[0].power_dbm, add_monitor_noise(snap, 0.1, 5).rx_osa[0].power_dbm);
  EXPECT_EQ(add_monitor_noise(snap, 0.0, 5).rx_osa[0].power_dbm, snap.rx_osa[0].power_dbm);
}

TEST(Twin, SettingsAndGrid) {
  auto t = dcx::testing::load_fixture("mesh5.json");
  LineTwin twin(t);
  EXPECT_EQ(twin.grid_for("AAL-A").count, 1);
  EXPECT_EQ(twin.grid_for("C12").count, t.grid.count);
  EXPECT_EQ(code_of([&] { twin.link("zz"); }), Errc::UnknownLink);
  const auto* amp = t.find_link("C12")->edfas().front();
  EXPECT_EQ(code_of([&] { twin.set_edfa("C12", amp->id, 99.0, 0.0); }), Errc::OutOfRange);
  EXPECT_EQ(code_of([&] { twin.set_edfa("C12", "nope", 15.0, 0.0); }), Errc::NotFound);
  twin.set_edfa("C12", amp->id, amp->gain_db, 1.0);
  EXPECT_DOUBLE_EQ(twin.link("C12").find_edfa(amp->id)->tilt_db, 1.0);
}

TEST(Roundtrip, MatchesClosedForm) {
  EXPECT_NEAR(measure_roundtrip_us(100.0), 979.3441835017744, 1e-9);
  EXPECT_NEAR(measure_roundtrip_us(27.4), 268.3403062794862, 1e-9);
  EXPECT_NEAR(measure_roundtrip_us(100.0, 5.0), 984.3441835017744, 1e-9);
  const auto t = dcx::testing::load_fixture("mesh5.json");
  const auto r = routing::enumerate_routes(t, "A", "B")[0];
  EXPECT_NEAR(measure_roundtrip_us(t, r), measure_roundtrip_us(routing::route_length_km(t, r)), 1e-9);
}
