#include <gtest/gtest.h>

#include <functional>

#include "dcx/error.hpp"
#include "dcx/monitor/calibration.hpp"
#include "dcx/monitor/nf_fault.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
using namespace dcx::monitor;
using dcx::testing::line_4x80;

namespace {

const ChannelGrid kGrid{};
const std::vector<double> kLaunch(64, 0.0);

std::vector<TelemetrySnapshot> ops(const std::vector<linetwin::FaultSpec>& faults, double sigma, std::uint64_t seed) {
  return collect_operating_points(line_4x80(), kGrid, faults, kLaunch, sigma, seed);
}

linetwin::FaultSpec nf_fault(const std::string& edfa, double db) {
  linetwin::FaultSpec f;
  f.kind = linetwin::FaultKind::NfDegradation;
  f.link_id = "L4x80";
  f.edfa_id = edfa;
  f.magnitude_db = db;
  return f;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NotFound;
}

}  // namespace

TEST(NfFault, LargeDegradationIsFlagged) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto base = calibrate_line(ops({}, 0.1, 100 * seed + 1), line_4x80(), kGrid);
    const auto r = detect_nf_fault(ops({nf_fault("edfa3", 8.0)}, 0.1, 100 * seed + 50), base, line_4x80(), kGrid);
    hits += r.flagged == std::vector<std::string>{"edfa3"};
    EXPECT_GT(r.report.outlier_count, 0);
  }
  EXPECT_GE(hits, 9);
}

TEST(NfFault, ModerateDegradationIsFlagged) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto base = calibrate_line(ops({}, 0.1, 100 * seed + 7), line_4x80(), kGrid);
    hits += detect_nf_fault(ops({nf_fault("edfa1", 2.0)}, 0.1, 100 * seed + 60), base, line_4x80(), kGrid).flagged ==
            std::vector<std::string>{"edfa1"};
  }
  EXPECT_GE(hits, 9);
}

TEST(NfFault, HealthyLineIsQuiet) {
  int false_flags = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto base = calibrate_line(ops({}, 0.1, 100 * seed + 1), line_4x80(), kGrid);
    false_flags += !detect_nf_fault(ops({}, 0.1, 100 * seed + 50), base, line_4x80(), kGrid).flagged.empty();
  }
  EXPECT_EQ(false_flags, 0);
}

TEST(NfFault, NoiselessRefitMeasuresTheDelta) {
  const auto base = calibrate_line(ops({}, 0.0, 1), line_4x80(), kGrid);
  const auto r = detect_nf_fault(ops({nf_fault("edfa2", 4.0)}, 0.0, 2), base, line_4x80(), kGrid);
  ASSERT_EQ(r.flagged, std::vector<std::string>{"edfa2"});
  for (const auto& refit : r.refits) {
    if (refit.id == "edfa2") EXPECT_NEAR(refit.deviation_db, 4.0, 0.05);
  }
}

TEST(NfFault, ReportStatistics) {
  const auto base = calibrate_line(ops({}, 0.1, 1), line_4x80(), kGrid);
  const auto r = detect_nf_fault(ops({}, 0.1, 2), base, line_4x80(), kGrid);
  EXPECT_EQ(r.report.entries.size(), 9u * 64u);
  EXPECT_GE(r.report.baseline_std_db, 0.01);
  EXPECT_GE(r.report.max_abs_db, std::abs(r.report.mean_db));
}

TEST(NfFault, Errors) {
  const auto snaps = ops({}, 0.0, 1);
  EXPECT_EQ(code_of([&] { detect_nf_fault(snaps, CalibrationResult{}, line_4x80(), kGrid); }), Errc::NoBaseline);
  const auto base = calibrate_line(snaps, line_4x80(), kGrid);
  EXPECT_EQ(code_of([&] { detect_nf_fault(std::span(snaps).first(1), base, line_4x80(), kGrid); }),
            Errc::Underdetermined);
}
