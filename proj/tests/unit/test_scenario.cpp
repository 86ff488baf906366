#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "dcx/error.hpp"
#include "dcx/gateway/scenario.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
using namespace dcx::gateway;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::NotFound;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "dcx_scenario_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path kScenarios = fs::path(DCX_TEST_DATA) / "scenarios";

Scenario inline_scenario(const std::string& steps) {
  return parse_scenario(R"({"name": "t", "topology": "../mesh5.json", "seed": 2, "steps": )" + steps + "}",
                        kScenarios);
}

}  // namespace

TEST(Scenario, StepLossLocalization) {
  const auto out = scratch("fig12a");
  const auto r = run_scenario(load_scenario(kScenarios / "fig12a.json"), out);
  EXPECT_GT(r.events, 0u);
  EXPECT_TRUE(fs::exists(out / "events.ndjson"));
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  const auto summary = Json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary.at("final_digest"), r.final_digest);
  EXPECT_TRUE(summary.at("failure").is_null());
}

TEST(Scenario, SameSeedSameArtifacts) {
  const auto s = load_scenario(kScenarios / "nf_fault.json");
  const auto a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_scenario(s, a);
  const auto rb = run_scenario(s, b);
  EXPECT_EQ(ra.final_digest, rb.final_digest);
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path().filename();
  }
}

TEST(Scenario, ApprovalFlow) {
  const auto r = run_scenario(load_scenario(kScenarios / "approval.json"), scratch("approval"));
  EXPECT_EQ(r.results.at("rolled").at("state"), "RolledBack");
}

TEST(Scenario, GainTiltFlattens) {
  const auto out = scratch("gain_tilt");
  const auto r = run_scenario(load_scenario(kScenarios / "gain_tilt.json"), out);
  EXPECT_LE(r.results.at("opt").at("result").at("flatness_db").get<double>(), 0.5);
  EXPECT_TRUE(fs::exists(out / "q_vs_power.csv"));
}

TEST(Scenario, FailedAssertNamesTheStep) {
  const auto s = inline_scenario(
      R"([{"op": "provision", "site_a": "A", "site_b": "B", "as": "x"},
          {"op": "assert", "target": "x", "pointer": "/state", "equals": "Committed"}])");
  const auto out = scratch("fail");
  try {
    run_scenario(s, out);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::StepFailure);
    EXPECT_NE(e.detail().find("step 2"), std::string::npos) << e.detail();
  }
  EXPECT_TRUE(fs::exists(out / "events.ndjson"));
  EXPECT_FALSE(Json::parse(slurp(out / "summary.json")).at("failure").is_null());
}

TEST(Scenario, StaticChecks) {
  EXPECT_EQ(code_of([] { inline_scenario(R"([{"op": "fly"}])"); }), Errc::ValidationError);
  EXPECT_EQ(code_of([] { inline_scenario(R"([{"op": "calibrate", "link": "nope"}])"); }), Errc::ValidationError);
  EXPECT_EQ(code_of([] {
              inline_scenario(R"([{"op": "calibrate", "link": "C12", "as": "x"}, {"op": "calibrate", "link": "C13", "as": "x"}])");
            }),
            Errc::ValidationError);
  EXPECT_EQ(code_of([] { inline_scenario(R"([{"op": "decide", "session": "s1", "verdict": "maybe"}])"); }),
            Errc::ValidationError);
  EXPECT_EQ(code_of([] { inline_scenario(R"([{"op": "provision", "site_a": "A", "site_b": "Q"}])"); }),
            Errc::ValidationError);
  EXPECT_EQ(code_of([] { parse_scenario("[1", kScenarios); }), Errc::ParseError);
}
