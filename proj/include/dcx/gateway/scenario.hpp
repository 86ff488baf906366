#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "dcx/gateway/control_plane.hpp"

namespace dcx::gateway {

/// Steps, each an object with "op":
///   provision        site_a, site_b, [policy], [as]
///   decide           session (alias or id), verdict, [reason]
///   inject_fault     fault, [as]
///   clear_fault      fault (alias or id)
///   capture_profile  link, as, [resolution_km], [noise_sigma_db], [channel]
///   localize         baseline, current, as, [min_step_db]
///   calibrate        link, [as]
///   optimize         link, [as]
///   detect_nf_fault  link, calibration (alias or id), [as]
///   plot             kind, target (alias, link or calibration id), file
///   assert           target, pointer, and one of equals | approx with tol
struct Scenario {
  std::string name;
  netmodel::Topology topology;
  std::uint64_t seed = 0;
  Json config = Json::object();
  Json steps = Json::array();
};

/// Parses and checks a scenario document. The topology path is resolved
/// against `base_dir`. DCX_SEED overrides the document's seed.
/// Throws ParseError and ValidationError.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);
Scenario load_scenario(const std::filesystem::path& path);

struct ScenarioResult {
  Json results = Json::object();  // by alias
  std::string final_digest;
  std::uint64_t events = 0;
};

/// Runs every step in order and writes events.ndjson, summary.json and the
/// requested plot tables into out_dir. Throws StepFailure naming the step;
/// artifacts written so far are kept.
ScenarioResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir);

}  // namespace dcx::gateway
