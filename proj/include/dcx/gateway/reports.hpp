#pragma once

#include <vector>

#include "dcx/linetwin/twin.hpp"
#include "dcx/monitor/calibration.hpp"
#include "dcx/monitor/gain_tilt.hpp"
#include "dcx/monitor/nf_fault.hpp"
#include "dcx/monitor/profile_analysis.hpp"
#include "json.hpp"

namespace dcx::gateway {

using Json = nlohmann::json;

Json to_json(const linetwin::FaultSpec& f);
/// Throws ValidationError on unknown keys or bad values.
linetwin::FaultSpec fault_from_json(const Json& j);

Json to_json(const linetwin::PowerProfile& p);
Json to_json(const std::vector<monitor::LossEvent>& events);
Json to_json(const monitor::CalibrationResult& c);
monitor::CalibrationResult calibration_from_json(const Json& j);
Json to_json(const monitor::GainTiltSetting& s);
Json to_json(const monitor::NfFaultResult& r);
Json to_json(const linetwin::TelemetrySnapshot& s);

}  // namespace dcx::gateway
