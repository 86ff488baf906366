#include "dcx/gateway/reports.hpp"

#include "dcx/error.hpp"

namespace dcx::gateway {

Json to_json(const linetwin::FaultSpec& f) {
  Json j{{"id", f.id}, {"kind", linetwin::to_string(f.kind)}, {"link_id", f.link_id}, {"magnitude_db", f.magnitude_db}};
  if (f.kind == linetwin::FaultKind::StepLoss) {
    j["distance_km"] = f.distance_km;
  } else {
    j["edfa_id"] = f.edfa_id;
  }
  return j;
}

linetwin::FaultSpec fault_from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::ValidationError, "fault must be an object");
  linetwin::FaultSpec f;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "id") {
        f.id = value.get<std::string>();
      } else if (key == "kind") {
        const auto k = value.get<std::string>();
        if (k == "step_loss") {
          f.kind = linetwin::FaultKind::StepLoss;
        } else if (k == "nf_degradation") {
          f.kind = linetwin::FaultKind::NfDegradation;
        } else {
          throw Error(Errc::ValidationError, "fault.kind: " + k);
        }
      } else if (key == "link_id") {
        f.link_id = value.get<std::string>();
      } else if (key == "distance_km") {
        f.distance_km = value.get<double>();
      } else if (key == "edfa_id") {
        f.edfa_id = value.get<std::string>();
      } else if (key == "magnitude_db") {
        f.magnitude_db = value.get<double>();
      } else {
        throw Error(Errc::ValidationError, "fault: unknown key " + key);
      }
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::ValidationError, std::string("fault: ") + e.what());
  }
  if (!j.contains("kind") || !j.contains("link_id") || !j.contains("magnitude_db")) {
    throw Error(Errc::ValidationError, "fault needs kind, link_id and magnitude_db");
  }
  return f;
}

Json to_json(const linetwin::PowerProfile& p) {
  Json j{{"distance_km", p.distance_km},
         {"relative_power_db", p.relative_power_db},
         {"resolution_km", p.resolution_km},
         {"noise_sigma_db", p.noise_sigma_db}};
  j["channel"] = p.channel ? Json(*p.channel) : Json(nullptr);
  return j;
}

Json to_json(const std::vector<monitor::LossEvent>& events) {
  Json a = Json::array();
  for (const auto& e : events) {
    a.push_back({{"distance_km", e.distance_km}, {"magnitude_db", e.magnitude_db}, {"confidence", e.confidence}});
  }
  return a;
}

Json to_json(const monitor::CalibrationResult& c) {
  Json edfas = Json::array();
  for (const auto& e : c.edfas) {
    edfas.push_back({{"id", e.id},
                     {"nf_db", e.nf_db},
                     {"nf_offset_db", e.nf_offset_db},
                     {"nf_stderr_db", e.nf_stderr_db},
                     {"identifiable", e.identifiable}});
  }
  Json spans = Json::array();
  for (const auto& s : c.spans) {
    spans.push_back({{"element_index", s.element_index},
                     {"lumped_with", s.lumped_with},
                     {"loss_db", s.loss_db},
                     {"stderr_db", s.stderr_db}});
  }
  Json residuals = Json::array();
  for (const auto& r : c.residuals) {
    residuals.push_back({{"operating_point", r.operating_point_id}, {"channel", r.channel}, {"delta_db", r.delta_db}});
  }
  return Json{{"link_id", c.link_id},
              {"edfas", edfas},
              {"spans", spans},
              {"residuals", residuals},
              {"residual_mean_db", c.residual_mean_db},
              {"residual_rms_db", c.residual_rms_db},
              {"residual_std_db", c.residual_std_db},
              {"identifiability", c.identifiability},
              {"iterations", c.iterations}};
}

monitor::CalibrationResult calibration_from_json(const Json& j) {
  monitor::CalibrationResult c;
  try {
    c.link_id = j.at("link_id").get<std::string>();
    for (const auto& e : j.at("edfas")) {
      c.edfas.push_back({e.at("id").get<std::string>(), e.at("nf_db").get<double>(), e.at("nf_offset_db").get<double>(),
                         e.at("nf_stderr_db").get<double>(), e.at("identifiable").get<bool>()});
    }
    for (const auto& s : j.at("spans")) {
      c.spans.push_back({s.at("element_index").get<std::size_t>(),
                         s.at("lumped_with").get<std::vector<std::size_t>>(), s.at("loss_db").get<double>(),
                         s.at("stderr_db").get<double>()});
    }
    for (const auto& r : j.at("residuals")) {
      c.residuals.push_back({r.at("operating_point").get<std::string>(), r.at("channel").get<int>(),
                             r.at("delta_db").get<double>()});
    }
    c.residual_mean_db = j.at("residual_mean_db").get<double>();
    c.residual_rms_db = j.at("residual_rms_db").get<double>();
    c.residual_std_db = j.at("residual_std_db").get<double>();
    c.identifiability = j.at("identifiability").get<std::vector<std::string>>();
    c.iterations = j.at("iterations").get<int>();
  } catch (const Json::exception& e) {
    throw Error(Errc::ValidationError, std::string("calibration: ") + e.what());
  }
  return c;
}

Json to_json(const monitor::GainTiltSetting& s) {
  Json settings = Json::array();
  for (const auto& e : s.settings) settings.push_back({{"id", e.id}, {"gain_db", e.gain_db}, {"tilt_db", e.tilt_db}});
  return Json{{"settings", settings},
              {"flatness_db", s.flatness_db},
              {"mean_gsnr_db", s.mean_gsnr_db},
              {"objective", s.objective},
              {"baseline_flatness_db", s.baseline_flatness_db},
              {"baseline_mean_gsnr_db", s.baseline_mean_gsnr_db},
              {"objective_history", s.objective_history},
              {"evaluations", s.evaluations}};
}

Json to_json(const monitor::NfFaultResult& r) {
  Json entries = Json::array();
  for (const auto& e : r.report.entries) {
    entries.push_back({{"operating_point", e.operating_point_id},
                       {"channel", e.channel},
                       {"delta_db", e.delta_db},
                       {"outlier", e.outlier}});
  }
  Json refits = Json::array();
  for (const auto& f : r.refits) {
    refits.push_back({{"id", f.id},
                      {"nf_db", f.nf_db},
                      {"deviation_db", f.deviation_db},
                      {"residual_rms_db", f.residual_rms_db}});
  }
  return Json{{"entries", entries},
              {"mean_db", r.report.mean_db},
              {"std_db", r.report.std_db},
              {"max_abs_db", r.report.max_abs_db},
              {"baseline_mean_db", r.report.baseline_mean_db},
              {"baseline_std_db", r.report.baseline_std_db},
              {"outlier_count", r.report.outlier_count},
              {"refits", refits},
              {"flagged", r.flagged}};
}

Json to_json(const linetwin::TelemetrySnapshot& s) {
  Json edfas = Json::array();
  for (const auto& e : s.edfas) {
    Json j{{"id", e.id}, {"gain_db", e.gain_db}, {"tilt_db", e.tilt_db}};
    j["total_in_dbm"] = e.total_in_dbm ? Json(*e.total_in_dbm) : Json(nullptr);
    j["total_out_dbm"] = e.total_out_dbm ? Json(*e.total_out_dbm) : Json(nullptr);
    edfas.push_back(j);
  }
  Json osa = Json::array();
  for (const auto& c : s.rx_osa) osa.push_back({{"channel", c.channel}, {"power_dbm", c.power_dbm}, {"osnr_db", c.osnr_db}});
  return Json{{"operating_point", s.operating_point_id},
              {"timestamp", s.timestamp},
              {"edfas", edfas},
              {"rx_osa", osa},
              {"tx_spectrum_dbm", s.tx_spectrum_dbm}};
}

}  // namespace dcx::gateway
