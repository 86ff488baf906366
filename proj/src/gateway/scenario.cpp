#include "dcx/gateway/scenario.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dcx/error.hpp"
#include "dcx/gateway/plots.hpp"
#include "dcx/gateway/reports.hpp"
#include "dcx/monitor/profile_analysis.hpp"

namespace dcx::gateway {

namespace {

const std::map<std::string, std::vector<std::string>, std::less<>> kRequired{
    {"provision", {"site_a", "site_b"}},
    {"decide", {"session", "verdict"}},
    {"inject_fault", {"fault"}},
    {"clear_fault", {"fault"}},
    {"capture_profile", {"link", "as"}},
    {"localize", {"baseline", "current", "as"}},
    {"calibrate", {"link"}},
    {"optimize", {"link"}},
    {"detect_nf_fault", {"link", "calibration"}},
    {"plot", {"kind", "target", "file"}},
    {"assert", {"target", "pointer"}},
};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::NotFound, "cannot write " + p.string());
  out << text;
}

std::string step_name(std::size_t i, const Json& step) {
  return "step " + std::to_string(i + 1) + " (" + step.value("op", std::string("?")) + ")";
}

void check_steps(const Scenario& s) {
  std::set<std::string> aliases;
  auto need_alias = [&](std::size_t i, const Json& step, const char* key) {
    const auto name = step[key].get<std::string>();
    if (!aliases.count(name)) {
      throw Error(Errc::ValidationError, step_name(i, step) + ": " + key + " '" + name + "' is not defined earlier");
    }
  };
  auto need_link = [&](std::size_t i, const Json& step, const char* key) {
    const auto id = step[key].get<std::string>();
    if (!s.topology.find_link(id)) throw Error(Errc::ValidationError, step_name(i, step) + ": unknown link " + id);
  };
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& step = s.steps[i];
    if (!step.is_object() || !step.contains("op") || !step["op"].is_string()) {
      throw Error(Errc::ValidationError, "step " + std::to_string(i + 1) + ": missing op");
    }
    auto it = kRequired.find(step["op"].get<std::string>());
    if (it == kRequired.end()) throw Error(Errc::ValidationError, step_name(i, step) + ": unknown op");
    for (const auto& key : it->second) {
      if (!step.contains(key)) throw Error(Errc::ValidationError, step_name(i, step) + ": missing " + key);
    }
    const auto& op = it->first;
    try {
      if (op == "provision") {
        for (const char* k : {"site_a", "site_b"}) {
          if (!s.topology.find_site(step[k].get<std::string>())) {
            throw Error(Errc::ValidationError, step_name(i, step) + ": unknown site " + step[k].get<std::string>());
          }
        }
        if (step.contains("policy")) protocol::policy_from_json(step["policy"]);
      } else if (op == "inject_fault") {
        const auto f = fault_from_json(step["fault"]);
        if (!s.topology.find_link(f.link_id)) throw Error(Errc::ValidationError, step_name(i, step) + ": unknown link " + f.link_id);
      } else if (op == "capture_profile" || op == "calibrate" || op == "optimize" || op == "detect_nf_fault") {
        need_link(i, step, "link");
      } else if (op == "localize") {
        need_alias(i, step, "baseline");
        need_alias(i, step, "current");
      } else if (op == "assert") {
        need_alias(i, step, "target");
        const bool equals = step.contains("equals");
        const bool approx = step.contains("approx") && step.contains("tol");
        if (equals == approx) throw Error(Errc::ValidationError, step_name(i, step) + ": needs equals or approx with tol");
      } else if (op == "plot") {
        parse_plot_kind(step["kind"].get<std::string>());
      } else if (op == "decide") {
        const auto v = step["verdict"].get<std::string>();
        if (v != "approve" && v != "rollback") throw Error(Errc::ValidationError, step_name(i, step) + ": verdict " + v);
      }
    } catch (const Json::exception& e) {
      throw Error(Errc::ValidationError, step_name(i, step) + ": " + e.what());
    }
    if (step.contains("as")) {
      const auto alias = step["as"].get<std::string>();
      if (!aliases.insert(alias).second) throw Error(Errc::ValidationError, step_name(i, step) + ": alias reused " + alias);
    }
  }
}

PlaneConfig plane_config(const Scenario& s) {
  PlaneConfig c;
  c.seed = s.seed;
  for (const auto& [key, value] : s.config.items()) {
    if (key == "launch_dbm") {
      c.launch_dbm = value.get<double>();
    } else if (key == "monitor_noise_db") {
      c.monitor_noise_db = value.get<double>();
    } else if (key == "profile_noise_db") {
      c.profile_noise_db = value.get<double>();
    } else if (key == "resolution_km") {
      c.resolution_km = value.get<double>();
    } else {
      throw Error(Errc::ValidationError, "config: unknown key " + key);
    }
  }
  return c;
}

class Runner {
 public:
  Runner(const Scenario& s, const std::filesystem::path& out) : s_(s), out_(out) {
    auto cfg = plane_config(s);
    cfg.event_log_path = out / "events.ndjson";
    plane_ = std::make_unique<ControlPlane>(s.topology, cfg);
  }

  void step(const Json& st) {
    const auto op = st["op"].get<std::string>();
    const auto alias = st.value("as", std::string());
    Json result;
    if (op == "provision") {
      const auto policy = st.contains("policy") ? protocol::policy_from_json(st["policy"]) : protocol::Policy{};
      result = plane_->create_session(st["site_a"], st["site_b"], policy);
      ids_[alias] = result["session_id"];
    } else if (op == "decide") {
      const auto verdict = st["verdict"] == "approve" ? protocol::Verdict::Approve : protocol::Verdict::Rollback;
      result = plane_->decide(resolve(st["session"]), verdict, st.value("reason", std::string()));
    } else if (op == "inject_fault") {
      const auto id = plane_->inject_fault(fault_from_json(st["fault"]));
      ids_[alias] = id;
      result = Json{{"id", id}};
    } else if (op == "clear_fault") {
      plane_->clear_fault(resolve(st["fault"]));
      result = Json{{"cleared", resolve(st["fault"])}};
    } else if (op == "capture_profile") {
      std::optional<int> channel;
      if (st.contains("channel")) channel = st["channel"].get<int>();
      auto p = plane_->profile(st["link"], optional_double(st, "resolution_km"), optional_double(st, "noise_sigma_db"),
                               channel);
      result = Json{{"link_id", st["link"]}, {"samples", p.size()}, {"resolution_km", p.resolution_km}};
      profiles_[alias] = std::move(p);
    } else if (op == "localize") {
      const auto& base = profile_of(st["baseline"]);
      const auto& cur = profile_of(st["current"]);
      const auto events = monitor::localize_step_loss(base, cur, st.value("min_step_db", 1.0));
      result = Json{{"events", to_json(events)}};
    } else if (op == "calibrate") {
      result = plane_->calibrate(st["link"]);
      ids_[alias] = result["id"];
    } else if (op == "optimize") {
      result = plane_->optimize(st["link"]);
    } else if (op == "detect_nf_fault") {
      const auto r = plane_->detect_nf_fault(st["link"], resolve(st["calibration"]));
      result = to_json(r);
      std::vector<double> deltas;
      for (const auto& e : r.report.entries) deltas.push_back(e.delta_db);
      deltas_[alias] = std::move(deltas);
    } else if (op == "plot") {
      plot(st);
      result = Json{{"file", st["file"]}};
    } else if (op == "assert") {
      check(st);
      return;
    }
    if (!alias.empty()) results_[alias] = result;
  }

  ControlPlane& plane() { return *plane_; }
  const Json& results() const { return results_; }

 private:
  static std::optional<double> optional_double(const Json& st, const char* key) {
    if (!st.contains(key)) return std::nullopt;
    return st[key].get<double>();
  }

  std::string resolve(const Json& ref) const {
    const auto name = ref.get<std::string>();
    auto it = ids_.find(name);
    return it == ids_.end() ? name : it->second;
  }

  const linetwin::PowerProfile& profile_of(const Json& ref) const {
    auto it = profiles_.find(ref.get<std::string>());
    if (it == profiles_.end()) throw Error(Errc::UnknownTarget, ref.get<std::string>() + " is not a captured profile");
    return it->second;
  }

  void plot(const Json& st) {
    const auto kind = parse_plot_kind(st["kind"].get<std::string>());
    const auto target = st["target"].get<std::string>();
    const auto file = out_ / st["file"].get<std::string>();
    PlotOptions opts;
    if (auto v = optional_double(st, "resolution_km")) opts.resolution_km = v;
    if (auto v = optional_double(st, "noise_sigma_db")) opts.noise_sigma_db = v;
    if (kind == PlotKind::Profile && profiles_.count(target)) {
      const auto& p = profiles_.at(target);
      write_table({linetwin::profile_csv(p), p.size()}, file);
    } else if (kind == PlotKind::OsnrErrorHist && deltas_.count(target)) {
      write_table(osnr_error_histogram(deltas_.at(target), opts.hist_bin_db), file);
    } else {
      emit_plot_data(*plane_, kind, resolve(st["target"]), file, opts);
    }
  }

  void check(const Json& st) const {
    const auto target = st["target"].get<std::string>();
    const Json::json_pointer ptr(st["pointer"].get<std::string>());
    const auto& doc = results_.at(target);
    if (!doc.contains(ptr)) throw Error(Errc::StepFailure, target + st["pointer"].get<std::string>() + " is absent");
    const auto& actual = doc.at(ptr);
    if (st.contains("equals")) {
      if (actual != st["equals"]) {
        throw Error(Errc::StepFailure, "expected " + st["equals"].dump() + ", got " + actual.dump());
      }
      return;
    }
    const double want = st["approx"].get<double>();
    const double tol = st["tol"].get<double>();
    if (!actual.is_number() || std::abs(actual.get<double>() - want) > tol) {
      throw Error(Errc::StepFailure, "expected " + st["approx"].dump() + " within " + st["tol"].dump() + ", got " + actual.dump());
    }
  }

  const Scenario& s_;
  std::filesystem::path out_;
  std::unique_ptr<ControlPlane> plane_;
  Json results_ = Json::object();
  std::map<std::string, std::string> ids_;
  std::map<std::string, linetwin::PowerProfile> profiles_;
  std::map<std::string, std::vector<double>> deltas_;
};

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) throw Error(Errc::ValidationError, "scenario must be an object");
  for (const auto& [key, value] : j.items()) {
    static const std::set<std::string> known{"name", "topology", "seed", "config", "steps"};
    if (!known.count(key)) throw Error(Errc::ValidationError, "scenario: unknown key " + key);
  }
  for (const char* k : {"name", "topology", "seed", "steps"}) {
    if (!j.contains(k)) throw Error(Errc::ValidationError, std::string("scenario: missing ") + k);
  }
  Scenario s;
  try {
    s.name = j["name"].get<std::string>();
    s.seed = seed_from_env(j["seed"].get<std::uint64_t>());
    s.config = j.value("config", Json::object());
    s.steps = j["steps"];
    if (!s.steps.is_array()) throw Error(Errc::ValidationError, "scenario: steps must be an array");
    s.topology = netmodel::load_topology(read_file(base_dir / j["topology"].get<std::string>()));
  } catch (const Json::exception& e) {
    throw Error(Errc::ValidationError, std::string("scenario: ") + e.what());
  }
  plane_config(s);
  check_steps(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(read_file(path), path.parent_path());
}

ScenarioResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  Runner runner(s, out_dir);
  Json summary{{"name", s.name}, {"seed", s.seed}, {"steps", s.steps.size()}};
  auto finish = [&](const Json& failure) {
    summary["results"] = runner.results();
    summary["events"] = runner.plane().last_seq();
    summary["final_digest"] = runner.plane().digest();
    summary["failure"] = failure;
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  };
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    try {
      runner.step(s.steps[i]);
    } catch (const Error& e) {
      const auto what = step_name(i, s.steps[i]) + ": " + std::string(to_string(e.code())) + ": " + e.detail();
      finish(Json{{"step", i + 1}, {"op", s.steps[i]["op"]}, {"error", what}});
      throw Error(Errc::StepFailure, what);
    } catch (const std::exception& e) {
      const auto what = step_name(i, s.steps[i]) + ": " + e.what();
      finish(Json{{"step", i + 1}, {"op", s.steps[i]["op"]}, {"error", what}});
      throw Error(Errc::StepFailure, what);
    }
  }
  finish(nullptr);
  return {runner.results(), runner.plane().digest(), runner.plane().last_seq()};
}

}  // namespace dcx::gateway
