#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dcx/error.hpp"
#include "dcx/gateway/api.hpp"
#include "dcx/gateway/control_plane.hpp"
#include "dcx/gateway/event_log.hpp"
#include "dcx/gateway/plots.hpp"
#include "dcx/gateway/scenario.hpp"

using namespace dcx;

namespace {

gateway::ApiServer* g_server = nullptr;

netmodel::Topology read_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::NotFound, path);
  std::stringstream ss;
  ss << in.rdbuf();
  return netmodel::load_topology(ss.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DCX optical network control plane"};
  app.require_subcommand(1);

  std::string topology_path;
  std::uint64_t seed = 1;

  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON API");
  int port = 8080;
  std::string host = "127.0.0.1";
  bool no_chaos = false;
  std::string event_log;
  serve->add_option("--topology", topology_path, "Topology document")->required();
  serve->add_option("--port", port, "Listen port (0 picks one)");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--seed", seed, "Seed for all randomness");
  serve->add_flag("--no-chaos", no_chaos, "Disable fault-injection endpoints");
  serve->add_option("--event-log", event_log, "Mirror the event log to this file");

  auto* scenario = app.add_subcommand("run-scenario", "Run a scenario file");
  std::string scenario_path, out_dir;
  scenario->add_option("file", scenario_path, "Scenario document")->required();
  scenario->add_option("--out", out_dir, "Artifact directory")->required();

  auto* provision = app.add_subcommand("provision", "Provision a connection between two sites");
  std::string site_a, site_b, route;
  bool auto_approve = false;
  provision->add_option("site_a", site_a)->required();
  provision->add_option("site_b", site_b)->required();
  provision->add_option("--topology", topology_path, "Topology document")->required();
  provision->add_option("--seed", seed, "Seed for all randomness");
  provision->add_option("--route", route, "Pin the route id");
  provision->add_flag("--auto-approve", auto_approve, "Commit without operator approval");

  auto* plot = app.add_subcommand("plot", "Write a plot table");
  std::string kind, target, out_file;
  double resolution_km = linetwin::kDefaultResolutionKm;
  plot->add_option("kind", kind, "profile | accumulated_gsnr | q_vs_power | osnr_error_hist")->required();
  plot->add_option("target", target, "Link id")->required();
  plot->add_option("--out", out_file, "Output file")->required();
  plot->add_option("--topology", topology_path, "Topology document")->required();
  plot->add_option("--seed", seed, "Seed for all randomness");
  plot->add_option("--resolution-km", resolution_km, "Profile sample spacing");

  auto* replay = app.add_subcommand("replay", "Fold an event log and print the final state");
  std::string log_path;
  replay->add_option("log", log_path, "Event log (NDJSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      gateway::PlaneConfig cfg;
      cfg.seed = gateway::seed_from_env(seed);
      if (!event_log.empty()) cfg.event_log_path = event_log;
      gateway::ControlPlane plane(read_topology(topology_path), cfg);
      gateway::ApiServer server(plane, {no_chaos});
      const int bound = server.bind(host, port);
      std::cout << "listening on " << host << ":" << bound << (no_chaos ? " (no chaos)" : "") << std::endl;
      g_server = &server;
      std::signal(SIGINT, [](int) { g_server->stop(); });
      std::signal(SIGTERM, [](int) { g_server->stop(); });
      server.listen();
      return 0;
    }
    if (*scenario) {
      const auto s = gateway::load_scenario(scenario_path);
      const auto r = gateway::run_scenario(s, out_dir);
      std::cout << s.name << ": " << s.steps.size() << " steps, " << r.events << " events, digest " << r.final_digest
                << "\n";
      return 0;
    }
    if (*provision) {
      gateway::PlaneConfig cfg;
      cfg.seed = gateway::seed_from_env(seed);
      gateway::ControlPlane plane(read_topology(topology_path), cfg);
      protocol::Policy policy;
      policy.auto_approve = auto_approve;
      if (!route.empty()) policy.route_id = route;
      const auto summary = plane.create_session(site_a, site_b, policy);
      for (const auto& e : plane.session(summary["session_id"])["log"]) std::cout << e.dump() << "\n";
      std::cout << summary.dump(2) << "\n";
      const auto state = summary["state"].get<std::string>();
      return state == "Committed" || state == "PendingApproval" ? 0 : 1;
    }
    if (*plot) {
      gateway::PlaneConfig cfg;
      cfg.seed = gateway::seed_from_env(seed);
      gateway::ControlPlane plane(read_topology(topology_path), cfg);
      gateway::PlotOptions opts;
      opts.resolution_km = resolution_km;
      const auto t = gateway::emit_plot_data(plane, gateway::parse_plot_kind(kind), target, out_file, opts);
      std::cout << t.rows << " rows written to " << out_file << "\n";
      return 0;
    }
    if (*replay) {
      const auto r = gateway::replay_events_file(log_path);
      std::cout << gateway::Json{{"last_seq", r.last_seq}, {"digest", r.digest}, {"state", r.state}}.dump(2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.detail() << "\n";
    return 2;
  }
  return 0;
}
