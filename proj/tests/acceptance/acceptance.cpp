// Acceptance run: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dcx/error.hpp"
#include "dcx/gateway/control_plane.hpp"
#include "dcx/gateway/plots.hpp"
#include "dcx/gateway/scenario.hpp"
#include "dcx/linetwin/twin.hpp"
#include "dcx/monitor/calibration.hpp"
#include "dcx/monitor/delay.hpp"
#include "dcx/monitor/gain_tilt.hpp"
#include "dcx/monitor/nf_fault.hpp"
#include "dcx/monitor/profile_analysis.hpp"
#include "dcx/protocol/session.hpp"
#include "dcx/qot/ber.hpp"
#include "dcx/qot/budget.hpp"
#include "dcx/qot/link_model.hpp"
#include "dcx/routing/routing.hpp"
#include "dcx/units.hpp"
#include "support/fixtures.hpp"

using namespace dcx;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail, Clock::time_point t0) {
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::printf("%s %2d %-24s %s (%.2f s)\n", ok ? "PASS" : "FAIL", n, name, detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Runs a criterion body; an escaping exception is a failure with its message.
void criterion(int n, const char* name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = Clock::now();
  try {
    const auto [ok, detail] = body();
    report(n, name, ok, detail, t0);
  } catch (const std::exception& e) {
    report(n, name, false, std::string("exception: ") + e.what(), t0);
  }
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))) - 1;
  return v[std::min(idx, v.size() - 1)];
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> ber_engine() {
  const auto t0 = Clock::now();
  const auto qam = qot::constants_for(netmodel::Modulation::QAM16);
  const auto qpsk = qot::constants_for(netmodel::Modulation::QPSK);
  // mpmath: 3/8 * erfc(sqrt(1))
  const double ber10 = qot::ber_from_snr(10.0, qam);
  const bool point = std::abs(ber10 - 0.058987202643856924) <= 1e-7;

  double worst = 0.0;
  for (const auto& m : {qam, qpsk}) {
    const double hi = std::min(0.374, m.kappa1 * 0.999);
    for (int k = 0; k <= 400; ++k) {
      const double ber = std::exp(std::log(1e-6) + (std::log(hi) - std::log(1e-6)) * k / 400.0);
      const double back = qot::ber_from_snr(qot::snr_from_ber(ber, m), m);
      worst = std::max(worst, std::abs(back - ber) / ber);
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return {point && worst <= 1e-9 && secs < 1.0,
          fmt("ber(10,16QAM)=%.9f round-trip max rel %.2e runtime %.3f s", ber10, worst, secs)};
}

// ---------------------------------------------------------------------------

// Gains follow the preceding loss within +-1 dB; `excess` carries the running
// gain surplus across segments and is kept within +-2 dB.
netmodel::OpticalLink random_segment(std::mt19937_64& rng, const std::string& id, int& edfa_counter,
                                     double& excess) {
  std::uniform_int_distribution<int> spans(1, 4);
  std::uniform_real_distribution<double> len(30.0, 100.0), conn(0.0, 1.0), nf(4.5, 7.0), tilt(-1.0, 1.0),
      off(-1.0, 1.0), roadm(0.0, 1.0);
  netmodel::OpticalLink link;
  link.id = id;
  link.endpoints = {id + "a", id + "b"};
  if (roadm(rng) < 0.3) {
    netmodel::RoadmUnit r;
    r.id = id + "-roadm";
    r.insertion_loss_db = 4.0 + 4.0 * roadm(rng);
    link.elements.push_back(r);
    link.elements.push_back(dcx::testing::edfa("e" + std::to_string(++edfa_counter), r.insertion_loss_db, nf(rng)));
  }
  const int n = spans(rng);
  for (int s = 0; s < n; ++s) {
    auto sp = dcx::testing::span(len(rng), conn(rng));
    link.elements.push_back(sp);
    const double gain = std::clamp(sp.total_loss_db() + std::clamp(off(rng), -2.0 - excess, 2.0 - excess), 10.0, 25.0);
    excess += gain - sp.total_loss_db();
    link.elements.push_back(dcx::testing::edfa("e" + std::to_string(++edfa_counter), gain, nf(rng), tilt(rng)));
  }
  return link;
}

std::pair<bool, std::string> concatenation() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> nseg(2, 5);
  std::uniform_real_distribution<double> launch(-2.0, 2.0);
  netmodel::ChannelGrid grid;
  grid.count = 16;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int counter = 0;
    double excess = 0.0;
    std::vector<netmodel::OpticalLink> segs;
    const int m = nseg(rng);
    for (int k = 0; k < m; ++k) segs.push_back(random_segment(rng, "S" + std::to_string(k), counter, excess));
    netmodel::OpticalLink full;
    full.id = "full";
    for (const auto& s : segs) full.elements.insert(full.elements.end(), s.elements.begin(), s.elements.end());
    const std::vector<double> p(static_cast<std::size_t>(grid.count), launch(rng));

    const auto one_pass = qot::link_gsnr(full, grid, p).gsnr;

    // Each segment is evaluated from its in-path input state.
    std::vector<std::vector<double>> seg_gsnr;
    auto state = qot::ChannelState::from_launch(p);
    for (const auto& s : segs) {
      const auto tr = qot::trace_link(s, grid, state);
      seg_gsnr.push_back(qot::incremental_gsnr(tr));
      state = tr.output();
    }
    for (std::size_t ch = 0; ch < one_pass.size(); ++ch) {
      std::vector<double> g;
      for (const auto& seg : seg_gsnr) g.push_back(seg[ch]);
      worst = std::max(worst, std::abs(qot::concatenate_gsnr(g) - one_pass[ch]) / one_pass[ch]);
    }
  }
  const std::vector<double> fig{units::db_to_lin(20), units::db_to_lin(18), units::db_to_lin(17),
                                units::db_to_lin(19)};
  const double e2e = units::lin_to_db(qot::concatenate_gsnr(fig));
  const bool ok = worst <= 1e-9 && std::abs(e2e - 12.337) <= 1e-3;
  return {ok, fmt("1000 sets max rel %.2e; [20,18,17,19] dB -> %.4f dB", worst, e2e)};
}

// ---------------------------------------------------------------------------

netmodel::Topology complete_graph(int m) {
  netmodel::Topology t;
  t.sites.push_back({"a", netmodel::SiteKind::UDC, false, {}});
  t.sites.push_back({"b", netmodel::SiteKind::SDC, false, {}});
  for (int i = 1; i <= m; ++i) t.sites.push_back({"P" + std::to_string(i), netmodel::SiteKind::POP, true, {}});
  auto link = [&](const std::string& id, netmodel::LinkKind kind, const std::string& x, const std::string& y) {
    netmodel::OpticalLink l;
    l.id = id;
    l.kind = kind;
    l.endpoints = {x, y};
    l.elements.push_back(dcx::testing::span(40.0));
    t.links.push_back(l);
  };
  link("AAL-a", netmodel::LinkKind::AAL, "a", "P1");
  link("AAL-b", netmodel::LinkKind::AAL, "b", "P2");
  for (int i = 1; i <= m; ++i) {
    for (int j = i + 1; j <= m; ++j) {
      link("C" + std::to_string(i) + "-" + std::to_string(j), netmodel::LinkKind::CarrierLink,
           "P" + std::to_string(i), "P" + std::to_string(j));
    }
  }
  return t;
}

// Depth-first enumeration of every simple POP path P1 -> P2, independent of
// the library's search.
std::set<std::vector<std::string>> exhaustive_paths(int m, int max_pops) {
  std::set<std::vector<std::string>> out;
  std::vector<std::string> path{"P1"};
  std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
  used[1] = true;
  std::function<void(int)> dfs = [&](int at) {
    if (at == 2) {
      out.insert(path);
      return;
    }
    if (static_cast<int>(path.size()) >= max_pops) return;
    for (int next = 1; next <= m; ++next) {
      if (used[static_cast<std::size_t>(next)]) continue;
      used[static_cast<std::size_t>(next)] = true;
      path.push_back("P" + std::to_string(next));
      dfs(next);
      path.pop_back();
      used[static_cast<std::size_t>(next)] = false;
    }
  };
  dfs(1);
  return out;
}

std::pair<bool, std::string> routes() {
  const auto five = routing::enumerate_routes(complete_graph(5), "a", "b", 3);
  int two = 0, three = 0;
  for (const auto& r : five) (r.pop_sequence.size() == 2 ? two : three) += 1;
  bool ok = five.size() == 4 && two == 1 && three == 3;
  int checked = 0;
  for (int m = 3; m <= 8; ++m) {
    const auto t = complete_graph(m);
    for (int k = 2; k <= m; ++k) {
      std::set<std::vector<std::string>> got;
      for (const auto& r : routing::enumerate_routes(t, "a", "b", k)) got.insert(r.pop_sequence);
      ok = ok && got == exhaustive_paths(m, k);
      ++checked;
    }
  }
  return {ok, fmt("5 POPs: %zu routes (%d two-POP, %d three-POP); %d (M, max_pops) cases vs exhaustive search",
                  five.size(), two, three, checked)};
}

// ---------------------------------------------------------------------------

struct QCase {
  netmodel::OpticalLink truth;
  netmodel::OpticalLink priors;
};

QCase random_q_case(std::mt19937_64& rng, int index) {
  std::uniform_int_distribution<int> nspans(3, 5);
  std::uniform_real_distribution<double> len(50.0, 90.0), conn(0.0, 1.5), nf(4.5, 7.0);
  const int n = nspans(rng);
  std::vector<netmodel::FiberSpan> spans;
  std::vector<double> nfs;
  for (int s = 0; s < n; ++s) {
    spans.push_back(dcx::testing::span(len(rng), conn(rng)));
    nfs.push_back(nf(rng));
  }
  QCase c;
  c.truth = dcx::testing::amplified_line("Q" + std::to_string(index), spans, nfs);
  c.priors = c.truth;
  for (auto& e : c.priors.elements) {
    if (auto* s = std::get_if<netmodel::FiberSpan>(&e)) s->conn_in_db = 0.0;
    if (auto* a = std::get_if<netmodel::EdfaUnit>(&e)) a->nf_curve = {{10.0, 5.5}, {25.0, 5.5}};
  }
  return c;
}

double q_of(const netmodel::OpticalLink& link, const netmodel::ChannelGrid& grid, std::span<const double> launch,
            const qot::TrxNoiseModel& trx, int ch) {
  const auto tr = qot::trace_link(link, grid, launch);
  const auto i = static_cast<std::size_t>(ch);
  const double g = qot::gsnr(tr)[i];
  const double snr = qot::total_snr(g, trx, tr.output().sig_mw[i]);
  return qot::q_db_from_ber(qot::ber_from_snr(snr, qot::constants_for(netmodel::Modulation::QAM16)));
}

std::pair<bool, std::string> q_budget() {
  const auto t0 = Clock::now();
  const auto mesh = dcx::testing::load_fixture("mesh5.json");
  const auto trx = mesh.trx_models.front().model;
  const netmodel::ChannelGrid grid;
  const std::vector<double> launch(static_cast<std::size_t>(grid.count), 0.0);
  const int ch = grid.count / 2;
  std::mt19937_64 rng(77);
  std::vector<double> err_noisy, err_clean, err_uncal;
  for (int i = 0; i < 50; ++i) {
    const auto c = random_q_case(rng, i);
    const double measured = q_of(c.truth, grid, launch, trx, ch);
    for (double sigma : {0.1, 0.0}) {
      const auto snaps = monitor::collect_operating_points(c.truth, grid, {}, launch, sigma, 1000 + 17 * i);
      const auto calib = monitor::calibrate_line(snaps, c.priors, grid);
      const double predicted = q_of(monitor::apply_calibration(c.priors, calib), grid, launch, trx, ch);
      (sigma > 0.0 ? err_noisy : err_clean).push_back(std::abs(predicted - measured));
    }
    err_uncal.push_back(std::abs(q_of(c.priors, grid, launch, trx, ch) - measured));
  }
  const auto within = std::count_if(err_noisy.begin(), err_noisy.end(), [](double e) { return e <= 0.3; });
  const double clean_max = *std::max_element(err_clean.begin(), err_clean.end());
  const double p95 = percentile(err_noisy, 0.95);
  const double p95_uncal = percentile(err_uncal, 0.95);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  const bool ok = within >= 48 && clean_max <= 0.05 && p95_uncal >= 2.0 * p95 && secs < 60.0;
  return {ok, fmt("sigma 0.1: %ld/50 within 0.3 dB (p95 %.3f); noiseless max %.4f dB; uncalibrated p95 %.3f dB "
                  "(%.1fx); runtime %.1f s",
                  static_cast<long>(within), p95, clean_max, p95_uncal, p95_uncal / std::max(p95, 1e-12), secs)};
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> localization() {
  const auto t = dcx::testing::load_fixture("line4x80.json");
  const auto& link = *t.find_link("L4x80");
  const std::vector<double> launch(static_cast<std::size_t>(t.grid.count), 0.0);
  linetwin::FaultSpec f;
  f.link_id = link.id;
  f.distance_km = 160.0;  // after the second EDFA
  f.magnitude_db = 2.0;
  const std::vector<linetwin::FaultSpec> faults{f};
  const auto clean = linetwin::propagate(link, t.grid, launch);
  const auto hit = linetwin::propagate(link, t.grid, launch, faults);

  auto run = [&](double sigma, std::uint64_t seed, double km_tol, double db_tol) {
    const auto base = linetwin::synthesize_profile(link, clean, 0.5, sigma, 2 * seed);
    const auto cur = linetwin::synthesize_profile(link, hit, 0.5, sigma, 2 * seed + 1);
    const auto ev = monitor::localize_step_loss(base, cur, 0.5);
    return ev.size() == 1 && std::abs(ev[0].distance_km - 160.0) <= km_tol &&
           std::abs(ev[0].magnitude_db - 2.0) <= db_tol;
  };
  const bool exact = run(0.0, 0, 0.5, 1e-6);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) hits += run(0.1, seed, 1.0, 0.3);
  return {exact && hits >= 95, fmt("noiseless exact: %s; sigma 0.1: %d/100 within 1 km and 0.3 dB",
                                   exact ? "yes" : "no", hits)};
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> nf_detection() {
  const auto t = dcx::testing::load_fixture("line4x80.json");
  const auto& link = *t.find_link("L4x80");
  const std::vector<double> launch(static_cast<std::size_t>(t.grid.count), 0.0);
  linetwin::FaultSpec f;
  f.kind = linetwin::FaultKind::NfDegradation;
  f.link_id = link.id;
  f.edfa_id = "edfa3";
  f.magnitude_db = 8.0;
  const std::vector<linetwin::FaultSpec> faults{f};
  int hits = 0, false_flags = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::uint64_t base_seed = 100000 + 1000 * seed;
    const auto base = monitor::calibrate_line(
        monitor::collect_operating_points(link, t.grid, {}, launch, 0.1, base_seed), link, t.grid);
    const auto faulty = monitor::detect_nf_fault(
        monitor::collect_operating_points(link, t.grid, faults, launch, 0.1, base_seed + 100), base, link, t.grid);
    hits += faulty.flagged == std::vector<std::string>{"edfa3"};
    const auto healthy = monitor::detect_nf_fault(
        monitor::collect_operating_points(link, t.grid, {}, launch, 0.1, base_seed + 200), base, link, t.grid);
    false_flags += !healthy.flagged.empty();
  }
  return {hits >= 95 && false_flags == 0,
          fmt("8 dB on edfa3 flagged alone in %d/100; false flags %d/100 (k=3)", hits, false_flags)};
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> gain_tilt() {
  const auto t0 = Clock::now();
  gateway::ControlPlane plane(dcx::testing::load_fixture("tilted4.json"), gateway::PlaneConfig{});
  const std::string link_id = "T4";
  const auto& grid = plane.topology().grid;
  const auto launch = plane.launch(link_id);
  const auto before = monitor::final_edfa_spread(plane.twin().link(link_id), grid, launch);

  plane.calibrate(link_id);
  const auto opt = plane.optimize(link_id);
  const auto report = gateway::plot_table(plane, gateway::PlotKind::AccumulatedGsnr, link_id);
  const auto q = gateway::plot_table(plane, gateway::PlotKind::QVsPower, link_id);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();

  // Settings are applied to the twin; the spread is judged on ground truth.
  const auto after = monitor::final_edfa_spread(plane.twin().link(link_id), grid, launch);
  const auto& hist = opt.at("result").at("objective_history");
  bool monotone = true;
  for (std::size_t i = 1; i < hist.size(); ++i) monotone = monotone && hist[i].get<double>() >= hist[i - 1].get<double>();
  const double loss = before.mean_db - after.mean_db;
  const bool ok = before.flatness_db >= 1.5 && after.flatness_db <= 0.5 && loss <= 0.2 && monotone &&
                  report.rows > 0 && q.rows > 0 && secs < 60.0;
  return {ok, fmt("spread %.3f -> %.3f dB, mean GSNR change %+.3f dB, %zu moves monotone=%s, pipeline %.2f s",
                  before.flatness_db, after.flatness_db, -loss, hist.size() - 1, monotone ? "yes" : "no", secs)};
}

// ---------------------------------------------------------------------------

std::vector<std::string> golden_lines() {
  std::istringstream in(dcx::testing::read_data("golden/happy_path.ndjson"));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::pair<bool, std::string> protocol_checks() {
  using namespace protocol;
  const auto topo = dcx::testing::load_fixture("mesh5.json");
  const auto probe = fixed_probe({20, 18, 17, 19}, topo.trx_models.front().model);
  Policy auto_route;
  auto_route.auto_approve = true;
  auto_route.route_id = "A:P1-P3-P2:B";

  // Happy path against the golden log.
  OccupancyCoordinator occ;
  DeviceRegistry dev(topo);
  Session happy("s1", topo, occ, dev, probe, "A", "B", auto_route);
  happy.start();
  const bool golden = happy.state() == State::Committed && happy.log_lines() == golden_lines();
  std::vector<MessageKind> order;
  for (const auto& e : happy.log()) {
    if (order.empty() || order.back() != e.message.kind) order.push_back(e.message.kind);
  }
  const std::vector<MessageKind> phases{MessageKind::RegisterTrx, MessageKind::CatalogAdvert, MessageKind::ProbeResult,
                                        MessageKind::ConfigureAck, MessageKind::Decision};
  std::size_t next = 0;
  for (auto k : order) {
    if (next < phases.size() && k == phases[next]) ++next;
  }
  const bool sequence = next == phases.size();

  // Disjoint catalogs.
  auto disjoint = topo;
  for (auto& cat : disjoint.catalogs) {
    if (cat.id == disjoint.find_trx("trxB")->catalog_id) {
      for (auto& m : cat.modes) m.fec = "x-" + m.fec;
    }
  }
  OccupancyCoordinator occ2;
  DeviceRegistry dev2(disjoint);
  const auto r = run_provisioning(disjoint, occ2, dev2, probe, "A", "B", auto_route);
  const bool no_mode = r.state == State::Errored && r.error_code == "NoInteroperableMode";

  // Rollback after a committed neighbour.
  OccupancyCoordinator occ3;
  DeviceRegistry dev3(topo);
  Policy manual;
  Session first("s1", topo, occ3, dev3, probe, "A", "B", manual);
  first.start();
  first.decide(Verdict::Approve, "ok");
  const auto committed = dev3.serialize();
  const auto committed_occ = occ3.snapshot();
  Session second("s2", topo, occ3, dev3, probe, "A", "B", manual);
  second.start();
  second.decide(Verdict::Rollback, "no");
  const bool rollback = second.state() == State::RolledBack && dev3.serialize() == committed &&
                        occ3.snapshot() == committed_occ;

  // Randomized delivery order.
  int partial = 0, committed_runs = 0;
  const auto initial = DeviceRegistry(topo).serialize();
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    OccupancyCoordinator o;
    DeviceRegistry d(topo);
    std::mt19937_64 rng(seed);
    Scheduler shuffle = [&rng](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    Session s("s1", topo, o, d, probe, "A", "B", auto_route);
    s.start(shuffle);
    bool claimed = false;
    for (const auto& [link, chans] : o.snapshot()) claimed = claimed || !chans.empty();
    if (s.state() == State::Committed) {
      ++committed_runs;
      const auto& c = s.carrier();
      // Each end holds its own vendor's id for the common mode.
      bool whole = true;
      for (const char* trx : {"trxA", "trxB"}) {
        const auto& cfg = d.get(trx);
        whole = whole && cfg.enabled && !cfg.mode_id.empty() && cfg.channel == c.spectrum->channel_index &&
                cfg.route_id == c.route->id;
      }
      const auto claims = o.snapshot();
      for (const auto& link : routing::carrier_links(topo, *c.route)) {
        auto it = claims.find(link);
        whole = whole && it != claims.end() && it->second.count(c.spectrum->channel_index);
      }
      partial += !whole;
    } else {
      partial += claimed || d.serialize() != initial || !is_terminal(s.state());
    }
  }
  const bool ok = golden && sequence && no_mode && rollback && partial == 0;
  return {ok, fmt("golden %s, phases %s, disjoint catalogs -> %s, rollback identical %s, 1000 reorderings: %d "
                  "committed, %d partial",
                  golden ? "match" : "DIFFER", sequence ? "in order" : "OUT OF ORDER", r.error_code.c_str(),
                  rollback ? "yes" : "no", committed_runs, partial)};
}

// ---------------------------------------------------------------------------

std::pair<bool, std::string> delay() {
  const double l100 = monitor::span_length_from_rtt(linetwin::measure_roundtrip_us(100.0));
  const double l27 = monitor::span_length_from_rtt(linetwin::measure_roundtrip_us(27.4));
  // rtt = 2 L n / c with n = 1.468, c = 299792.458 km/s
  const double oracle100 = 979.3441835017744;
  const double oracle27 = 268.3403062794862;
  const bool ok = std::abs(l100 - 100.0) <= 0.01 && std::abs(l27 - 27.4) <= 0.01 &&
                  std::abs(linetwin::measure_roundtrip_us(100.0) - oracle100) <= 1e-6 &&
                  std::abs(linetwin::measure_roundtrip_us(27.4) - oracle27) <= 1e-6;
  return {ok, fmt("rtt %.4f us -> %.6f km; rtt %.4f us -> %.6f km", oracle100, l100, oracle27, l27)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::pair<bool, std::string> determinism() {
  const auto root = fs::temp_directory_path() / "dcx_acceptance_determinism";
  fs::remove_all(root);
  const fs::path dir = fs::path(DCX_TEST_DATA) / "scenarios";
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  int compared = 0, differing = 0;
  for (const auto& file : files) {
    const auto scenario = gateway::load_scenario(file);
    const auto a = root / (file.stem().string() + "_a");
    const auto b = root / (file.stem().string() + "_b");
    gateway::run_scenario(scenario, a);
    gateway::run_scenario(scenario, b);
    for (const auto& e : fs::directory_iterator(a)) {
      ++compared;
      differing += !fs::exists(b / e.path().filename()) || slurp(e.path()) != slurp(b / e.path().filename());
    }
  }
  fs::remove_all(root);
  return {compared > 0 && differing == 0,
          fmt("%zu scenarios run twice, %d artifacts compared, %d differ", files.size(), compared, differing)};
}

}  // namespace

int main() {
  criterion(1, "BER/SNR engine", ber_engine);
  criterion(2, "GSNR concatenation", concatenation);
  criterion(3, "Route enumeration", routes);
  criterion(4, "Q-estimation budget", q_budget);
  criterion(5, "Step-loss localization", localization);
  criterion(6, "NF-fault detection", nf_detection);
  criterion(7, "Gain/tilt optimization", gain_tilt);
  criterion(8, "Provisioning protocol", protocol_checks);
  criterion(9, "Delay to length", delay);
  criterion(10, "Determinism", determinism);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
