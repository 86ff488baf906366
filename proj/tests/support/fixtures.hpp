#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcx/netmodel/topology.hpp"

namespace dcx::testing {

inline netmodel::FiberSpan span(double length_km, double conn_in_db = 0.0, double loss_tilt_db = 0.0) {
  netmodel::FiberSpan s;
  s.length_km = length_km;
  s.conn_in_db = conn_in_db;
  s.loss_tilt_db = loss_tilt_db;
  return s;
}

/// Flat NF curve over the actuator range.
inline netmodel::EdfaUnit edfa(const std::string& id, double gain_db, double nf_db, double tilt_db = 0.0) {
  netmodel::EdfaUnit e;
  e.id = id;
  e.gain_db = gain_db;
  e.tilt_db = tilt_db;
  e.gain_range_db = {10.0, 25.0};
  e.tilt_range_db = {-3.0, 3.0};
  e.nf_curve = {{10.0, nf_db}, {25.0, nf_db}};
  e.max_total_out_dbm = 26.0;
  return e;
}

/// Gain-dependent NF curve: nf_db at 10 dB gain falling to nf_db - 1.5 at 25 dB.
inline netmodel::EdfaUnit sloped_edfa(const std::string& id, double gain_db, double nf_db) {
  auto e = edfa(id, gain_db, nf_db);
  e.nf_curve = {{10.0, nf_db}, {18.0, nf_db - 1.0}, {25.0, nf_db - 1.5}};
  return e;
}

/// spans[i] followed by EDFA "edfa{i+1}" with gain equal to the span loss.
inline netmodel::OpticalLink amplified_line(const std::string& id, const std::vector<netmodel::FiberSpan>& spans,
                                            const std::vector<double>& nf_db) {
  netmodel::OpticalLink link;
  link.id = id;
  link.endpoints = {"P1", "P2"};
  for (std::size_t i = 0; i < spans.size(); ++i) {
    link.elements.push_back(spans[i]);
    link.elements.push_back(edfa("edfa" + std::to_string(i + 1), spans[i].total_loss_db(), nf_db.at(i)));
  }
  return link;
}

/// Four 80 km spans, each followed by a 16 dB EDFA.
inline netmodel::OpticalLink line_4x80(double nf_db = 5.5) {
  return amplified_line("L4x80", {span(80), span(80), span(80), span(80)}, {nf_db, nf_db, nf_db, nf_db});
}

inline std::string data_path(const std::string& name) { return std::string(DCX_TEST_DATA) + "/" + name; }

inline std::string read_data(const std::string& name) {
  std::ifstream in(data_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing test data " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline netmodel::Topology load_fixture(const std::string& name) { return netmodel::load_topology(read_data(name)); }

}  // namespace dcx::testing
