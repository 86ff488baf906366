#include "dcx/gateway/api.hpp"

#include <httplib.h>

#include <sstream>
#include <vector>

#include "dcx/error.hpp"
#include "dcx/gateway/reports.hpp"

namespace dcx::gateway {

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '/')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

int status_for(Errc code) {
  switch (code) {
    case Errc::NotFound:
    case Errc::UnknownLink:
    case Errc::UnknownFault:
    case Errc::UnknownTarget:
      return 404;
    case Errc::NotPending:
    case Errc::NoBaseline:
    case Errc::SpectrumConflict:
      return 409;
    default:
      return 400;
  }
}

ApiResponse error_response(int status, std::string_view code, const std::string& detail) {
  return {status, Json{{"error", {{"code", code}, {"detail", detail}}}}};
}

Json parse_body(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::exception& e) {
    throw Error(Errc::ParseError, std::string("request body: ") + e.what());
  }
}

std::optional<double> query_double(const ApiRequest& r, const std::string& key) {
  auto it = r.query.find(key);
  if (it == r.query.end()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::ValidationError, "query " + key + "=" + it->second);
  }
}

std::string body_string(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    throw Error(Errc::ValidationError, std::string("body needs string ") + key);
  }
  return body[key].get<std::string>();
}

ApiResponse route(ControlPlane& plane, const ApiRequest& r, const ApiOptions& opts) {
  const auto seg = split_path(r.path);
  const auto& m = r.method;
  const auto n = seg.size();
  auto is = [&](std::initializer_list<const char*> pattern) {
    if (pattern.size() != n) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (std::string_view(p) != "*" && seg[i] != p) return false;
      ++i;
    }
    return true;
  };

  if (m == "GET" && is({"topology"})) return {200, Json::parse(netmodel::serialize_topology(plane.topology()))};

  if (m == "POST" && is({"sessions"})) {
    const auto body = parse_body(r.body);
    const auto a = body_string(body, "site_a");
    const auto b = body_string(body, "site_b");
    const auto policy = body.contains("policy") ? protocol::policy_from_json(body["policy"]) : protocol::Policy{};
    try {
      return {201, plane.create_session(a, b, policy)};
    } catch (const Error& e) {
      if (e.code() == Errc::UnknownSite) throw Error(Errc::ValidationError, "unknown site " + e.detail());
      throw;
    }
  }
  if (m == "GET" && is({"sessions"})) {
    std::optional<protocol::State> filter;
    if (auto it = r.query.find("state"); it != r.query.end()) {
      filter = it->second == "pending" ? std::optional(protocol::State::PendingApproval) : protocol::parse_state(it->second);
      if (!filter) throw Error(Errc::ValidationError, "state " + it->second);
    }
    return {200, plane.sessions(filter)};
  }
  if (m == "GET" && is({"sessions", "*"})) return {200, plane.session(seg[1])};
  if (m == "POST" && is({"sessions", "*", "decision"})) {
    const auto body = parse_body(r.body);
    const auto v = body_string(body, "verdict");
    if (v != "approve" && v != "rollback") throw Error(Errc::ValidationError, "verdict " + v);
    const auto reason = body.contains("reason") ? body_string(body, "reason") : std::string();
    return {200, plane.decide(seg[1], v == "approve" ? protocol::Verdict::Approve : protocol::Verdict::Rollback,
                              reason)};
  }

  if (m == "GET" && is({"links", "*", "profile"})) {
    std::optional<int> channel;
    if (auto c = query_double(r, "channel")) channel = static_cast<int>(*c);
    const auto p = plane.profile(seg[1], query_double(r, "resolution_km"), query_double(r, "noise_sigma_db"), channel);
    auto j = to_json(p);
    j["link_id"] = seg[1];
    return {200, j};
  }
  if (m == "GET" && is({"links", "*", "gsnr"})) return {200, plane.gsnr(seg[1])};

  if ((m == "POST" && is({"faults"})) || (m == "DELETE" && is({"faults", "*"}))) {
    if (opts.no_chaos) return error_response(403, "Forbidden", "fault injection disabled");
    if (m == "DELETE") {
      plane.clear_fault(seg[1]);
      return {200, Json{{"cleared", seg[1]}}};
    }
    const auto body = parse_body(r.body);
    const auto spec = fault_from_json(body.is_object() && body.contains("spec") ? body["spec"] : body);
    return {201, Json{{"id", plane.inject_fault(spec)}}};
  }

  if (m == "POST" && is({"calibrations"})) {
    const auto body = parse_body(r.body);
    return {201, plane.calibrate(body_string(body, "link_id"))};
  }
  if (m == "GET" && is({"calibrations", "*"})) return {200, plane.calibration(seg[1])};
  if (m == "POST" && is({"optimizations"})) {
    const auto body = parse_body(r.body);
    return {201, plane.optimize(body_string(body, "link_id"))};
  }

  if (m == "GET" && is({"events"})) {
    std::uint64_t since = 0;
    if (auto s = query_double(r, "since")) {
      if (*s < 0) throw Error(Errc::ValidationError, "since must be >= 0");
      since = static_cast<std::uint64_t>(*s);
    }
    Json events = Json::array();
    for (const auto& e : plane.events_since(since)) events.push_back(to_json(e));
    return {200, Json{{"events", events}, {"last_seq", plane.last_seq()}}};
  }
  return error_response(404, "NotFound", m + " " + r.path);
}

}  // namespace

ApiResponse handle_request(ControlPlane& plane, const ApiRequest& request, const ApiOptions& options) {
  try {
    return route(plane, request, options);
  } catch (const Error& e) {
    return error_response(status_for(e.code()), to_string(e.code()), e.detail());
  } catch (const std::exception& e) {
    return error_response(400, "ValidationError", e.what());
  }
}

struct ApiServer::Impl {
  ControlPlane& plane;
  ApiOptions options;
  httplib::Server server;
};

ApiServer::ApiServer(ControlPlane& plane, ApiOptions options) : impl_(new Impl{plane, options, {}}) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query[k] = v;
    const auto out = handle_request(impl_->plane, r, impl_->options);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.Delete(".*", handler);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(Errc::BindFailure, host + ":" + std::to_string(port));
  return bound;
}

void ApiServer::listen() { impl_->server.listen_after_bind(); }

void ApiServer::start() {
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void ApiServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dcx::gateway
