#pragma once

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "dcx/gateway/control_plane.hpp"

namespace dcx::gateway {

struct ApiOptions {
  bool no_chaos = false;  // fault endpoints answer 403
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Routes one request to the control plane. Never throws; failures map to
/// 400 (validation), 403 (chaos disabled), 404 (unknown id) and 409 (wrong state).
ApiResponse handle_request(ControlPlane& plane, const ApiRequest& request, const ApiOptions& options = {});

/// HTTP front end over handle_request.
class ApiServer {
 public:
  ApiServer(ControlPlane& plane, ApiOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds the socket; port 0 picks a free port. Returns the bound port.
  /// Throws BindFailure.
  int bind(const std::string& host, int port);
  /// Serves on the calling thread until stop().
  void listen();
  /// Serves on a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace dcx::gateway
