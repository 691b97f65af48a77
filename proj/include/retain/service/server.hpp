#pragma once

#include <string>

#include "retain/detail/httplib.hpp"
#include "retain/service/api.hpp"

namespace retain {

// HTTP/1.1 binding of the Api; every route lives under /api.
class HttpServer {
 public:
  explicit HttpServer(Api& api) : api_(api) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) { serve(req, res); };
    server_.Get(R"(/api/.*)", handler);
    server_.Post(R"(/api/.*)", handler);
  }

  // Returns the bound port (useful with port 0).
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host);
    if (!server_.bind_to_port(host, port)) fail(ErrorKind::transport, "cannot bind " + host + ":" + std::to_string(port));
    return port;
  }

  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

 private:
  void serve(const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.body = req.body;
    const auto auth = req.get_header_value("Authorization");
    if (auth.rfind("Bearer ", 0) == 0) r.bearer = auth.substr(7);
    const auto out = api_.handle(r);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  }

  Api& api_;
  httplib::Server server_;
};

}  // namespace retain
