#include <httplib.h>

#include "dive/service.hpp"

namespace dive {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::string host;

  explicit Impl(Service& s) : service(s) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      HttpRequest request{req.method, req.path, {}, req.body};
      for (const auto& [key, value] : req.params) request.query.emplace(key, value);
      auto response = service.handle(request);
      res.status = response.status;
      res.set_content(response.body, response.content_type);
    };
    server.Get(".*", forward);
    server.Post(".*", forward);
    server.Put(".*", forward);
    server.Delete(".*", forward);
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  impl_->host = host;
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace dive
