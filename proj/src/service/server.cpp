#include "ucrs/service/server.hpp"

#include <atomic>

#include <httplib.h>

#include "ucrs/service/api.hpp"

namespace ucrs::service {

struct Server::Impl {
  httplib::Server http;
  std::shared_ptr<const ServingSnapshot> current;
  ServerOptions options;

  std::shared_ptr<const ServingSnapshot> load() const { return std::atomic_load(&current); }

  void reply(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  void dispatch(const httplib::Request& req, httplib::Response& res) {
    const auto snap = load();
    ApiRequest request{req.method, req.path, {}, req.body};
    for (const auto& [key, value] : req.params) request.query.emplace(key, value);
    const auto out = handle(*snap, request);
    reply(res, out.status, out.body);
  }

  void reload(httplib::Response& res) {
    if (options.snapshot_dir.empty()) {
      reply(res, 404, {{"code", "not_found"}, {"message", "reload is disabled without --snapshot"}});
      return;
    }
    try {
      auto next = ServingSnapshot::load(options.snapshot_dir);
      const auto version = next->version();
      std::atomic_store(&current, std::shared_ptr<const ServingSnapshot>(std::move(next)));
      reply(res, 200, {{"status", "reloaded"}, {"version", version}});
    } catch (const std::exception&) {
      reply(res, 500, {{"code", "reload_failed"}, {"message", "snapshot could not be loaded; previous one kept"}});
    }
  }
};

Server::Server(std::shared_ptr<const ServingSnapshot> snapshot, ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!snapshot) throw InvalidArgument("server needs a snapshot");
  impl_->current = std::move(snapshot);
  impl_->options = std::move(options);
  auto* impl = impl_.get();
  if (!impl->options.cors_origin.empty()) {
    impl->http.set_default_headers({{"Access-Control-Allow-Origin", impl->options.cors_origin},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
  }
  impl->http.Post("/admin/reload", [impl](const httplib::Request&, httplib::Response& res) { impl->reload(res); });
  impl->http.Get(".*", [impl](const httplib::Request& req, httplib::Response& res) { impl->dispatch(req, res); });
  impl->http.Post(".*", [impl](const httplib::Request& req, httplib::Response& res) { impl->dispatch(req, res); });
  impl->http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  impl->http.set_exception_handler([impl](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    impl->reply(res, 500, {{"code", "internal"}, {"message", "internal error"}});
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind " + host);
    return bound;
  }
  if (!impl_->http.bind_to_port(host, port)) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

void Server::wait_until_ready() const { impl_->http.wait_until_ready(); }

std::shared_ptr<const ServingSnapshot> Server::snapshot() const { return impl_->load(); }

void Server::replace(std::shared_ptr<const ServingSnapshot> next) {
  if (!next) throw InvalidArgument("cannot serve a null snapshot");
  std::atomic_store(&impl_->current, std::move(next));
}

}  // namespace ucrs::service
