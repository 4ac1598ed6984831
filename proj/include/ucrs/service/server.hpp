#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "ucrs/service/snapshot.hpp"

namespace ucrs::service {

struct ServerOptions {
  /// Value of Access-Control-Allow-Origin; empty disables CORS headers.
  std::string cors_origin;
  /// Directory re-read by POST /admin/reload; empty disables the endpoint.
  std::filesystem::path snapshot_dir;
};

/// HTTP front end over a swappable snapshot. Requests read the snapshot through
/// an atomic shared_ptr load, so a reload never blocks or tears a request.
class Server {
 public:
  Server(std::shared_ptr<const ServingSnapshot> snapshot, ServerOptions options = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and returns the port (an ephemeral one when `port` is 0). Throws
  /// IoError when the address is unavailable.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

  std::shared_ptr<const ServingSnapshot> snapshot() const;
  void replace(std::shared_ptr<const ServingSnapshot> next);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ucrs::service
