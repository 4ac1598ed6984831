#pragma once

#include <map>
#include <string>

#include "json.hpp"

#include "ucrs/service/snapshot.hpp"

namespace ucrs::service {

/// Failure with an HTTP status and a machine-readable code.
class ApiError : public Error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// Upper bound on the k query parameter.
inline constexpr std::size_t kMaxK = 1000;

nlohmann::json health_json(const ServingSnapshot& snap);
nlohmann::json recommendations_json(const ServingSnapshot& snap, const std::string& user_id, std::size_t k);
/// Applies a Command JSON to the user's baseline and describes the change.
nlohmann::json control_json(const ServingSnapshot& snap, const std::string& user_id, const nlohmann::json& command,
                            std::size_t k);
nlohmann::json bubble_report_json(const ServingSnapshot& snap, const std::string& user_id);
nlohmann::json history_json(const ServingSnapshot& snap, const std::string& user_id);
nlohmann::json categories_json(const ServingSnapshot& snap);
nlohmann::json user_features_json(const ServingSnapshot& snap);

/// Routes one request. Every failure becomes {code, message} with status
/// 404 (unknown user or route), 405, 422 (invalid command or parameter) or 500.
ApiResponse handle(const ServingSnapshot& snap, const ApiRequest& request);

}  // namespace ucrs::service
