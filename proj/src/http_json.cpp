#include "http_json.hpp"

#include <cstdlib>

#include <httplib.h>

#include "statefulrec/error.hpp"

namespace statefulrec::detail {

Endpoint parse_endpoint(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) {
    fail(ErrorKind::kInvalidConfiguration,
         "endpoint must start with http:// (got '" + url + "')");
  }
  const auto slash = url.find('/', kScheme.size());
  Endpoint endpoint;
  endpoint.origin = url.substr(0, slash);
  endpoint.path = slash == std::string::npos ? "/" : url.substr(slash);
  if (endpoint.origin.size() == kScheme.size()) {
    fail(ErrorKind::kInvalidConfiguration, "endpoint has no host: '" + url + "'");
  }
  return endpoint;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body,
                         int timeout_ms, const std::optional<std::string>& bearer_token) {
  httplib::Client client(endpoint.origin);
  const auto sec = timeout_ms / 1000;
  const auto usec = (timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  httplib::Headers headers;
  if (bearer_token) headers.emplace("Authorization", "Bearer " + *bearer_token);

  const auto result = client.Post(endpoint.path, headers, body.dump(), "application/json");
  if (!result) {
    throw BackendError(0, "request to " + endpoint.origin + endpoint.path +
                              " failed: " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status < 200 || status >= 300) {
    throw BackendError(status, "backend returned HTTP " + std::to_string(status));
  }
  try {
    return nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(status, std::string("malformed response body: ") + e.what());
  }
}

std::optional<std::string> token_from_environment() {
  const char* value = std::getenv("STATEFULREC_API_TOKEN");
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

}  // namespace statefulrec::detail
