#pragma once

// Minimal JSON-over-HTTP POST shared by the http generator and embedder.

#include <optional>
#include <string>

#include <json.hpp>

namespace statefulrec::detail {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // starts with '/'
};

// Accepts http://host[:port][/path]. Throws Error(kInvalidConfiguration).
Endpoint parse_endpoint(const std::string& url);

// Throws BackendError carrying the HTTP status (0 when no response arrived).
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body,
                         int timeout_ms, const std::optional<std::string>& bearer_token);

std::optional<std::string> token_from_environment();

}  // namespace statefulrec::detail
