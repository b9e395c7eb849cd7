#pragma once

#include <string>

namespace deepwriter::http {

/// POSTs a JSON body and returns the response body. Connection failures,
/// 429 and 5xx raise TransientError; other non-2xx raise BackendUnavailable.
std::string post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                      int timeout_seconds);

}  // namespace deepwriter::http
