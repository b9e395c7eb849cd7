#include "http_transport.hpp"

#include <httplib.h>

#include "deepwriter/error.hpp"

namespace deepwriter::http {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "backend URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string post_json(const std::string& url, const std::string& body, const std::string& bearer_token,
                      int timeout_seconds) {
  const auto [origin, path] = split_url(url);
  httplib::Client client(origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);

  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);

  auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw TransientError("request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransientError("HTTP " + std::to_string(res->status) + " from " + url);
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::BackendUnavailable,
                "HTTP " + std::to_string(res->status) + " from " + url + ": " + res->body);
  }
  return res->body;
}

}  // namespace deepwriter::http
