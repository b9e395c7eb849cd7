#pragma once

#include <string>
#include <vector>

namespace deepwriter {

/// Collects non-fatal warnings emitted while building a KB or writing an article.
class Diagnostics {
 public:
  void warn(std::string message) { warnings_.push_back(std::move(message)); }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  std::size_t count() const noexcept { return warnings_.size(); }
  void clear() noexcept { warnings_.clear(); }

 private:
  std::vector<std::string> warnings_;
};

}  // namespace deepwriter
