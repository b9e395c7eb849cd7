#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "deepwriter/error.hpp"

namespace deepwriter {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_backoff{250};
  /// Injected so tests do not sleep.
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  std::chrono::milliseconds backoff(int attempt) const { return base_backoff * (1 << attempt); }
};

/// Runs fn, retrying TransientError with exponential backoff. The final
/// transient failure surfaces as BackendUnavailable.
template <typename F>
auto with_retries(const RetryPolicy& policy, F&& fn) -> decltype(fn()) {
  const int attempts = policy.max_attempts < 1 ? 1 : policy.max_attempts;
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransientError& e) {
      if (attempt + 1 >= attempts) {
        throw Error(ErrorKind::BackendUnavailable,
                    std::string("giving up after ") + std::to_string(attempts) + " attempts: " + e.what());
      }
      if (policy.sleep) policy.sleep(policy.backoff(attempt));
    }
  }
}

}  // namespace deepwriter
