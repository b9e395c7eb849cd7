#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace deepwriter {

enum class ErrorKind {
  InvalidArgument,
  Io,
  MalformedInterchange,
  UnsupportedVersion,
  EmptyCorpus,
  BackendUnavailable,
  DimensionalityMismatch,
  DegenerateEmbedding,
  MissingBinding,
  EmptyResponse,
  MalformedResponse,
  CaptionFailed,
  NoSource,
  DanglingAsset,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by backends for failures worth retrying (timeouts, 5xx, 429).
class TransientError : public Error {
 public:
  explicit TransientError(const std::string& message)
      : Error(ErrorKind::BackendUnavailable, message) {}
};

}  // namespace deepwriter
