#include "deepwriter/error.hpp"

namespace deepwriter {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::MalformedInterchange: return "MalformedInterchange";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::DimensionalityMismatch: return "DimensionalityMismatch";
    case ErrorKind::DegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorKind::MissingBinding: return "MissingBinding";
    case ErrorKind::EmptyResponse: return "EmptyResponse";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::CaptionFailed: return "CaptionFailed";
    case ErrorKind::NoSource: return "NoSource";
    case ErrorKind::DanglingAsset: return "DanglingAsset";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace deepwriter
