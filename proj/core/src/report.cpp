#include "deepwriter/report.hpp"

#include <algorithm>

namespace deepwriter {

std::string_view to_string(IssueKind kind) noexcept {
  switch (kind) {
    case IssueKind::DanglingReference: return "DanglingReference";
    case IssueKind::DuplicateId: return "DuplicateId";
    case IssueKind::PageCountMismatch: return "PageCountMismatch";
    case IssueKind::PageOutOfRange: return "PageOutOfRange";
    case IssueKind::InvalidDimensions: return "InvalidDimensions";
    case IssueKind::BboxOutOfBounds: return "BboxOutOfBounds";
    case IssueKind::InvalidSpan: return "InvalidSpan";
    case IssueKind::EmptyText: return "EmptyText";
    case IssueKind::EmptyCaption: return "EmptyCaption";
    case IssueKind::MixedDimensionality: return "MixedDimensionality";
    case IssueKind::NonUnitEmbedding: return "NonUnitEmbedding";
    case IssueKind::UncitedClaim: return "UncitedClaim";
    case IssueKind::UnresolvableReference: return "UnresolvableReference";
    case IssueKind::LevelFormatMismatch: return "LevelFormatMismatch";
    case IssueKind::MarkerMismatch: return "MarkerMismatch";
    case IssueKind::MissingAsset: return "MissingAsset";
  }
  return "Unknown";
}

std::size_t ValidationReport::count(IssueKind kind) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [kind](const Issue& i) { return i.kind == kind; }));
}

void ValidationReport::add(IssueKind kind, std::string subject, std::string detail) {
  issues.push_back({kind, std::move(subject), std::move(detail)});
}

}  // namespace deepwriter
