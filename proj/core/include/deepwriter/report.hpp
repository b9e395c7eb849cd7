#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace deepwriter {

enum class IssueKind {
  // Knowledge-base hierarchy.
  DanglingReference,
  DuplicateId,
  PageCountMismatch,
  PageOutOfRange,
  InvalidDimensions,
  BboxOutOfBounds,
  InvalidSpan,
  EmptyText,
  EmptyCaption,
  MixedDimensionality,
  NonUnitEmbedding,
  // Citations.
  UncitedClaim,
  UnresolvableReference,
  LevelFormatMismatch,
  // Rendered bundle.
  MarkerMismatch,
  MissingAsset,
};

std::string_view to_string(IssueKind kind) noexcept;

struct Issue {
  IssueKind kind;
  std::string subject;  // id of the offending item
  std::string detail;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> issues;
  std::vector<std::string> warnings;

  bool ok() const noexcept { return issues.empty(); }
  std::size_t count(IssueKind kind) const noexcept;
  void add(IssueKind kind, std::string subject, std::string detail);

  bool operator==(const ValidationReport&) const = default;
};

}  // namespace deepwriter
