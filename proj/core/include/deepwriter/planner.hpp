#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepwriter/gateway.hpp"

namespace deepwriter {

struct RewrittenQuery {
  std::string original;
  std::string rewritten;
};

enum class SubtaskCategory { Fact, Data, Point };

std::string_view to_string(SubtaskCategory c) noexcept;

struct Subtask {
  std::string id;
  std::string text;
  SubtaskCategory category = SubtaskCategory::Fact;
  bool wants_visuals = false;
};

struct SectionPlan {
  std::vector<std::string> titles;
};

inline constexpr std::size_t kMinSubtasks = 3;
inline constexpr std::size_t kMaxSubtasks = 5;
inline constexpr std::size_t kMinSections = 2;
inline constexpr std::size_t kMaxSections = 10;
/// Title the assembler appends; never requested from the model.
inline constexpr std::string_view kReferencesTitle = "References";

RewrittenQuery rewrite_query(std::string_view query, Gateway& gateway);

/// Picks the rewrite out of a model reply: the first non-empty paragraph that
/// is not a preamble ending in ':', with its lines joined.
std::string collapse_rewrite(std::string_view response);

/// Keyword rubric: a quantity or metric cue means data; a request for
/// conclusions or viewpoints means point; anything else is fact.
SubtaskCategory classify_subtask(std::string_view text);
/// True when the text mentions tables, charts, figures, trends and the like.
bool mentions_visuals(std::string_view text);

/// 3-5 typed subtasks. Guarantees at least one wants_visuals subtask by
/// appending "locate charts or tables relevant to: <q'>" when needed.
std::vector<Subtask> decompose(std::string_view rewritten, Gateway& gateway);

/// The {query} binding for the title prompt: q' followed by the sub-queries.
std::string section_title_query(std::string_view rewritten, std::span<const Subtask> subtasks);

/// Section titles in model order, deduplicated, "References" removed, capped at 10.
SectionPlan plan_sections(std::string_view rewritten, std::span<const Subtask> subtasks, Gateway& gateway);

}  // namespace deepwriter
