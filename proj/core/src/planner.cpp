#include "deepwriter/planner.hpp"

#include <algorithm>
#include <set>

#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"

namespace deepwriter {

namespace {

const std::set<std::string> kDataCues = {
    "percent", "percentage", "rate", "rates", "volume", "volumes", "growth", "share", "shares",
    "amount", "amounts", "total", "totals", "number", "numbers", "value", "values", "billion",
    "billions", "million", "millions", "trillion", "trillions", "statistics", "statistic", "figures",
    "quantity", "quantities", "average", "ratio", "ratios", "index", "indices", "forecast", "forecasts"};

const std::set<std::string> kPointCues = {
    "conclusion", "conclusions", "conclude", "viewpoint", "viewpoints", "opinion", "opinions",
    "argue", "argues", "argument", "arguments", "recommend", "recommends", "recommendation",
    "recommendations", "implication", "implications", "why", "assessment", "assess", "perspective",
    "perspectives", "lesson", "lessons", "outlook", "views", "stance", "evaluate", "evaluation",
    "significance"};

const std::set<std::string> kVisualCues = {
    "table", "tables", "chart", "charts", "figure", "graph", "graphs", "trend", "trends", "diagram",
    "diagrams", "plot", "plots", "map", "maps", "visual", "visuals", "visualization", "image", "images"};

bool any_word_in(std::string_view text, const std::set<std::string>& cues) {
  const auto w = words(text);
  return std::any_of(w.begin(), w.end(), [&](const std::string& t) { return cues.count(t) > 0; });
}

bool has_quantity(std::string_view text) {
  if (std::any_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) return true;
  if (text.find('%') != std::string_view::npos) return true;
  const auto lower = " " + normalize_whitespace(to_lower(text)) + " ";
  return lower.find(" how much ") != std::string::npos || lower.find(" how many ") != std::string::npos;
}

std::string strip_heading(std::string s) {
  auto view = trim(s);
  while (!view.empty() && view.front() == '#') view.remove_prefix(1);
  view = trim(view);
  if (view.size() >= 4 && view.substr(0, 2) == "**" && view.substr(view.size() - 2) == "**") {
    view = trim(view.substr(2, view.size() - 4));
  }
  while (!view.empty() && view.back() == ':') view.remove_suffix(1);
  return std::string(trim(view));
}

}  // namespace

std::string_view to_string(SubtaskCategory c) noexcept {
  switch (c) {
    case SubtaskCategory::Fact: return "fact";
    case SubtaskCategory::Data: return "data";
    case SubtaskCategory::Point: return "point";
  }
  return "fact";
}

std::string collapse_rewrite(std::string_view response) {
  const auto paragraphs = split_paragraphs(response);
  std::string chosen;
  for (const auto& p : paragraphs) {
    if (!p.empty() && p.back() != ':') {
      chosen = p;
      break;
    }
  }
  if (chosen.empty() && !paragraphs.empty()) chosen = paragraphs.back();
  std::string_view view = trim(chosen);
  if (view.size() >= 2 && view.front() == '"' && view.back() == '"') view = trim(view.substr(1, view.size() - 2));
  return std::string(view);
}

RewrittenQuery rewrite_query(std::string_view query, Gateway& gateway) {
  if (trim(query).empty()) throw Error(ErrorKind::InvalidArgument, "query must not be empty");
  const auto response = gateway.complete(TemplateName::Rewrite, {{"query", std::string(trim(query))}});
  auto rewritten = collapse_rewrite(response);
  if (rewritten.empty()) throw Error(ErrorKind::EmptyResponse, "rewrite produced no usable text");
  return {std::string(query), std::move(rewritten)};
}

SubtaskCategory classify_subtask(std::string_view text) {
  if (has_quantity(text) || any_word_in(text, kDataCues)) return SubtaskCategory::Data;
  if (any_word_in(text, kPointCues)) return SubtaskCategory::Point;
  return SubtaskCategory::Fact;
}

bool mentions_visuals(std::string_view text) { return any_word_in(text, kVisualCues); }

std::vector<Subtask> decompose(std::string_view rewritten, Gateway& gateway) {
  if (trim(rewritten).empty()) throw Error(ErrorKind::InvalidArgument, "rewritten query must not be empty");
  const auto response = gateway.complete(TemplateName::Decompose, {{"query", std::string(rewritten)}});
  const auto items = parse_numbered_list(response, kMinSubtasks, kMaxSubtasks);

  std::vector<Subtask> subtasks;
  for (const auto& item : items) {
    subtasks.push_back({"t" + std::to_string(subtasks.size() + 1), item, classify_subtask(item),
                        mentions_visuals(item)});
  }
  const bool any_visual =
      std::any_of(subtasks.begin(), subtasks.end(), [](const Subtask& s) { return s.wants_visuals; });
  if (!any_visual) {
    std::string text = "locate charts or tables relevant to: " + std::string(rewritten);
    const auto category = classify_subtask(text);
    subtasks.push_back({"t" + std::to_string(subtasks.size() + 1), std::move(text), category, true});
  }
  return subtasks;
}

std::string section_title_query(std::string_view rewritten, std::span<const Subtask> subtasks) {
  std::vector<std::string> texts;
  for (const auto& s : subtasks) texts.push_back(s.text);
  return std::string(rewritten) + "\n\nSub-queries:\n" + format_numbered_list(texts);
}

SectionPlan plan_sections(std::string_view rewritten, std::span<const Subtask> subtasks, Gateway& gateway) {
  if (subtasks.empty()) throw Error(ErrorKind::InvalidArgument, "plan_sections needs subtasks");
  const auto response =
      gateway.complete(TemplateName::SectionTitles, {{"query", section_title_query(rewritten, subtasks)}});

  SectionPlan plan;
  std::set<std::string> seen;
  for (auto& raw : parse_numbered_list(response, 0, static_cast<std::size_t>(-1))) {
    auto title = strip_heading(std::move(raw));
    const auto key = to_lower(title);
    if (title.empty() || key == to_lower(kReferencesTitle)) continue;
    if (!seen.insert(key).second) continue;
    plan.titles.push_back(std::move(title));
  }
  if (plan.titles.size() < kMinSections) {
    throw Error(ErrorKind::MalformedResponse,
                "need at least " + std::to_string(kMinSections) + " section titles, got " +
                    std::to_string(plan.titles.size()));
  }
  if (plan.titles.size() > kMaxSections) plan.titles.resize(kMaxSections);
  return plan;
}

}  // namespace deepwriter
