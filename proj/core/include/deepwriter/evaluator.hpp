#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepwriter/diagnostics.hpp"
#include "deepwriter/gateway.hpp"

namespace deepwriter {

struct RubricDimension {
  std::string_view name;
  std::string_view criteria;
  std::array<std::string_view, 5> scores;  // descriptions for scores 1..5
};

/// The four judge dimensions in their fixed order.
std::span<const RubricDimension> rubric();
const RubricDimension* find_dimension(std::string_view name) noexcept;

/// Name, criteria and the five descriptions, one per line; the text the
/// rubric checksums are taken over.
std::string rubric_text(const RubricDimension& dimension);

/// Absolute-grading judge prompt. Throws InvalidArgument for an unknown dimension.
std::string build_judge_prompt(std::string_view article, std::string_view dimension,
                               std::string_view instruction = {});

/// The integer after "[RESULT]" when present, else the first standalone
/// integer; clamped to [1, 5] with a warning. Throws MalformedResponse.
int parse_score(std::string_view response, Diagnostics* diagnostics = nullptr);

struct JudgeResult {
  std::vector<std::pair<std::string, int>> scores;  // rubric order
  std::vector<std::pair<std::string, std::string>> raw_responses;
  std::string judge_model;
  std::vector<std::string> warnings;
};

JudgeResult evaluate(std::string_view article, Gateway& judge, std::string_view instruction = {});

/// {"scores": {dimension: int}, "judge_model": str}
nlohmann::json to_json(const JudgeResult& result);

}  // namespace deepwriter
