#include "deepwriter/evaluator.hpp"

#include <algorithm>
#include <regex>

#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"

namespace deepwriter {

namespace {

const std::array<RubricDimension, 4> kRubric = {{
    {"Interest Level",
     "How engaging and thought-provoking is the article?",
     {"Not engaging at all; no attempt to capture the reader's attention.",
      "Fairly engaging with a basic narrative but lacking depth.",
      "Moderately engaging with several interesting points.",
      "Quite engaging with a well-structured narrative and noteworthy points that frequently capture and retain attention.",
      "Exceptionally engaging throughout, with a compelling narrative that consistently stimulates interest."}},
    {"Coherence and Organization",
     "Is the article well-organized and logically structured?",
     {"Disorganized; lacks logical structure and coherence.",
      "Fairly organized; a basic structure is present but not consistently followed.",
      "Organized; a clear structure is mostly followed with some lapses in coherence.",
      "Good organization; a clear structure with minor lapses in coherence.",
      "Excellently organized; the article is logically structured with seamless transitions and a clear argument."}},
    {"Relevance and Focus",
     "Does the article stay on topic and maintain a clear focus?",
     {"Off-topic; the content does not align with the headline or core subject.",
      "Somewhat on topic but with several digressions; the core subject is evident but not consistently adhered to.",
      "Generally on topic, despite a few unrelated details.",
      "Mostly on topic and focused; the narrative has a consistent relevance to the core subject with infrequent digressions.",
      "Exceptionally focused and entirely on topic; the article is tightly centered on the subject, with every piece of information contributing to a comprehensive understanding of the topic."}},
    {"Broad Coverage",
     "Does the article provide an in-depth exploration of the topic and have good coverage?",
     {"Severely lacking; offers little to no coverage of the topic's primary aspects, resulting in a very narrow perspective.",
      "Partial coverage; includes some of the topic's main aspects but misses others, resulting in an incomplete portrayal.",
      "Acceptable breadth; covers most main aspects, though it may stray into minor unnecessary details or overlook some relevant points.",
      "Good coverage; achieves broad coverage of the topic, hitting on all major points with minimal extraneous information.",
      "Exemplary in breadth; delivers outstanding coverage, thoroughly detailing all crucial aspects of the topic without including irrelevant information."}},
}};

}  // namespace

std::span<const RubricDimension> rubric() { return kRubric; }

const RubricDimension* find_dimension(std::string_view name) noexcept {
  for (const auto& d : kRubric) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::string rubric_text(const RubricDimension& d) {
  std::string out = std::string(d.name) + "\n" + std::string(d.criteria);
  for (const auto s : d.scores) out += "\n" + std::string(s);
  return out;
}

std::string build_judge_prompt(std::string_view article, std::string_view dimension, std::string_view instruction) {
  const RubricDimension* d = find_dimension(dimension);
  if (!d) throw Error(ErrorKind::InvalidArgument, "unknown rubric dimension \"" + std::string(dimension) + "\"");
  std::string p =
      "###Task Description:\n"
      "An instruction (might include an Input inside it), a response to evaluate, and a score rubric "
      "representing a evaluation criteria are given.\n"
      "1. Write a detailed feedback that assess the quality of the response strictly based on the given score "
      "rubric, not evaluating in general.\n"
      "2. After writing a feedback, write a score that is an integer between 1 and 5. You should refer to the "
      "score rubric.\n"
      "3. The output format should look as follows: \"(write a feedback for criteria) [RESULT] (an integer "
      "number between 1 and 5)\"\n"
      "4. Please do not generate any other opening, closing, and explanations.\n\n"
      "###The instruction to evaluate:\n";
  p += instruction.empty() ? std::string("Write a long-form, well-grounded article.") : std::string(instruction);
  p += "\n\n###Response to evaluate:\n";
  p += std::string(trim(article));
  p += "\n\n###Score Rubrics:\n[" + std::string(d->name) + ": " + std::string(d->criteria) + "]\n";
  for (std::size_t i = 0; i < d->scores.size(); ++i) {
    p += "Score " + std::to_string(i + 1) + ": " + std::string(d->scores[i]) + "\n";
  }
  p += "\n###Feedback:";
  return p;
}

int parse_score(std::string_view response, Diagnostics* diagnostics) {
  static const std::regex kInteger(R"((^|[^0-9.])(-?[0-9]+)(?![0-9]|\.[0-9]))");
  std::string text(response);
  if (const auto at = text.rfind("[RESULT]"); at != std::string::npos) {
    const auto tail = text.substr(at + 8);
    std::smatch m;
    if (std::regex_search(tail, m, kInteger)) text = tail;
  }
  std::smatch m;
  if (!std::regex_search(text, m, kInteger)) {
    throw Error(ErrorKind::MalformedResponse, "judge reply has no score: " + std::string(trim(response)).substr(0, 80));
  }
  long value = 0;
  try {
    value = std::stol(m[2].str());
  } catch (const std::out_of_range&) {
    value = m[2].str().front() == '-' ? 1 : 5;
  }
  const int clamped = static_cast<int>(std::clamp(value, 1L, 5L));
  if (clamped != value && diagnostics) {
    diagnostics->warn("judge score " + m[2].str() + " clamped to " + std::to_string(clamped));
  }
  return clamped;
}

JudgeResult evaluate(std::string_view article, Gateway& judge, std::string_view instruction) {
  JudgeResult result;
  result.judge_model = judge.backend_id();
  Diagnostics diagnostics;
  for (const auto& d : kRubric) {
    const auto reply = judge.complete(build_judge_prompt(article, d.name, instruction));
    result.scores.emplace_back(std::string(d.name), parse_score(reply, &diagnostics));
    result.raw_responses.emplace_back(std::string(d.name), reply);
  }
  result.warnings = diagnostics.warnings();
  return result;
}

nlohmann::json to_json(const JudgeResult& result) {
  nlohmann::json scores = nlohmann::json::object();
  for (const auto& [name, score] : result.scores) scores[name] = score;
  return {{"scores", scores}, {"judge_model", result.judge_model}};
}

}  // namespace deepwriter
