#include "deepwriter/prompts.hpp"

#include <array>
#include <regex>

#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"

namespace deepwriter {

namespace {

// Bodies are kept byte-for-byte; tests pin their SHA-256.
constexpr std::string_view kRewriteBody = R"(Rewrite the following user query in a way that makes it more effective and precise.
The new query should be more specific, focused, and clear, using terminology that is likely to lead to a more accurate understanding of the user's intent.
Ensure that the rewritten query captures the essence of the user's question while improving its clarity and precision.

Query:
{query}

Your rewritten query:)";

constexpr std::string_view kDecomposeBody = R"(You are an expert research assistant. I need to retrieve information from a database to answer the following query:

Query:
{query}

Please help me decompose this query into 3-5 more specific, related sub-queries that would help gather comprehensive information to answer the main question.
These sub-queries should:
- Cover different aspects of the main query
- Be specific enough for database retrieval
- Help gather contextual information needed for a complete answer
- Focus on factual information rather than opinions

Format your response as a numbered list of sub-queries only. split them with a new line.)";

constexpr std::string_view kSectionTitlesBody = R"(You are an expert article writer tasked with generating section titles for a comprehensive report.
Given the following query, generate a list of section titles that would be appropriate for a comprehensive report.

Query:
{query}

Instructions:
1. The section titles should follow the human-like structure of a report.
2. The content of the section should be related to the query.
3. The section titles should from general to specific. Like: Background, Analysis, Viewpoints.
4. split the section titles by new line such that each line contains exactly one section title. Example:
   - Background
   - Analysis
   - Viewpoints

Your section titles:)";

constexpr std::string_view kSectionDraftBody = R"(You are an expert research writer tasked with creating a section draft for a section of a comprehensive report.

Query:
{query}

Section Title:
{section_title}

Relevant Documents:
{relevant_docs}

Instructions:
1. Analyze the query and section title and figure out what should be included in this section.
2. Create a rough draft for writing this section that covers the information revealed by relevant documents.
3. Be simple and concise.
4. DO NOT add references to the draft.
5. Try to avoid using bullets and subsections, just synthesize the information in a natural way.

Your draft should provide a high-level perspective on how to approach writing this section effectively.
Focus on organization and content strategy rather than specific wording.

Provide your draft below:)";

constexpr std::string_view kClusterBody = R"(You are an expert document classifier. Your task is to classify the given document into the most appropriate section based on its content and relevance to the query.

Query:
{query}

Document:
{doc}

Available sections:
{sections}

Instructions:
1. Carefully analyze the document content in relation to the query
2. Consider how the information would fit into a structured report addressing the query
3. Choose EXACTLY ONE section from the available sections where this document would be most appropriate
4. Return ONLY the name of the chosen section, with no additional text or explanation

Your classification (return only the section name):)";

constexpr std::string_view kSectionContentBody = R"(You are an expert research writer tasked with generating high-quality content for a specific section of a comprehensive report.

Query:
{query}

Section Title:
{section_title}

Section Draft:
{section_draft}

Relevant Documents:
{relevant_docs}

Content Already Written in Previous Sections:
{already_written}

Instructions:
1. Generate detailed, well-structured content for the "{section_title}" section that directly addresses the query
2. Incorporate information from the relevant documents, synthesizing and analyzing the data
3. Ensure continuity with content already written in previous sections
4. Use an academic, professional tone appropriate for a research report
5. Be thorough but concise, focusing on information that is most relevant to the query
6. Avoid repetition of content already covered in previous sections
7. Do not include title in any level just write the content

Your content should:
- Present factual information directly derived from the relevant documents
- Synthesize and organize information from multiple sources
- Maintain neutrality when presenting evidence and data)";

constexpr std::string_view kSummarizeBody = R"(You are an expert summarizer. Your task is to create a concise and accurate summary of the following content in relation to a specific query.

The summary should:
1. Capture the main points and key information relevant to the query
2. Highlight the relationship between the content and the query, if there is no relationship, return "None"
3. Maintain the original meaning and intent
4. Be clear and coherent
5. Be no more than 30 percent of the original length

Query:
{query}

Content to summarize:
{doc}

Provide your summary below, focusing on aspects that address the query:)";

const std::array<PromptTemplate, 7>& templates() {
  static const std::array<PromptTemplate, 7> kTemplates{{
    {TemplateName::Rewrite, "rewrite", kRewriteBody, {"query"}},
    {TemplateName::Decompose, "decompose", kDecomposeBody, {"query"}},
    {TemplateName::SectionTitles, "section_titles", kSectionTitlesBody, {"query"}},
    {TemplateName::SectionDraft, "section_draft", kSectionDraftBody, {"query", "section_title", "relevant_docs"}},
    {TemplateName::Cluster, "cluster", kClusterBody, {"query", "doc", "sections"}},
    {TemplateName::SectionContent, "section_content", kSectionContentBody, {"query", "section_title", "section_draft", "relevant_docs", "already_written"}},
    {TemplateName::Summarize, "summarize", kSummarizeBody, {"query", "doc"}},
  }};
  return kTemplates;
}

bool is_ident_char(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

const PromptTemplate& prompt_template(TemplateName name) {
  return templates()[static_cast<std::size_t>(name)];
}

std::span<const PromptTemplate> all_templates() { return templates(); }

std::optional<TemplateName> parse_template_name(std::string_view id) noexcept {
  for (const auto& t : templates()) {
    if (t.id == id) return t.name;
  }
  return std::nullopt;
}

std::string render(TemplateName name, const Bindings& bindings) {
  const auto& tpl = prompt_template(name);
  for (const auto& p : tpl.parameters) {
    if (bindings.find(p) == bindings.end()) {
      throw Error(ErrorKind::MissingBinding,
                  "template '" + std::string(tpl.id) + "' needs a binding for {" + std::string(p) + "}");
    }
  }
  std::string out;
  out.reserve(tpl.body.size() + 256);
  const std::string_view body = tpl.body;
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '{') {
      std::size_t j = i + 1;
      while (j < body.size() && is_ident_char(body[j])) ++j;
      if (j < body.size() && body[j] == '}' && j > i + 1) {
        const auto key = body.substr(i + 1, j - i - 1);
        if (auto it = bindings.find(key); it != bindings.end()) {
          out += it->second;
          i = j + 1;
          continue;
        }
      }
    }
    out.push_back(body[i++]);
  }
  return out;
}

std::vector<std::string> parse_numbered_list(std::string_view response, std::size_t min_items,
                                             std::size_t max_items) {
  static const std::regex kMarker(R"(^(?:\d+[.)](?!\d)|[-*+]|\xE2\x80\xA2)\s*)");
  std::vector<std::string> items;
  for (auto line : split_lines(response)) {
    std::string item = std::regex_replace(std::string(trim(line)), kMarker, "",
                                          std::regex_constants::format_first_only);
    item = std::string(trim(item));
    if (!item.empty()) items.push_back(std::move(item));
  }
  if (items.size() < min_items || items.size() > max_items) {
    throw Error(ErrorKind::MalformedResponse, "expected " + std::to_string(min_items) + "-" +
                                                  std::to_string(max_items) + " list items, got " +
                                                  std::to_string(items.size()));
  }
  return items;
}

std::string format_numbered_list(std::span<const std::string> items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + items[i];
  }
  return out;
}

}  // namespace deepwriter
