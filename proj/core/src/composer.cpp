#include "deepwriter/composer.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"

namespace deepwriter {

const std::string_view kMarkerInstruction =
    "Each document below starts with its id in square brackets. After every sentence that uses a "
    "document, keep that id in square brackets, for example [c000001].";

namespace {

std::string already_written(const RunningSummary& history) {
  std::string out;
  for (const auto& e : history.entries) {
    if (e.empty()) continue;
    out += (out.empty() ? "" : "\n") + e;
  }
  return out.empty() ? "None" : out;
}

// Drops markdown heading lines; the prompt asks for none but models add them.
std::string without_headings(std::string_view text) {
  std::string out;
  for (auto line : split_lines(text)) {
    if (!trim(line).empty() && trim(line).front() == '#') continue;
    out.append(line);
    out += '\n';
  }
  return out;
}

bool is_none(std::string_view reply) {
  auto s = to_lower(trim(reply));
  while (!s.empty() && (s.back() == '.' || s.back() == '"')) s.pop_back();
  while (!s.empty() && s.front() == '"') s.erase(s.begin());
  return s == "none";
}

struct Extracted {
  std::string text;
  std::vector<std::string> ids;
};

Extracted extract_markers(const std::string& paragraph, const std::set<std::string>& ctx_ids) {
  static const std::regex kMarker(R"(\s*\[([^\[\]\s]{1,64})\])");
  static const std::regex kIdLike(R"(^(?:c\d+|v\d+|\d+)$)");
  Extracted out;
  std::size_t last = 0;
  for (std::sregex_iterator it(paragraph.begin(), paragraph.end(), kMarker), end; it != end; ++it) {
    const auto id = (*it)[1].str();
    const bool known = ctx_ids.count(id) > 0;
    if (!known && !std::regex_match(id, kIdLike)) continue;
    out.text.append(paragraph, last, static_cast<std::size_t>(it->position()) - last);
    last = static_cast<std::size_t>(it->position() + it->length());
    if (known && std::find(out.ids.begin(), out.ids.end(), id) == out.ids.end()) out.ids.push_back(id);
  }
  out.text.append(paragraph, last);
  out.text = normalize_whitespace(out.text);
  return out;
}

}  // namespace

std::string SectionText::body() const {
  std::string out;
  for (const auto& p : paragraphs) out += (out.empty() ? "" : "\n\n") + p.text;
  return out;
}

std::string relevant_docs_block(const SectionContext& ctx) {
  std::string out;
  for (const auto& c : ctx.chunks) {
    out += (out.empty() ? "" : "\n") + ("[" + c.chunk->chunk_id + "] " + normalize_whitespace(c.chunk->text));
  }
  return out;
}

Draft draft_section(std::string_view title, const SectionContext& ctx, const RunningSummary&, Gateway& gateway,
                    std::string_view rewritten, bool allow_empty) {
  const bool thin = ctx.chunks.empty();
  if (thin && !allow_empty) {
    throw Error(ErrorKind::InvalidArgument, "section \"" + std::string(title) + "\" has no retrieved content");
  }
  const auto docs = thin ? std::string("None. No source material was retrieved for this section.")
                         : relevant_docs_block(ctx);
  auto text = gateway.complete(TemplateName::SectionDraft, {{"query", std::string(rewritten)},
                                                            {"section_title", std::string(title)},
                                                            {"relevant_docs", docs}});
  return {std::string(trim(text)), thin};
}

SectionText write_section(std::string_view title, const Draft& draft, const SectionContext& ctx,
                          const RunningSummary& history, Gateway& gateway, std::string_view rewritten,
                          EmbeddingBackend& embedder, const ComposerOptions& options, Diagnostics* diagnostics) {
  if (trim(draft.text).empty()) throw Error(ErrorKind::InvalidArgument, "draft must not be empty");

  const auto docs = ctx.chunks.empty() ? std::string("None")
                                       : std::string(kMarkerInstruction) + "\n" + relevant_docs_block(ctx);
  const auto reply = gateway.complete(TemplateName::SectionContent, {{"query", std::string(rewritten)},
                                                                     {"section_title", std::string(title)},
                                                                     {"section_draft", draft.text},
                                                                     {"relevant_docs", docs},
                                                                     {"already_written", already_written(history)}});

  std::set<std::string> ctx_ids;
  for (const auto& c : ctx.chunks) ctx_ids.insert(c.chunk->chunk_id);

  SectionText section{std::string(title), {}, draft.text, draft.thin};
  for (const auto& raw : split_paragraphs(without_headings(reply))) {
    auto extracted = extract_markers(raw, ctx_ids);
    if (extracted.text.empty()) continue;
    section.paragraphs.push_back({std::move(extracted.text), std::move(extracted.ids), {}});
  }
  if (section.paragraphs.empty()) {
    throw Error(ErrorKind::EmptyResponse, "section \"" + std::string(title) + "\" produced no paragraphs");
  }

  std::optional<std::size_t> dim;
  for (const auto& c : ctx.chunks) {
    if (c.chunk->embedding) dim = c.chunk->embedding->size();
  }
  for (auto& p : section.paragraphs) {
    if (!p.supporting_chunk_ids.empty() || ctx.chunks.empty()) continue;
    const auto v = embed_text(p.text, embedder, dim);
    std::vector<std::pair<double, std::string>> matches;
    for (const auto& c : ctx.chunks) {
      if (!c.chunk->embedding) continue;
      const double s = cosine(v, *c.chunk->embedding);
      if (s >= options.support_threshold) matches.emplace_back(s, c.chunk->chunk_id);
    }
    std::sort(matches.begin(), matches.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (auto& m : matches) p.supporting_chunk_ids.push_back(std::move(m.second));
  }

  if (diagnostics) {
    for (std::size_t i = 0; i < section.paragraphs.size(); ++i) {
      for (std::size_t j = 0; j < history.entries.size(); ++j) {
        const double overlap = trigram_jaccard(section.paragraphs[i].text, history.entries[j]);
        if (overlap > options.repetition_jaccard) {
          diagnostics->warn("section \"" + section.title + "\" paragraph " + std::to_string(i) +
                            " repeats earlier content (trigram overlap " + std::to_string(overlap) +
                            " with history entry " + std::to_string(j) + ")");
        }
      }
    }
  }
  return section;
}

std::size_t summary_budget(std::size_t length, double ratio) {
  // Per-mille integer arithmetic so 0.30 of 1000 is exactly 300.
  const auto per_mille = static_cast<std::size_t>(std::llround(std::clamp(ratio, 0.0, 1.0) * 1000));
  return length * per_mille / 1000;
}

std::string truncate_at_word(std::string_view text, std::size_t budget) {
  text = trim(text);
  if (utf8_length(text) <= budget) return std::string(text);
  const auto cut = utf8_offset(text, budget);
  // A cut right before whitespace already ends on a word.
  if (cut < text.size() && is_space(text[cut])) return std::string(trim(text.substr(0, cut)));
  const auto space = text.substr(0, cut).find_last_of(" \t\n\r\f\v");
  if (space == std::string_view::npos || trim(text.substr(0, space)).empty()) {
    return std::string(text.substr(0, cut));
  }
  return std::string(trim(text.substr(0, space)));
}

std::string summarize_section(const SectionText& section, std::string_view rewritten, Gateway& gateway, double ratio,
                              Diagnostics* diagnostics) {
  const auto body = section.body();
  if (trim(body).empty()) throw Error(ErrorKind::InvalidArgument, "cannot summarize an empty section");
  const auto budget = summary_budget(utf8_length(body), ratio);
  const auto prompt = render(TemplateName::Summarize, {{"query", std::string(rewritten)}, {"doc", body}});

  auto reply = std::string(trim(gateway.complete(prompt)));
  if (is_none(reply)) return {};
  if (utf8_length(reply) <= budget) return reply;

  reply = std::string(trim(gateway.complete(prompt + "\n\nThat summary was too long. Shorten it to at most " +
                                            std::to_string(budget) + " characters.")));
  if (is_none(reply)) return {};
  if (utf8_length(reply) <= budget) return reply;

  if (diagnostics) {
    diagnostics->warn("summary of \"" + section.title + "\" truncated to " + std::to_string(budget) + " characters");
  }
  return truncate_at_word(reply, budget);
}

}  // namespace deepwriter
