#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deepwriter/corpus.hpp"
#include "deepwriter/diagnostics.hpp"
#include "deepwriter/embedding.hpp"
#include "deepwriter/gateway.hpp"
#include "deepwriter/retrieval.hpp"

namespace deepwriter {

/// A visual placed after a paragraph.
struct FigureBlock {
  std::string visual_id;
  VisualKind kind = VisualKind::Image;
  std::string asset_path;
  std::string caption;
  double score = 0;

  bool operator==(const FigureBlock&) const = default;
};

struct Paragraph {
  std::string text;
  std::vector<std::string> supporting_chunk_ids;
  std::vector<FigureBlock> figures;

  bool operator==(const Paragraph&) const = default;
};

struct SectionText {
  std::string title;
  std::vector<Paragraph> paragraphs;
  std::string draft;
  bool thin = false;

  /// Paragraph texts joined by blank lines; the length the summary bound refers to.
  std::string body() const;

  bool operator==(const SectionText&) const = default;
};

struct RunningSummary {
  std::vector<std::string> entries;
};

struct ComposerOptions {
  double support_threshold = 0.35;
  double repetition_jaccard = 0.5;
  double summary_ratio = 0.30;
};

struct Draft {
  std::string text;
  bool thin = false;
};

/// "[chunk_id] text" lines, one per context chunk, in context order.
std::string relevant_docs_block(const SectionContext& ctx);

/// Note carried with the documents in the content prompt asking the model to
/// keep each document's [chunk_id] after sentences drawn from it.
extern const std::string_view kMarkerInstruction;

/// An empty context is rejected unless allow_empty, in which case the draft is
/// written from the title alone and flagged thin.
Draft draft_section(std::string_view title, const SectionContext& ctx, const RunningSummary& history,
                    Gateway& gateway, std::string_view rewritten, bool allow_empty = false);

SectionText write_section(std::string_view title, const Draft& draft, const SectionContext& ctx,
                          const RunningSummary& history, Gateway& gateway, std::string_view rewritten,
                          EmbeddingBackend& embedder, const ComposerOptions& options = {},
                          Diagnostics* diagnostics = nullptr);

/// Inclusive character budget for a summary of a text of `length` code points.
std::size_t summary_budget(std::size_t length, double ratio = 0.30);

/// Cuts to at most `budget` code points, preferring the last word break.
std::string truncate_at_word(std::string_view text, std::size_t budget);

/// Returns the history entry for a finished section; "None" becomes "".
std::string summarize_section(const SectionText& section, std::string_view rewritten, Gateway& gateway,
                              double ratio = 0.30, Diagnostics* diagnostics = nullptr);

}  // namespace deepwriter
