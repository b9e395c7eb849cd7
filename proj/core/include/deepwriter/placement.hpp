#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepwriter/composer.hpp"
#include "deepwriter/corpus.hpp"
#include "deepwriter/diagnostics.hpp"
#include "deepwriter/embedding.hpp"

namespace deepwriter {

/// Position of a paragraph inside the article: (section, paragraph).
struct ParagraphRef {
  std::size_t section = 0;
  std::size_t paragraph = 0;

  bool operator==(const ParagraphRef&) const = default;
};

/// Paragraphs in global reading order across sections.
std::vector<ParagraphRef> paragraph_index_map(std::span<const SectionText> article);

/// rows[k][i] = cosine(visual k, paragraph i).
struct RelevanceMatrix {
  std::vector<std::string> visual_ids;
  std::vector<VisualKind> kinds;
  std::vector<std::vector<double>> rows;
  std::vector<ParagraphRef> paragraphs;

  std::size_t visual_count() const noexcept { return rows.size(); }
  std::size_t paragraph_count() const noexcept { return paragraphs.size(); }
  /// First index of the row maximum. Requires at least one paragraph.
  std::size_t argmax(std::size_t visual) const;
};

/// Visuals use their stored embedding when present, else their caption.
RelevanceMatrix relevance_matrix(std::span<const VisualElement> visuals, std::span<const SectionText> article,
                                 EmbeddingBackend& embedder);

struct Assignment {
  std::string visual_id;
  std::size_t paragraph_index = 0;
  double score = 0;
  bool relocated = false;

  bool operator==(const Assignment&) const = default;
};

struct PlacementPlan {
  std::vector<Assignment> assignments;  // in placement order
  std::vector<std::string> dropped;

  std::size_t hosted_at(std::size_t paragraph_index) const noexcept;
  bool operator==(const PlacementPlan&) const = default;
};

struct ConstraintReport {
  bool capacity_ok = true;
  // Tables and charts must sit right after their best paragraph or right
  // before it, i.e. after the paragraph preceding it.
  bool adjacency_ok = true;
  // Blocks are only ever inserted after a paragraph, so blocks hosted by
  // different paragraphs always have a paragraph between them. Stacking on
  // one paragraph is bounded by capacity instead.
  bool spacing_ok = true;

  bool satisfied() const noexcept { return capacity_ok && adjacency_ok && spacing_ok; }
};

bool adjacency_constrained(VisualKind kind) noexcept;

ConstraintReport check_flow_constraints(const RelevanceMatrix& matrix, std::size_t visual, std::size_t pos,
                                        const PlacementPlan& plan, std::size_t capacity);

/// Greedy placement: visuals in descending row-max order (ties by visual_id)
/// take their argmax when feasible, else the best feasible position; a visual
/// with no feasible position is dropped with a warning.
PlacementPlan optimize_placement(const RelevanceMatrix& matrix, std::size_t capacity = 1,
                                 Diagnostics* diagnostics = nullptr);

/// Attaches a figure block to each assigned paragraph, highest score first.
/// When asset_root is given, relative asset paths resolve against it and a
/// missing file raises DanglingAsset.
std::vector<SectionText> insert_visuals(std::span<const SectionText> article, const PlacementPlan& plan,
                                        const KnowledgeBase& kb,
                                        const std::optional<std::filesystem::path>& asset_root = std::nullopt);

}  // namespace deepwriter
