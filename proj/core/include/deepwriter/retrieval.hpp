#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepwriter/corpus.hpp"
#include "deepwriter/diagnostics.hpp"
#include "deepwriter/embedding.hpp"
#include "deepwriter/gateway.hpp"
#include "deepwriter/index.hpp"
#include "deepwriter/planner.hpp"

namespace deepwriter {

struct RetrievalLimits {
  std::size_t k_text = 8;
  std::size_t k_visual = 4;
};

struct RetrievalBundle {
  std::string subtask_id;
  std::vector<ScoredHit> text_hits;
  std::vector<ScoredHit> visual_hits;
};

struct ScoredChunk {
  const Chunk* chunk = nullptr;
  double score = 0;
};

struct ScoredVisual {
  const VisualElement* visual = nullptr;
  double score = 0;
};

/// Retrieved material assigned to one planned section. Refs point into the KB.
struct SectionContext {
  std::string section_title;
  std::vector<ScoredChunk> chunks;
  std::vector<ScoredVisual> visuals;

  bool empty() const noexcept { return chunks.empty() && visuals.empty(); }
};

nlohmann::json to_json(const SectionContext& ctx);

/// Top-k chunks for the subtask, plus top-k visuals when it wants visuals.
/// A KB without embedded visuals yields no visual hits rather than an error.
RetrievalBundle retrieve(const Subtask& subtask, const KnowledgeBase& kb, EmbeddingBackend& embedder,
                         const RetrievalLimits& limits = {});

/// Compares a classifier reply against a title, ignoring case, surrounding
/// whitespace, quotes and emphasis.
bool section_name_matches(std::string_view response, std::string_view title);

/// Assigns every distinct retrieved chunk and visual to one section via the
/// clustering prompt, falling back to the closest title embedding when the
/// reply names no planned section. Output follows plan order.
std::vector<SectionContext> cluster(std::span<const RetrievalBundle> bundles, const SectionPlan& plan,
                                    Gateway& gateway, const KnowledgeBase& kb, EmbeddingBackend& embedder,
                                    std::string_view rewritten, Diagnostics* diagnostics = nullptr);

}  // namespace deepwriter
