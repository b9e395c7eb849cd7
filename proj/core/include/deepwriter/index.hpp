#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deepwriter/corpus.hpp"

namespace deepwriter {

enum class HitKind { Text, Visual };

std::string_view to_string(HitKind kind) noexcept;

struct ScoredHit {
  std::string item_id;  // chunk_id or visual_id
  HitKind kind = HitKind::Text;
  double score = 0;
  // Hierarchy roll-up for provenance.
  std::string doc_id;
  int page_no = 0;

  bool operator==(const ScoredHit&) const = default;
};

/// Ranking order: score descending, then item_id ascending.
bool ranks_before(const ScoredHit& a, const ScoredHit& b) noexcept;

/// Search interface so an approximate index could replace the exact one.
class SearchIndex {
 public:
  virtual ~SearchIndex() = default;
  virtual std::vector<ScoredHit> search(std::span<const float> query, std::size_t k,
                                        std::optional<HitKind> kind_filter) const = 0;
};

/// Exhaustive cosine scan over the embedded chunks and visuals of a KB.
class ExactIndex final : public SearchIndex {
 public:
  explicit ExactIndex(const KnowledgeBase& kb) : kb_(kb) {}

  std::vector<ScoredHit> search(std::span<const float> query, std::size_t k,
                                std::optional<HitKind> kind_filter) const override;

 private:
  const KnowledgeBase& kb_;
};

/// min(k, population) best hits. Throws EmptyCorpus when nothing of the
/// requested kind is embedded, InvalidArgument when k == 0.
std::vector<ScoredHit> top_k(std::span<const float> query, const KnowledgeBase& kb, std::size_t k,
                             std::optional<HitKind> kind_filter = std::nullopt);

}  // namespace deepwriter
