#include "deepwriter/index.hpp"

#include <algorithm>

#include "deepwriter/embedding.hpp"
#include "deepwriter/error.hpp"

namespace deepwriter {

std::string_view to_string(HitKind kind) noexcept { return kind == HitKind::Text ? "text" : "visual"; }

bool ranks_before(const ScoredHit& a, const ScoredHit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.item_id < b.item_id;
}

std::vector<ScoredHit> ExactIndex::search(std::span<const float> query, std::size_t k,
                                          std::optional<HitKind> kind_filter) const {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "top_k needs k >= 1");
  std::vector<ScoredHit> hits;
  if (!kind_filter || *kind_filter == HitKind::Text) {
    for (const auto& c : kb_.chunks()) {
      if (!c.embedding) continue;
      hits.push_back({c.chunk_id, HitKind::Text, cosine(query, *c.embedding), c.doc_id, c.page_no});
    }
  }
  if (!kind_filter || *kind_filter == HitKind::Visual) {
    for (const auto& v : kb_.visuals()) {
      if (!v.embedding) continue;
      hits.push_back({v.visual_id, HitKind::Visual, cosine(query, *v.embedding), v.doc_id, v.page_no});
    }
  }
  if (hits.empty()) throw Error(ErrorKind::EmptyCorpus, "no embedded items to search");
  const auto keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
  hits.resize(keep);
  return hits;
}

std::vector<ScoredHit> top_k(std::span<const float> query, const KnowledgeBase& kb, std::size_t k,
                             std::optional<HitKind> kind_filter) {
  return ExactIndex(kb).search(query, k, kind_filter);
}

}  // namespace deepwriter
