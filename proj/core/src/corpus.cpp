#include "deepwriter/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace deepwriter {

BoundingBox BoundingBox::united(const BoundingBox& o) const noexcept {
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

std::string_view to_string(VisualKind kind) noexcept {
  switch (kind) {
    case VisualKind::Image: return "image";
    case VisualKind::Table: return "table";
    case VisualKind::Chart: return "chart";
  }
  return "image";
}

std::optional<VisualKind> parse_visual_kind(std::string_view s) noexcept {
  if (s == "image") return VisualKind::Image;
  if (s == "table") return VisualKind::Table;
  if (s == "chart") return VisualKind::Chart;
  return std::nullopt;
}

KnowledgeBase::KnowledgeBase(KnowledgeBaseParts parts) : parts_(std::move(parts)) {
  for (std::size_t i = 0; i < parts_.documents.size(); ++i) {
    doc_index_.try_emplace(parts_.documents[i].doc_id, i);
  }
  for (std::size_t i = 0; i < parts_.pages.size(); ++i) {
    page_index_.try_emplace({parts_.pages[i].doc_id, parts_.pages[i].page_no}, i);
  }
  for (std::size_t i = 0; i < parts_.chunks.size(); ++i) {
    const auto& c = parts_.chunks[i];
    chunk_index_.try_emplace(c.chunk_id, i);
    if (c.para_index) locator_index_.try_emplace({c.doc_id, c.page_no, *c.para_index}, i);
  }
  for (std::size_t i = 0; i < parts_.visuals.size(); ++i) {
    visual_index_.try_emplace(parts_.visuals[i].visual_id, i);
  }
}

const DocumentMeta* KnowledgeBase::find_document(std::string_view doc_id) const {
  auto it = doc_index_.find(std::string(doc_id));
  return it == doc_index_.end() ? nullptr : &parts_.documents[it->second];
}

const Page* KnowledgeBase::find_page(std::string_view doc_id, int page_no) const {
  auto it = page_index_.find({std::string(doc_id), page_no});
  return it == page_index_.end() ? nullptr : &parts_.pages[it->second];
}

const Chunk* KnowledgeBase::find_chunk(std::string_view chunk_id) const {
  auto it = chunk_index_.find(std::string(chunk_id));
  return it == chunk_index_.end() ? nullptr : &parts_.chunks[it->second];
}

const VisualElement* KnowledgeBase::find_visual(std::string_view visual_id) const {
  auto it = visual_index_.find(std::string(visual_id));
  return it == visual_index_.end() ? nullptr : &parts_.visuals[it->second];
}

const Chunk* KnowledgeBase::find_chunk_at(std::string_view doc_id, int page_no, int para_index) const {
  auto it = locator_index_.find({std::string(doc_id), page_no, para_index});
  return it == locator_index_.end() ? nullptr : &parts_.chunks[it->second];
}

std::vector<const DocumentMeta*> KnowledgeBase::documents_named(std::string_view filename) const {
  std::vector<const DocumentMeta*> out;
  for (const auto& d : parts_.documents) {
    if (d.filename == filename) out.push_back(&d);
  }
  return out;
}

namespace {

class HierarchyChecker {
 public:
  explicit HierarchyChecker(const KnowledgeBase& kb) : kb_(kb) {
    if (kb.manifest().embedding_dim > 0) dim_ = kb.manifest().embedding_dim;
  }

  ValidationReport run() {
    check_documents();
    check_pages();
    for (const auto& c : kb_.chunks()) check_chunk(c);
    for (const auto& v : kb_.visuals()) check_visual(v);
    return std::move(report_);
  }

 private:
  void check_documents() {
    std::set<std::string> seen;
    for (const auto& d : kb_.documents()) {
      if (!seen.insert(d.doc_id).second) {
        report_.add(IssueKind::DuplicateId, d.doc_id, "duplicate doc_id");
      }
      const auto pages = std::count_if(kb_.pages().begin(), kb_.pages().end(),
                                       [&](const Page& p) { return p.doc_id == d.doc_id; });
      if (pages != d.page_count) {
        report_.add(IssueKind::PageCountMismatch, d.doc_id,
                    "page_count " + std::to_string(d.page_count) + " but " + std::to_string(pages) +
                        " pages present");
      }
    }
  }

  void check_pages() {
    std::set<std::pair<std::string, int>> seen;
    for (const auto& p : kb_.pages()) {
      const std::string subject = p.doc_id + "#p" + std::to_string(p.page_no);
      if (!seen.insert({p.doc_id, p.page_no}).second) {
        report_.add(IssueKind::DuplicateId, subject, "duplicate page");
      }
      const auto* doc = kb_.find_document(p.doc_id);
      if (doc == nullptr) {
        report_.add(IssueKind::DanglingReference, subject, "page references unknown doc_id");
      } else if (p.page_no < 1 || p.page_no > doc->page_count) {
        report_.add(IssueKind::PageOutOfRange, subject, "page_no outside [1, page_count]");
      }
      if (!(p.width_pt > 0) || !(p.height_pt > 0)) {
        report_.add(IssueKind::InvalidDimensions, subject, "page dimensions must be positive");
      }
    }
  }

  // Returns the parent page, reporting at most one dangling reference.
  const Page* resolve_parent(const std::string& id, const std::string& doc_id, int page_no) {
    if (kb_.find_document(doc_id) == nullptr) {
      report_.add(IssueKind::DanglingReference, id, "unknown doc_id '" + doc_id + "'");
      return nullptr;
    }
    const auto* page = kb_.find_page(doc_id, page_no);
    if (page == nullptr) {
      report_.add(IssueKind::DanglingReference, id,
                  "unknown page " + std::to_string(page_no) + " of '" + doc_id + "'");
    }
    return page;
  }

  void check_unique(const std::string& id) {
    if (!ids_.insert(id).second) report_.add(IssueKind::DuplicateId, id, "duplicate item id");
  }

  void check_bbox(const std::string& id, const BoundingBox& b, const Page* page) {
    if (!b.valid() || (page != nullptr && !b.within(page->width_pt, page->height_pt))) {
      report_.add(IssueKind::BboxOutOfBounds, id, "bounding box invalid or outside the page");
    }
  }

  void check_embedding(const std::string& id, const std::optional<EmbeddingVector>& e) {
    if (!e) return;
    if (!dim_) dim_ = e->size();
    if (e->size() != *dim_) {
      report_.add(IssueKind::MixedDimensionality, id,
                  "dimension " + std::to_string(e->size()) + " differs from " + std::to_string(*dim_));
      return;
    }
    double sq = 0;
    for (float x : *e) sq += static_cast<double>(x) * x;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
      report_.add(IssueKind::NonUnitEmbedding, id, "embedding is not unit-normalized");
    }
  }

  void check_chunk(const Chunk& c) {
    check_unique(c.chunk_id);
    const auto* page = resolve_parent(c.chunk_id, c.doc_id, c.page_no);
    if (trim(c.text).empty()) report_.add(IssueKind::EmptyText, c.chunk_id, "chunk text is empty");
    std::size_t prev_end = 0;
    for (const auto& s : c.sentence_spans) {
      if (s.begin < prev_end || s.begin > s.end || s.end > c.text.size()) {
        report_.add(IssueKind::InvalidSpan, c.chunk_id, "sentence spans overlap or exceed the text");
        break;
      }
      prev_end = s.end;
    }
    if (c.bbox) check_bbox(c.chunk_id, *c.bbox, page);
    check_embedding(c.chunk_id, c.embedding);
  }

  void check_visual(const VisualElement& v) {
    check_unique(v.visual_id);
    const auto* page = resolve_parent(v.visual_id, v.doc_id, v.page_no);
    check_bbox(v.visual_id, v.bbox, page);
    if (trim(v.caption).empty()) report_.add(IssueKind::EmptyCaption, v.visual_id, "visual has no caption");
    check_embedding(v.visual_id, v.embedding);
  }

  const KnowledgeBase& kb_;
  ValidationReport report_;
  std::set<std::string> ids_;
  std::optional<std::size_t> dim_;
};

}  // namespace

ValidationReport validate_hierarchy(const KnowledgeBase& kb) { return HierarchyChecker(kb).run(); }

}  // namespace deepwriter
