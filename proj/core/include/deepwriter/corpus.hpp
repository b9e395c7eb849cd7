#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "deepwriter/report.hpp"
#include "deepwriter/text.hpp"

namespace deepwriter {

/// Unit-normalized embedding, stored as 32-bit floats.
using EmbeddingVector = std::vector<float>;

/// Page coordinates in points, origin top-left.
struct BoundingBox {
  double x0 = 0;
  double y0 = 0;
  double x1 = 0;
  double y1 = 0;

  bool valid() const noexcept { return x0 < x1 && y0 < y1; }
  bool within(double width, double height) const noexcept {
    return x0 >= 0 && y0 >= 0 && x1 <= width && y1 <= height;
  }
  BoundingBox united(const BoundingBox& o) const noexcept;

  bool operator==(const BoundingBox&) const = default;
};

struct DocumentMeta {
  std::string doc_id;
  std::string filename;
  std::string title;
  std::optional<int> year;
  std::vector<std::string> domain_tags;
  int page_count = 0;

  bool operator==(const DocumentMeta&) const = default;
};

struct Page {
  std::string doc_id;
  int page_no = 1;
  double width_pt = 0;
  double height_pt = 0;
  std::string raw_text;

  bool operator==(const Page&) const = default;
};

struct Chunk {
  std::string chunk_id;
  std::string doc_id;
  int page_no = 1;
  std::optional<int> para_index;
  std::vector<TextSpan> sentence_spans;
  std::string text;
  std::optional<BoundingBox> bbox;
  std::optional<EmbeddingVector> embedding;

  std::string_view sentence(std::size_t i) const {
    const auto& s = sentence_spans.at(i);
    return std::string_view(text).substr(s.begin, s.size());
  }

  bool operator==(const Chunk&) const = default;
};

enum class VisualKind { Image, Table, Chart };

std::string_view to_string(VisualKind kind) noexcept;
std::optional<VisualKind> parse_visual_kind(std::string_view s) noexcept;

struct VisualElement {
  std::string visual_id;
  std::string doc_id;
  int page_no = 1;
  VisualKind kind = VisualKind::Image;
  BoundingBox bbox;
  std::string asset_path;
  std::string caption;
  std::optional<EmbeddingVector> embedding;

  bool operator==(const VisualElement&) const = default;
};

struct Manifest {
  int format_version = 1;
  std::size_t embedding_dim = 0;

  bool operator==(const Manifest&) const = default;
};

struct KnowledgeBaseParts {
  std::vector<DocumentMeta> documents;
  std::vector<Page> pages;
  std::vector<Chunk> chunks;
  std::vector<VisualElement> visuals;
  Manifest manifest;
};

/// Immutable three-level store: documents -> pages -> chunks/visuals.
/// Construction does not validate; call validate_hierarchy() for that.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  explicit KnowledgeBase(KnowledgeBaseParts parts);

  const std::vector<DocumentMeta>& documents() const noexcept { return parts_.documents; }
  const std::vector<Page>& pages() const noexcept { return parts_.pages; }
  const std::vector<Chunk>& chunks() const noexcept { return parts_.chunks; }
  const std::vector<VisualElement>& visuals() const noexcept { return parts_.visuals; }
  const Manifest& manifest() const noexcept { return parts_.manifest; }
  const KnowledgeBaseParts& parts() const noexcept { return parts_; }

  const DocumentMeta* find_document(std::string_view doc_id) const;
  const Page* find_page(std::string_view doc_id, int page_no) const;
  const Chunk* find_chunk(std::string_view chunk_id) const;
  const VisualElement* find_visual(std::string_view visual_id) const;
  /// Chunk addressed by (doc, page, para_index) as used in citation locators.
  const Chunk* find_chunk_at(std::string_view doc_id, int page_no, int para_index) const;
  /// Documents sharing a source filename, in KB order.
  std::vector<const DocumentMeta*> documents_named(std::string_view filename) const;

  bool operator==(const KnowledgeBase& o) const {
    return parts_.documents == o.parts_.documents && parts_.pages == o.parts_.pages &&
           parts_.chunks == o.parts_.chunks && parts_.visuals == o.parts_.visuals &&
           parts_.manifest == o.parts_.manifest;
  }

 private:
  KnowledgeBaseParts parts_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::map<std::pair<std::string, int>, std::size_t> page_index_;
  std::unordered_map<std::string, std::size_t> chunk_index_;
  std::unordered_map<std::string, std::size_t> visual_index_;
  std::map<std::tuple<std::string, int, int>, std::size_t> locator_index_;
};

/// Lists every broken invariant; an empty report means the KB is well-formed.
ValidationReport validate_hierarchy(const KnowledgeBase& kb);

}  // namespace deepwriter
