#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepwriter/citation.hpp"
#include "deepwriter/composer.hpp"
#include "deepwriter/corpus.hpp"
#include "deepwriter/report.hpp"

namespace deepwriter {

struct Article {
  std::string title;  // the rewritten query
  std::vector<SectionText> sections;

  bool operator==(const Article&) const = default;
};

inline constexpr std::string_view kArticleTrailer = "<!-- deepwriter: v1 -->";

/// Copies every placed asset to out_dir/assets/{visual_id}{ext} (once per
/// visual) and points the figure blocks at the copies. Relative source paths
/// resolve against asset_root. Throws DanglingAsset naming the visual.
Article add_image_paths(const Article& article, const std::filesystem::path& asset_root,
                        const std::filesystem::path& out_dir, std::vector<std::string>* copied = nullptr);

struct RenderedArticle {
  std::string markdown;
  std::vector<std::string> references;  // references[n-1] is marker [n]
};

/// Pure Markdown rendering with numbered citation markers and a References list.
RenderedArticle render(const Article& article, std::span<const CitationRecord> records);

/// A paragraph read back from rendered Markdown.
struct ParsedParagraph {
  std::string text;  // markers removed
  std::vector<std::pair<std::size_t, int>> markers;  // (offset in text, n)
  std::vector<FigureBlock> figures;                  // visual_id from the asset file stem
};

struct ParsedArticle {
  std::string title;
  std::vector<std::string> section_titles;
  std::vector<std::vector<ParsedParagraph>> sections;
  std::vector<std::pair<int, std::string>> references;
  bool has_trailer = false;

  /// Sections with clean paragraph texts, for claim extraction.
  std::vector<SectionText> section_texts() const;
};

ParsedArticle parse_article(std::string_view markdown);

nlohmann::json citations_json(std::span<const CitationRecord> records, std::span<const std::string> warnings,
                              std::span<const std::string> no_source);
nlohmann::json to_json(const ValidationReport& report);
ValidationReport validation_report_from_json(const nlohmann::json& j);

/// Writes article.md, citations.json and report.json into out_dir.
void write_bundle(const std::filesystem::path& out_dir, const RenderedArticle& rendered,
                  const nlohmann::json& citations, const ValidationReport& report);

/// Re-checks a written bundle against the KB: citations, marker/reference
/// bijection, and that every image reference exists under out_dir.
ValidationReport validate_bundle(const std::filesystem::path& out_dir, const KnowledgeBase& kb);

}  // namespace deepwriter
