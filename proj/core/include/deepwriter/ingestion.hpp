#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepwriter/corpus.hpp"
#include "deepwriter/diagnostics.hpp"
#include "deepwriter/embedding.hpp"

namespace deepwriter {

// ---------------------------------------------------------------------------
// Extraction Interchange Format (EIF), version 1.
// ---------------------------------------------------------------------------

struct InterchangeBlock {
  std::string text;
  BoundingBox bbox;
};

struct InterchangeVisual {
  VisualKind kind = VisualKind::Image;
  BoundingBox bbox;
  std::string asset_path;  // relative to the interchange file's directory
  std::optional<std::string> caption;
};

struct InterchangePage {
  int page_no = 1;
  double width_pt = 0;
  double height_pt = 0;
  std::vector<InterchangeBlock> text_blocks;
  std::vector<InterchangeVisual> visuals;
};

struct ExtractionInterchange {
  std::string source_filename;
  std::vector<InterchangePage> pages;
  /// Directory asset paths resolve against; empty for in-memory input.
  std::filesystem::path base_dir;
};

inline constexpr int kInterchangeVersion = 1;

/// Throws MalformedInterchange or UnsupportedVersion. Unknown fields are ignored.
ExtractionInterchange parse_interchange(std::string_view bytes);
ExtractionInterchange load_interchange(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Chunking.
// ---------------------------------------------------------------------------

struct ChunkingPolicy {
  std::size_t target_chars = 1200;
  std::size_t min_chars = 200;
  std::size_t overlap_chars = 100;

  /// How far past target_chars a chunk may run to reach a sentence end.
  std::size_t slack_chars() const noexcept { return target_chars / 4; }
  /// Throws InvalidArgument unless 0 < min <= target and overlap < min.
  void validate() const;
};

struct PageChunk {
  std::string text;
  TextSpan range;  // byte range into the page text
};

/// Splits page text into overlapping chunks. Every chunk except possibly the
/// last spans [min_chars, target_chars + slack_chars()] bytes; boundaries
/// prefer sentence ends; the union of ranges covers the whole text.
std::vector<PageChunk> chunk_page(std::string_view page_text, const ChunkingPolicy& policy);

// ---------------------------------------------------------------------------
// Captioning.
// ---------------------------------------------------------------------------

struct CaptionRequest {
  std::string visual_id;
  VisualKind kind = VisualKind::Image;
  int page_no = 1;
  std::string asset_path;  // resolved path of the asset file
};

class CaptionBackend {
 public:
  virtual ~CaptionBackend() = default;
  /// Throws CaptionFailed for a per-visual failure and BackendUnavailable
  /// when the service itself cannot be reached.
  virtual std::string caption(const CaptionRequest& request) = 0;
};

/// Offline captioner. Looks captions up by asset file name; misses and
/// names listed in `failing` raise CaptionFailed.
class ScriptedCaptioner final : public CaptionBackend {
 public:
  ScriptedCaptioner() = default;
  explicit ScriptedCaptioner(std::map<std::string, std::string> by_asset_name,
                             std::set<std::string> failing = {})
      : captions_(std::move(by_asset_name)), failing_(std::move(failing)) {}

  static ScriptedCaptioner from_file(const std::filesystem::path& path);

  std::string caption(const CaptionRequest& request) override;

 private:
  std::map<std::string, std::string> captions_;
  std::set<std::string> failing_;
};

struct HttpCaptionerConfig {
  std::string url;  // chat-completions endpoint of a vision-language model
  std::string model;
  std::string api_key;
  int timeout_seconds = 120;
  RetryPolicy retry;
};

/// Sends the asset as an image_url content part of a chat-completions request.
class HttpCaptioner final : public CaptionBackend {
 public:
  explicit HttpCaptioner(HttpCaptionerConfig config) : config_(std::move(config)) {}
  std::string caption(const CaptionRequest& request) override;

 private:
  HttpCaptionerConfig config_;
};

/// Fills missing captions through the backend; source captions are kept
/// verbatim. A CaptionFailed visual falls back to
/// "uncaptioned {kind} on page {n}" and records a warning.
std::vector<VisualElement> caption_visuals(std::vector<VisualElement> visuals, CaptionBackend& captioner,
                                           Diagnostics& diagnostics);

// ---------------------------------------------------------------------------
// Knowledge-base construction.
// ---------------------------------------------------------------------------

/// Builds a validated, fully embedded KB. Visual asset paths are the resolved
/// source paths; materialize_assets() copies them next to a persisted KB.
KnowledgeBase build_kb(std::span<const ExtractionInterchange> interchanges, const ChunkingPolicy& policy,
                       EmbeddingBackend& embedder, CaptionBackend& captioner, Diagnostics& diagnostics);

/// Copies every visual asset to kb_dir/assets/{visual_id}{ext} and returns a
/// KB whose asset paths are relative to kb_dir. Throws DanglingAsset.
KnowledgeBase materialize_assets(const KnowledgeBase& kb, const std::filesystem::path& kb_dir);

}  // namespace deepwriter
