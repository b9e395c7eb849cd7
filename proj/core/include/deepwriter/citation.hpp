#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepwriter/composer.hpp"
#include "deepwriter/corpus.hpp"
#include "deepwriter/embedding.hpp"
#include "deepwriter/report.hpp"
#include "deepwriter/retrieval.hpp"

namespace deepwriter {

struct Claim {
  std::string claim_id;
  std::string section_title;
  std::size_t section_index = 0;
  std::size_t paragraph_index = 0;  // global reading order, as in placement
  TextSpan sentence_span;           // within the paragraph text
  std::string text;
  bool is_factual = false;

  bool operator==(const Claim&) const = default;
};

enum class CitationLevel { Document, Paragraph, Sentence };

std::string_view to_string(CitationLevel level) noexcept;
std::optional<CitationLevel> parse_citation_level(std::string_view s) noexcept;

struct CitationSource {
  std::string doc_id;
  std::string filename;
  std::optional<int> page_no;
  std::optional<std::string> chunk_id;
  std::optional<int> para_index;
  std::optional<int> sentence_index;  // 0-based into the chunk's sentence spans
  std::optional<BoundingBox> bbox;

  bool operator==(const CitationSource&) const = default;
};

struct CitationRecord {
  std::string claim_id;
  CitationLevel level = CitationLevel::Document;
  std::string reference;
  CitationSource source;
  double score = 0;

  bool operator==(const CitationRecord&) const = default;
};

nlohmann::json to_json(const CitationRecord& record);
CitationRecord citation_record_from_json(const nlohmann::json& j);

struct CitationOptions {
  double accept_threshold = 0.30;
  double sentence_threshold = 0.60;
  double consistency_jaccard = 0.7;
  double consistency_score_gap = 0.05;
};

/// True when a sentence carries a digit, percent sign, currency cue, or a
/// capitalized word pair past the first word.
bool is_factual_sentence(std::string_view sentence);

/// One claim per sentence, ids in reading order.
std::vector<Claim> extract_claims(std::span<const SectionText> article);

/// Embeds claims and chunk sentences, caching per chunk.
class SourceScorer {
 public:
  explicit SourceScorer(EmbeddingBackend& embedder, std::optional<std::size_t> dim = std::nullopt)
      : embedder_(embedder), dim_(dim) {}

  struct Score {
    double score = -1;  // max of chunk-level and best sentence cosine
    std::optional<std::size_t> best_sentence;
    double sentence_score = -1;
  };

  EmbeddingVector embed_claim(std::string_view text);
  Score score(std::span<const float> claim, const Chunk& chunk);

 private:
  struct Cached {
    EmbeddingVector chunk;
    std::vector<EmbeddingVector> sentences;
  };
  const Cached& cached(const Chunk& chunk);

  EmbeddingBackend& embedder_;
  std::optional<std::size_t> dim_;
  std::map<std::string, Cached> cache_;
};

struct SourceMatch {
  const Chunk* chunk = nullptr;
  double score = 0;
  std::optional<std::size_t> best_sentence;
  double sentence_score = -1;
};

/// Searches the paragraph's supporting chunks first and keeps the best one if
/// it clears the threshold; otherwise searches all section candidates.
/// Throws NoSource when nothing clears the threshold.
SourceMatch find_source(std::span<const float> claim, std::span<const Chunk* const> supporting,
                        std::span<const Chunk* const> candidates, SourceScorer& scorer,
                        double accept_threshold = 0.30);

CitationLevel determine_granularity(const SourceMatch& match, double sentence_threshold = 0.60);

/// Address of a citation in the KB, as written in a reference string.
struct ReferenceLocator {
  std::string filename;
  std::optional<int> page_no;
  std::optional<int> para_index;
  std::optional<int> sentence_index;

  CitationLevel level() const noexcept;
  bool operator==(const ReferenceLocator&) const = default;
};

/// filename | filename:p{page}.{para} | filename:p{page}.{para}.s{sentence}
std::string format_reference(const ReferenceLocator& locator);
ReferenceLocator parse_reference(std::string_view reference);
ReferenceLocator locator_of(const CitationSource& source);

/// The chunk a locator names, or the document for document-level locators.
struct ResolvedReference {
  const DocumentMeta* document = nullptr;
  const Chunk* chunk = nullptr;
};
std::optional<ResolvedReference> resolve_reference(const ReferenceLocator& locator, const KnowledgeBase& kb);

CitationRecord generate_citation(const Claim& claim, const SourceMatch& match, CitationLevel level,
                                 const KnowledgeBase& kb);

struct ConsistencyResult {
  std::vector<CitationRecord> records;
  std::vector<std::string> merge_log;
};

/// Near-duplicate claims (trigram Jaccard above the gate, scores within the
/// gap) are grouped transitively and rebound to the group's best source.
ConsistencyResult consistency_check(std::span<const CitationRecord> records, std::span<const Claim> claims,
                                    const CitationOptions& options = {});

/// Flags uncited factual claims, unresolvable references and level/format
/// mismatches. Claims listed in no_source become warnings instead of issues.
ValidationReport validate_citations(std::span<const SectionText> article, std::span<const CitationRecord> records,
                                    const KnowledgeBase& kb, std::span<const std::string> no_source = {});

struct CitationResult {
  std::vector<Claim> claims;
  std::vector<CitationRecord> records;
  std::vector<std::string> no_source;  // claim ids
  std::vector<std::string> warnings;
  std::vector<std::string> merge_log;
};

/// Extract, match, cite and merge for a whole article. contexts[i] is the
/// retrieval context of article[i].
CitationResult attribute_citations(std::span<const SectionText> article, std::span<const SectionContext> contexts,
                                   const KnowledgeBase& kb, SourceScorer& scorer, const CitationOptions& options = {});

}  // namespace deepwriter
