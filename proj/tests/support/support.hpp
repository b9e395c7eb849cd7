#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "deepwriter/corpus.hpp"
#include "deepwriter/embedding.hpp"
#include "deepwriter/gateway.hpp"
#include "deepwriter/index.hpp"

namespace dwtest {

std::filesystem::path fixture_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "dwtest");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Chat backend driven by a function of the prompt; records every prompt.
class FnBackend final : public deepwriter::ChatBackend {
 public:
  explicit FnBackend(std::function<std::string(const std::string&)> fn) : fn_(std::move(fn)) {}
  std::string id() const override { return "fn"; }
  deepwriter::ChatReply complete(const std::string& prompt, const deepwriter::GenParams&) override {
    prompts.push_back(prompt);
    return {fn_(prompt), {}};
  }
  std::vector<std::string> prompts;

 private:
  std::function<std::string(const std::string&)> fn_;
};

// ---------------------------------------------------------------------------
// Retrieval oracle.
// ---------------------------------------------------------------------------

/// dot / (|a||b|) in double precision, written out longhand.
double oracle_cosine(const std::vector<float>& a, const std::vector<float>& b);

struct OracleHit {
  std::string id;
  double score = 0;
};

/// Scores every embedded item of the requested kind, sorts the whole list by
/// (score desc, id asc) and keeps the first k.
std::vector<OracleHit> brute_force_top_k(const std::vector<float>& query, const deepwriter::KnowledgeBase& kb,
                                         std::size_t k, std::optional<deepwriter::HitKind> kind);

/// Random KB with `chunks` text items and `visuals` visual items of the given
/// dimensionality. Embeddings are unit vectors; some are exact duplicates so
/// score ties occur.
deepwriter::KnowledgeBase random_kb(std::mt19937_64& rng, std::size_t chunks, std::size_t visuals, std::size_t dim);

/// One document "report.pdf" (doc_id "report") with a single page holding
/// chunks c000001.. in order, then visuals v000001.. with the given captions.
/// Everything is embedded through the backend.
deepwriter::KnowledgeBase kb_from_texts(const std::vector<std::string>& chunk_texts,
                                        const std::vector<std::string>& captions,
                                        deepwriter::EmbeddingBackend& embedder);

/// The three-report fixture corpus ingested as the fixture config does
/// (chunking 240/100/40, scripted captions). Assets stay in the corpus dir.
deepwriter::KnowledgeBase fixture_kb(deepwriter::EmbeddingBackend& embedder);

std::vector<float> random_unit_vector(std::mt19937_64& rng, std::size_t dim);

// ---------------------------------------------------------------------------
// Placement oracle.
// ---------------------------------------------------------------------------

struct PlacementInstance {
  std::vector<std::string> ids;
  std::vector<bool> adjacency;  // table or chart
  std::vector<std::vector<double>> rows;
  std::size_t capacity = 1;
};

struct OraclePlacement {
  std::string id;
  std::size_t pos = 0;
  double score = 0;
  bool relocated = false;
};

struct OraclePlan {
  std::vector<OraclePlacement> placed;  // in placement order
  std::vector<std::string> dropped;
};

/// Greedy contract reimplemented by repeated selection: the unprocessed
/// visual with the largest row maximum (lowest id on ties) takes the best
/// feasible paragraph (highest score, lowest index on ties).
OraclePlan oracle_greedy(const PlacementInstance& inst);

/// True when the plan respects capacity and table/chart adjacency.
bool oracle_feasible(const PlacementInstance& inst, const std::vector<std::pair<std::size_t, std::size_t>>& plan);

/// Single-swap local optimality: no placed visual can move to another
/// paragraph, and no dropped visual can be added, while keeping the rest of
/// the plan fixed and feasible, such that the total score increases.
bool single_swap_optimal(const PlacementInstance& inst, const OraclePlan& plan, std::string* why = nullptr);

PlacementInstance random_placement_instance(std::mt19937_64& rng, std::size_t max_visuals,
                                            std::size_t max_paragraphs);

// ---------------------------------------------------------------------------
// Chunker coverage.
// ---------------------------------------------------------------------------

/// Byte-level scan: returns the first uncovered offset of [0, length), or
/// nullopt when the ranges cover everything.
std::optional<std::size_t> first_gap(std::size_t length, const std::vector<std::pair<std::size_t, std::size_t>>& ranges);

/// Random page text of sentences of varied length, some without terminators.
std::string random_page_text(std::mt19937_64& rng, std::size_t approx_chars);

/// Random lowercase word of 3-9 letters.
std::string random_word(std::mt19937_64& rng);

}  // namespace dwtest
