#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepwriter/assembler.hpp"
#include "deepwriter/citation.hpp"
#include "deepwriter/composer.hpp"
#include "deepwriter/embedding.hpp"
#include "deepwriter/gateway.hpp"
#include "deepwriter/placement.hpp"
#include "deepwriter/planner.hpp"
#include "deepwriter/retrieval.hpp"

namespace deepwriter {

struct PipelineOptions {
  RetrievalLimits retrieval;
  ComposerOptions composer;
  CitationOptions citation;
  std::size_t placement_capacity = 1;
  bool allow_empty_sections = true;
  GenParams gen;
  RetryPolicy retry;
};

struct PipelineResult {
  RewrittenQuery query;
  std::vector<Subtask> subtasks;
  SectionPlan plan;
  std::vector<RetrievalBundle> bundles;
  std::vector<SectionContext> contexts;
  RunningSummary history;
  RelevanceMatrix relevance;
  PlacementPlan placement;
  Article article;  // sections with figures inserted
  CitationResult citations;
  ValidationReport report;
  std::vector<ChatExchange> transcript;
};

/// Plan, retrieve, cluster, compose, place visuals, and attribute citations.
/// asset_root, when given, is where relative visual asset paths resolve.
PipelineResult run_pipeline(std::string_view query, const KnowledgeBase& kb, ChatBackend& llm,
                            EmbeddingBackend& embedder, const PipelineOptions& options = {},
                            const std::optional<std::filesystem::path>& asset_root = std::nullopt);

/// Copies assets and writes article.md, citations.json and report.json.
RenderedArticle write_output(const PipelineResult& result, const std::filesystem::path& asset_root,
                             const std::filesystem::path& out_dir);

}  // namespace deepwriter
