#include "deepwriter/pipeline.hpp"

#include <set>

#include "deepwriter/diagnostics.hpp"

namespace deepwriter {

PipelineResult run_pipeline(std::string_view query, const KnowledgeBase& kb, ChatBackend& llm,
                            EmbeddingBackend& embedder, const PipelineOptions& options,
                            const std::optional<std::filesystem::path>& asset_root) {
  Gateway gateway(llm, options.gen, options.retry);
  Diagnostics diagnostics;
  PipelineResult r;

  // Planning.
  r.query = rewrite_query(query, gateway);
  const auto& q = r.query.rewritten;
  r.subtasks = decompose(q, gateway);
  r.plan = plan_sections(q, r.subtasks, gateway);

  // Retrieval and clustering.
  for (const auto& t : r.subtasks) r.bundles.push_back(retrieve(t, kb, embedder, options.retrieval));
  r.contexts = cluster(r.bundles, r.plan, gateway, kb, embedder, q, &diagnostics);

  // Composition, one section at a time against the running summary.
  std::vector<SectionText> sections;
  for (std::size_t i = 0; i < r.plan.titles.size(); ++i) {
    const auto& title = r.plan.titles[i];
    const auto draft = draft_section(title, r.contexts[i], r.history, gateway, q, options.allow_empty_sections);
    if (draft.thin) diagnostics.warn("section \"" + title + "\" has no retrieved content");
    auto section = write_section(title, draft, r.contexts[i], r.history, gateway, q, embedder, options.composer,
                                 &diagnostics);
    r.history.entries.push_back(summarize_section(section, q, gateway, options.composer.summary_ratio, &diagnostics));
    sections.push_back(std::move(section));
  }

  // Visual placement over the pooled visual hits.
  std::vector<VisualElement> pool;
  std::set<std::string> seen;
  for (const auto& b : r.bundles) {
    for (const auto& hit : b.visual_hits) {
      if (!seen.insert(hit.item_id).second) continue;
      if (const VisualElement* v = kb.find_visual(hit.item_id)) pool.push_back(*v);
    }
  }
  r.relevance = relevance_matrix(pool, sections, embedder);
  r.placement = optimize_placement(r.relevance, options.placement_capacity, &diagnostics);
  r.article.title = q;
  r.article.sections = insert_visuals(sections, r.placement, kb, asset_root);

  // Citations.
  SourceScorer scorer(embedder, kb.manifest().embedding_dim ? std::optional(kb.manifest().embedding_dim) : std::nullopt);
  r.citations = attribute_citations(r.article.sections, r.contexts, kb, scorer, options.citation);
  r.report = validate_citations(r.article.sections, r.citations.records, kb, r.citations.no_source);
  for (const auto& w : diagnostics.warnings()) r.report.warnings.push_back(w);
  for (const auto& m : r.citations.merge_log) r.report.warnings.push_back(m);

  r.transcript = gateway.transcript();
  return r;
}

RenderedArticle write_output(const PipelineResult& result, const std::filesystem::path& asset_root,
                             const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto article = add_image_paths(result.article, asset_root, out_dir);
  auto rendered = render(article, result.citations.records);
  write_bundle(out_dir, rendered,
               citations_json(result.citations.records, result.citations.warnings, result.citations.no_source),
               result.report);
  return rendered;
}

}  // namespace deepwriter
