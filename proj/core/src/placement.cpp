#include "deepwriter/placement.hpp"

#include <algorithm>
#include <numeric>

#include "deepwriter/error.hpp"

namespace deepwriter {

std::vector<ParagraphRef> paragraph_index_map(std::span<const SectionText> article) {
  std::vector<ParagraphRef> map;
  for (std::size_t s = 0; s < article.size(); ++s) {
    for (std::size_t p = 0; p < article[s].paragraphs.size(); ++p) map.push_back({s, p});
  }
  return map;
}

std::size_t RelevanceMatrix::argmax(std::size_t visual) const {
  const auto& row = rows.at(visual);
  if (row.empty()) throw Error(ErrorKind::InvalidArgument, "argmax of an empty row");
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

RelevanceMatrix relevance_matrix(std::span<const VisualElement> visuals, std::span<const SectionText> article,
                                 EmbeddingBackend& embedder) {
  RelevanceMatrix m;
  m.paragraphs = paragraph_index_map(article);
  if (visuals.empty()) return m;

  std::vector<EmbedInput> missing;
  for (const auto& v : visuals) {
    if (!v.embedding) missing.push_back(EmbedInput::text(v.caption));
  }
  auto caption_vectors = missing.empty() ? std::vector<EmbeddingVector>{} : embed(missing, embedder);
  std::vector<EmbeddingVector> visual_vectors;
  std::size_t next = 0;
  for (const auto& v : visuals) visual_vectors.push_back(v.embedding ? *v.embedding : caption_vectors[next++]);

  std::vector<EmbeddingVector> paragraph_vectors;
  if (!m.paragraphs.empty()) {
    std::vector<EmbedInput> inputs;
    for (const auto& ref : m.paragraphs) inputs.push_back(EmbedInput::text(article[ref.section].paragraphs[ref.paragraph].text));
    paragraph_vectors = embed(inputs, embedder, visual_vectors.front().size());
  }

  for (std::size_t k = 0; k < visuals.size(); ++k) {
    m.visual_ids.push_back(visuals[k].visual_id);
    m.kinds.push_back(visuals[k].kind);
    std::vector<double> row;
    row.reserve(paragraph_vectors.size());
    for (const auto& p : paragraph_vectors) row.push_back(cosine(visual_vectors[k], p));
    m.rows.push_back(std::move(row));
  }
  return m;
}

std::size_t PlacementPlan::hosted_at(std::size_t paragraph_index) const noexcept {
  return static_cast<std::size_t>(std::count_if(assignments.begin(), assignments.end(), [&](const Assignment& a) {
    return a.paragraph_index == paragraph_index;
  }));
}

bool adjacency_constrained(VisualKind kind) noexcept { return kind == VisualKind::Table || kind == VisualKind::Chart; }

ConstraintReport check_flow_constraints(const RelevanceMatrix& matrix, std::size_t visual, std::size_t pos,
                                        const PlacementPlan& plan, std::size_t capacity) {
  if (visual >= matrix.visual_count()) throw Error(ErrorKind::InvalidArgument, "visual index out of range");
  if (pos >= matrix.rows[visual].size()) throw Error(ErrorKind::InvalidArgument, "paragraph index out of range");
  ConstraintReport report;
  report.capacity_ok = plan.hosted_at(pos) < capacity;
  if (adjacency_constrained(matrix.kinds.at(visual))) {
    const auto best = matrix.argmax(visual);
    report.adjacency_ok = pos == best || pos + 1 == best;
  }
  return report;
}

PlacementPlan optimize_placement(const RelevanceMatrix& matrix, std::size_t capacity, Diagnostics* diagnostics) {
  if (capacity == 0) throw Error(ErrorKind::InvalidArgument, "placement capacity must be >= 1");
  PlacementPlan plan;
  const auto n = matrix.visual_count();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto row_max = [&](std::size_t k) {
    const auto& r = matrix.rows[k];
    return r.empty() ? -2.0 : *std::max_element(r.begin(), r.end());
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ma = row_max(a), mb = row_max(b);
    if (ma != mb) return ma > mb;
    return matrix.visual_ids[a] < matrix.visual_ids[b];
  });

  for (const auto k : order) {
    const auto& row = matrix.rows[k];
    if (row.empty()) {
      plan.dropped.push_back(matrix.visual_ids[k]);
      if (diagnostics) diagnostics->warn("visual " + matrix.visual_ids[k] + " dropped: article has no paragraphs");
      continue;
    }
    const auto best = matrix.argmax(k);
    if (check_flow_constraints(matrix, k, best, plan, capacity).satisfied()) {
      plan.assignments.push_back({matrix.visual_ids[k], best, row[best], false});
      continue;
    }
    std::vector<std::size_t> candidates(row.size());
    std::iota(candidates.begin(), candidates.end(), 0);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    bool placed = false;
    for (const auto pos : candidates) {
      if (pos == best || !check_flow_constraints(matrix, k, pos, plan, capacity).satisfied()) continue;
      plan.assignments.push_back({matrix.visual_ids[k], pos, row[pos], true});
      placed = true;
      break;
    }
    if (!placed) {
      plan.dropped.push_back(matrix.visual_ids[k]);
      if (diagnostics) diagnostics->warn("visual " + matrix.visual_ids[k] + " dropped: no position satisfies the flow constraints");
    }
  }
  return plan;
}

std::vector<SectionText> insert_visuals(std::span<const SectionText> article, const PlacementPlan& plan,
                                        const KnowledgeBase& kb,
                                        const std::optional<std::filesystem::path>& asset_root) {
  std::vector<SectionText> out(article.begin(), article.end());
  const auto map = paragraph_index_map(article);
  for (const auto& a : plan.assignments) {
    if (a.paragraph_index >= map.size()) {
      throw Error(ErrorKind::InvalidArgument, "assignment for " + a.visual_id + " points past the last paragraph");
    }
    const VisualElement* v = kb.find_visual(a.visual_id);
    if (!v) throw Error(ErrorKind::InvalidArgument, "placed visual " + a.visual_id + " is not in the KB");
    if (asset_root) {
      std::filesystem::path path(v->asset_path);
      if (path.is_relative()) path = *asset_root / path;
      if (!std::filesystem::is_regular_file(path)) {
        throw Error(ErrorKind::DanglingAsset, a.visual_id + ": asset " + path.string() + " does not exist");
      }
    }
    const auto ref = map[a.paragraph_index];
    out[ref.section].paragraphs[ref.paragraph].figures.push_back({v->visual_id, v->kind, v->asset_path, v->caption, a.score});
  }
  for (auto& s : out) {
    for (auto& p : s.paragraphs) {
      std::stable_sort(p.figures.begin(), p.figures.end(), [](const FigureBlock& x, const FigureBlock& y) {
        return x.score != y.score ? x.score > y.score : x.visual_id < y.visual_id;
      });
    }
  }
  return out;
}

}  // namespace deepwriter
