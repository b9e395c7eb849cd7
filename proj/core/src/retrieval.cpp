#include "deepwriter/retrieval.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"

namespace deepwriter {

namespace {

std::optional<std::size_t> kb_dim(const KnowledgeBase& kb) {
  if (kb.manifest().embedding_dim == 0) return std::nullopt;
  return kb.manifest().embedding_dim;
}

bool has_embedded_visual(const KnowledgeBase& kb) {
  return std::any_of(kb.visuals().begin(), kb.visuals().end(),
                     [](const VisualElement& v) { return v.embedding.has_value(); });
}

std::string canonical_name(std::string_view s) {
  std::string out = normalize_whitespace(to_lower(s));
  std::string_view view = out;
  const auto strip = [](char c) { return c == '"' || c == '\'' || c == '*' || c == '`' || c == '.'; };
  while (!view.empty() && (strip(view.front()) || view.front() == ' ')) view.remove_prefix(1);
  while (!view.empty() && (strip(view.back()) || view.back() == ' ')) view.remove_suffix(1);
  return std::string(view);
}

std::map<std::string, double> best_scores(std::span<const RetrievalBundle> bundles, bool visual) {
  std::map<std::string, double> best;
  for (const auto& b : bundles) {
    for (const auto& hit : visual ? b.visual_hits : b.text_hits) {
      auto [it, inserted] = best.emplace(hit.item_id, hit.score);
      if (!inserted && hit.score > it->second) it->second = hit.score;
    }
  }
  return best;
}

template <class Item>
bool by_score(const Item& a, const Item& b, std::string_view id_a, std::string_view id_b) {
  if (a.score != b.score) return a.score > b.score;
  return id_a < id_b;
}

class SectionClassifier {
 public:
  SectionClassifier(const SectionPlan& plan, Gateway& gateway, EmbeddingBackend& embedder,
                    std::optional<std::size_t> dim, std::string_view rewritten, Diagnostics* diagnostics)
      : plan_(plan), gateway_(gateway), embedder_(embedder), dim_(dim), rewritten_(rewritten),
        diagnostics_(diagnostics) {
    for (const auto& t : plan.titles) sections_ += (sections_.empty() ? "" : "\n") + t;
  }

  std::size_t classify(const std::string& item_id, std::string_view text,
                       const std::optional<EmbeddingVector>& embedding) {
    const auto reply =
        gateway_.complete(TemplateName::Cluster, {{"query", std::string(rewritten_)},
                                                  {"doc", normalize_whitespace(text)},
                                                  {"sections", sections_}});
    for (std::size_t i = 0; i < plan_.titles.size(); ++i) {
      if (section_name_matches(reply, plan_.titles[i])) return i;
    }
    const auto chosen = closest_title(embedding ? *embedding : embed_text(text, embedder_, dim_));
    if (diagnostics_) {
      diagnostics_->warn("cluster reply for " + item_id + " names no planned section; assigned to \"" +
                         plan_.titles[chosen] + "\" by similarity");
    }
    return chosen;
  }

 private:
  std::size_t closest_title(const EmbeddingVector& v) {
    if (title_vectors_.empty()) {
      std::vector<EmbedInput> inputs;
      for (const auto& t : plan_.titles) inputs.push_back(EmbedInput::text(t));
      title_vectors_ = embed(inputs, embedder_, dim_);
    }
    std::size_t best = 0;
    double best_score = -2;
    for (std::size_t i = 0; i < title_vectors_.size(); ++i) {
      const double s = cosine(v, title_vectors_[i]);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return best;
  }

  const SectionPlan& plan_;
  Gateway& gateway_;
  EmbeddingBackend& embedder_;
  std::optional<std::size_t> dim_;
  std::string_view rewritten_;
  Diagnostics* diagnostics_;
  std::string sections_;
  std::vector<EmbeddingVector> title_vectors_;
};

}  // namespace

nlohmann::json to_json(const SectionContext& ctx) {
  nlohmann::json chunks = nlohmann::json::array();
  for (const auto& c : ctx.chunks) chunks.push_back({{"chunk_id", c.chunk->chunk_id}, {"score", c.score}});
  nlohmann::json visuals = nlohmann::json::array();
  for (const auto& v : ctx.visuals) visuals.push_back({{"visual_id", v.visual->visual_id}, {"score", v.score}});
  return {{"section_title", ctx.section_title}, {"chunks", chunks}, {"visuals", visuals}};
}

RetrievalBundle retrieve(const Subtask& subtask, const KnowledgeBase& kb, EmbeddingBackend& embedder,
                         const RetrievalLimits& limits) {
  if (limits.k_text == 0 || limits.k_visual == 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  const auto query = embed_text(subtask.text, embedder, kb_dim(kb));
  RetrievalBundle bundle;
  bundle.subtask_id = subtask.id;
  bundle.text_hits = top_k(query, kb, limits.k_text, HitKind::Text);
  if (subtask.wants_visuals && has_embedded_visual(kb)) {
    bundle.visual_hits = top_k(query, kb, limits.k_visual, HitKind::Visual);
  }
  return bundle;
}

bool section_name_matches(std::string_view response, std::string_view title) {
  const auto r = canonical_name(response);
  return !r.empty() && r == canonical_name(title);
}

std::vector<SectionContext> cluster(std::span<const RetrievalBundle> bundles, const SectionPlan& plan,
                                    Gateway& gateway, const KnowledgeBase& kb, EmbeddingBackend& embedder,
                                    std::string_view rewritten, Diagnostics* diagnostics) {
  if (plan.titles.empty()) throw Error(ErrorKind::InvalidArgument, "cluster needs a non-empty plan");

  std::vector<SectionContext> sections;
  for (const auto& t : plan.titles) sections.push_back({t, {}, {}});
  SectionClassifier classifier(plan, gateway, embedder, kb_dim(kb), rewritten, diagnostics);

  for (const auto& [id, score] : best_scores(bundles, false)) {
    const Chunk* chunk = kb.find_chunk(id);
    if (!chunk) throw Error(ErrorKind::InvalidArgument, "retrieved chunk " + id + " is not in the KB");
    sections[classifier.classify(id, chunk->text, chunk->embedding)].chunks.push_back({chunk, score});
  }
  for (const auto& [id, score] : best_scores(bundles, true)) {
    const VisualElement* visual = kb.find_visual(id);
    if (!visual) throw Error(ErrorKind::InvalidArgument, "retrieved visual " + id + " is not in the KB");
    sections[classifier.classify(id, visual->caption, visual->embedding)].visuals.push_back({visual, score});
  }

  for (auto& s : sections) {
    std::sort(s.chunks.begin(), s.chunks.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
      return by_score(a, b, a.chunk->chunk_id, b.chunk->chunk_id);
    });
    std::sort(s.visuals.begin(), s.visuals.end(), [](const ScoredVisual& a, const ScoredVisual& b) {
      return by_score(a, b, a.visual->visual_id, b.visual->visual_id);
    });
  }
  return sections;
}

}  // namespace deepwriter
