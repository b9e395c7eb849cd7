#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "deepwriter/ingestion.hpp"
#include "deepwriter/text.hpp"

namespace fs = std::filesystem;

namespace dwtest {

fs::path fixture_dir() { return fs::path(DEEPWRITER_FIXTURE_DIR); }

TempDir::TempDir(const std::string& prefix) {
  static std::mt19937_64 rng(std::random_device{}());
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() / (prefix + "-" + std::to_string(rng() % 100000000));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create a temp directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

double oracle_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i], y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  double c = dot / (std::sqrt(na) * std::sqrt(nb));
  if (c > 1) c = 1;
  if (c < -1) c = -1;
  return c;
}

std::vector<OracleHit> brute_force_top_k(const std::vector<float>& query, const deepwriter::KnowledgeBase& kb,
                                         std::size_t k, std::optional<deepwriter::HitKind> kind) {
  std::vector<OracleHit> all;
  if (!kind || *kind == deepwriter::HitKind::Text) {
    for (const auto& c : kb.chunks()) {
      if (c.embedding) all.push_back({c.chunk_id, oracle_cosine(query, *c.embedding)});
    }
  }
  if (!kind || *kind == deepwriter::HitKind::Visual) {
    for (const auto& v : kb.visuals()) {
      if (v.embedding) all.push_back({v.visual_id, oracle_cosine(query, *v.embedding)});
    }
  }
  std::sort(all.begin(), all.end(), [](const OracleHit& a, const OracleHit& b) {
    if (a.score > b.score) return true;
    if (a.score < b.score) return false;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

std::vector<float> random_unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0;
  do {
    norm = 0;
    for (auto& x : v) {
      x = gauss(rng);
      norm += x * x;
    }
  } while (norm == 0);
  norm = std::sqrt(norm);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

namespace {

std::string padded(char prefix, std::size_t n) {
  auto s = std::to_string(n);
  return prefix + std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

}  // namespace

deepwriter::KnowledgeBase random_kb(std::mt19937_64& rng, std::size_t chunks, std::size_t visuals, std::size_t dim) {
  deepwriter::KnowledgeBaseParts parts;
  parts.documents.push_back({"doc", "doc.pdf", "doc", std::nullopt, {}, 1});
  parts.pages.push_back({"doc", 1, 600, 800, "page"});
  parts.manifest.embedding_dim = dim;

  // Ids are shuffled against storage order so the index cannot lean on it.
  std::vector<std::size_t> chunk_ids(chunks), visual_ids(visuals);
  std::iota(chunk_ids.begin(), chunk_ids.end(), 1);
  std::iota(visual_ids.begin(), visual_ids.end(), 1);
  std::shuffle(chunk_ids.begin(), chunk_ids.end(), rng);
  std::shuffle(visual_ids.begin(), visual_ids.end(), rng);

  std::vector<std::vector<float>> pool;
  const auto vector_for = [&]() {
    // One in five items reuses an earlier vector to force exact ties.
    if (!pool.empty() && rng() % 5 == 0) return pool[rng() % pool.size()];
    pool.push_back(random_unit_vector(rng, dim));
    return pool.back();
  };

  for (std::size_t i = 0; i < chunks; ++i) {
    deepwriter::Chunk c;
    c.chunk_id = padded('c', chunk_ids[i]);
    c.doc_id = "doc";
    c.page_no = 1;
    c.para_index = static_cast<int>(i);
    c.text = "chunk " + c.chunk_id;
    c.sentence_spans = {{0, c.text.size()}};
    c.embedding = vector_for();
    parts.chunks.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < visuals; ++i) {
    deepwriter::VisualElement v;
    v.visual_id = padded('v', visual_ids[i]);
    v.doc_id = "doc";
    v.page_no = 1;
    v.kind = deepwriter::VisualKind::Chart;
    v.bbox = {10, 10, 100, 100};
    v.asset_path = "assets/" + v.visual_id + ".png";
    v.caption = "visual " + v.visual_id;
    v.embedding = vector_for();
    parts.visuals.push_back(std::move(v));
  }
  return deepwriter::KnowledgeBase(std::move(parts));
}

deepwriter::KnowledgeBase kb_from_texts(const std::vector<std::string>& chunk_texts,
                                        const std::vector<std::string>& captions,
                                        deepwriter::EmbeddingBackend& embedder) {
  deepwriter::KnowledgeBaseParts parts;
  parts.documents.push_back({"report", "report.pdf", "report", std::nullopt, {}, 1});
  std::string page_text;
  for (const auto& t : chunk_texts) page_text += (page_text.empty() ? "" : "\n\n") + t;
  parts.pages.push_back({"report", 1, 612, 792, page_text});
  std::vector<deepwriter::EmbedInput> inputs;
  for (std::size_t i = 0; i < chunk_texts.size(); ++i) {
    deepwriter::Chunk c;
    c.chunk_id = padded('c', i + 1);
    c.doc_id = "report";
    c.page_no = 1;
    c.para_index = static_cast<int>(i);
    c.text = chunk_texts[i];
    c.sentence_spans = deepwriter::sentence_spans(c.text);
    c.bbox = deepwriter::BoundingBox{72, 72.0 + 10 * i, 540, 80.0 + 10 * i};
    parts.chunks.push_back(std::move(c));
    inputs.push_back(deepwriter::EmbedInput::text(chunk_texts[i]));
  }
  for (std::size_t i = 0; i < captions.size(); ++i) {
    deepwriter::VisualElement v;
    v.visual_id = padded('v', i + 1);
    v.doc_id = "report";
    v.page_no = 1;
    v.kind = i % 2 ? deepwriter::VisualKind::Image : deepwriter::VisualKind::Chart;
    v.bbox = {100, 400, 500, 600};
    v.asset_path = "assets/" + v.visual_id + ".png";
    v.caption = captions[i];
    parts.visuals.push_back(std::move(v));
    inputs.push_back(deepwriter::EmbedInput::text(captions[i]));
  }
  if (!inputs.empty()) {
    auto vectors = deepwriter::embed(inputs, embedder);
    parts.manifest.embedding_dim = vectors.front().size();
    std::size_t k = 0;
    for (auto& c : parts.chunks) c.embedding = vectors[k++];
    for (auto& v : parts.visuals) v.embedding = vectors[k++];
  }
  return deepwriter::KnowledgeBase(std::move(parts));
}

// ---------------------------------------------------------------------------

namespace {

std::size_t row_argmax(const std::vector<double>& row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}

double row_max(const std::vector<double>& row) {
  double m = -2;
  for (double x : row) m = std::max(m, x);
  return m;
}

bool position_allowed(const PlacementInstance& inst, std::size_t v, std::size_t pos) {
  if (!inst.adjacency[v]) return true;
  const auto best = row_argmax(inst.rows[v]);
  return pos == best || pos + 1 == best;
}

}  // namespace

OraclePlan oracle_greedy(const PlacementInstance& inst) {
  OraclePlan plan;
  const std::size_t n = inst.ids.size();
  std::vector<bool> done(n, false);
  const std::size_t paragraphs = n == 0 ? 0 : inst.rows[0].size();
  std::vector<std::size_t> load(paragraphs, 0);

  for (std::size_t round = 0; round < n; ++round) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v]) continue;
      if (pick == n) {
        pick = v;
        continue;
      }
      const double mv = row_max(inst.rows[v]), mp = row_max(inst.rows[pick]);
      if (mv > mp || (mv == mp && inst.ids[v] < inst.ids[pick])) pick = v;
    }
    done[pick] = true;

    const auto& row = inst.rows[pick];
    std::optional<std::size_t> chosen;
    for (std::size_t pos = 0; pos < row.size(); ++pos) {
      if (load[pos] >= inst.capacity || !position_allowed(inst, pick, pos)) continue;
      if (!chosen || row[pos] > row[*chosen]) chosen = pos;
    }
    if (!chosen) {
      plan.dropped.push_back(inst.ids[pick]);
      continue;
    }
    ++load[*chosen];
    plan.placed.push_back({inst.ids[pick], *chosen, row[*chosen], *chosen != row_argmax(row)});
  }
  return plan;
}

bool oracle_feasible(const PlacementInstance& inst, const std::vector<std::pair<std::size_t, std::size_t>>& plan) {
  const std::size_t paragraphs = inst.rows.empty() ? 0 : inst.rows[0].size();
  std::vector<std::size_t> load(paragraphs, 0);
  for (const auto& [v, pos] : plan) {
    if (pos >= paragraphs) return false;
    if (++load[pos] > inst.capacity) return false;
    if (!position_allowed(inst, v, pos)) return false;
  }
  return true;
}

bool single_swap_optimal(const PlacementInstance& inst, const OraclePlan& plan, std::string* why) {
  const auto index_of = [&](const std::string& id) {
    return static_cast<std::size_t>(std::find(inst.ids.begin(), inst.ids.end(), id) - inst.ids.begin());
  };
  std::vector<std::pair<std::size_t, std::size_t>> base;
  double total = 0;
  for (const auto& p : plan.placed) {
    base.emplace_back(index_of(p.id), p.pos);
    total += inst.rows[index_of(p.id)][p.pos];
  }
  if (!oracle_feasible(inst, base)) {
    if (why) *why = "plan itself is infeasible";
    return false;
  }
  const std::size_t paragraphs = inst.rows.empty() ? 0 : inst.rows[0].size();
  const double eps = 1e-12;

  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t pos = 0; pos < paragraphs; ++pos) {
      if (pos == base[i].second) continue;
      auto moved = base;
      moved[i].second = pos;
      if (!oracle_feasible(inst, moved)) continue;
      const double gain = inst.rows[base[i].first][pos] - inst.rows[base[i].first][base[i].second];
      if (gain > eps) {
        if (why) *why = "moving " + inst.ids[base[i].first] + " to " + std::to_string(pos) + " gains";
        return false;
      }
    }
  }
  for (const auto& id : plan.dropped) {
    const auto v = index_of(id);
    for (std::size_t pos = 0; pos < paragraphs; ++pos) {
      auto added = base;
      added.emplace_back(v, pos);
      if (oracle_feasible(inst, added)) {
        if (why) *why = "dropped " + id + " fits at " + std::to_string(pos);
        return false;
      }
    }
  }
  return true;
}

PlacementInstance random_placement_instance(std::mt19937_64& rng, std::size_t max_visuals,
                                            std::size_t max_paragraphs) {
  PlacementInstance inst;
  const std::size_t visuals = 1 + rng() % max_visuals;
  const std::size_t paragraphs = 1 + rng() % max_paragraphs;
  inst.capacity = 1 + rng() % 2;
  // Scores on a coarse grid so ties in both rows and row maxima are common.
  std::uniform_int_distribution<int> grid(-10, 20);
  for (std::size_t v = 0; v < visuals; ++v) {
    inst.ids.push_back(padded('v', 1 + rng() % 50) + "-" + std::to_string(v));
    inst.adjacency.push_back(rng() % 2 == 0);
    std::vector<double> row(paragraphs);
    for (auto& x : row) x = grid(rng) / 20.0;
    inst.rows.push_back(std::move(row));
  }
  return inst;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> first_gap(std::size_t length, const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  std::vector<bool> covered(length, false);
  for (const auto& [b, e] : ranges) {
    for (std::size_t i = b; i < e && i < length; ++i) covered[i] = true;
  }
  for (std::size_t i = 0; i < length; ++i) {
    if (!covered[i]) return i;
  }
  return std::nullopt;
}

std::string random_word(std::mt19937_64& rng) {
  const std::size_t len = 3 + rng() % 7;
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w += static_cast<char>('a' + rng() % 26);
  return w;
}

std::string random_page_text(std::mt19937_64& rng, std::size_t approx_chars) {
  static const char* terminators[] = {".", "!", "?", ";", ","};
  std::string text;
  while (text.size() < approx_chars) {
    if (!text.empty()) text += (rng() % 6 == 0) ? "\n\n" : " ";
    // Mostly short sentences, occasionally one far longer than any chunk.
    const std::size_t words = rng() % 25 == 0 ? 150 + rng() % 200 : 3 + rng() % 30;
    for (std::size_t w = 0; w < words; ++w) {
      if (w) text += ' ';
      text += random_word(rng);
      if (rng() % 17 == 0) text += "3.5";
    }
    text += terminators[rng() % 5];
  }
  return text;
}

deepwriter::KnowledgeBase fixture_kb(deepwriter::EmbeddingBackend& embedder) {
  std::vector<deepwriter::ExtractionInterchange> docs;
  for (const char* f : {"digital_trade_2023.json", "energy_outlook_2022.json", "wtr2021.json"}) {
    docs.push_back(deepwriter::load_interchange(fixture_dir() / "corpus" / f));
  }
  auto captioner = deepwriter::ScriptedCaptioner::from_file(fixture_dir() / "captions.json");
  deepwriter::Diagnostics diag;
  return deepwriter::build_kb(docs, deepwriter::ChunkingPolicy{240, 100, 40}, embedder, captioner, diag);
}

}  // namespace dwtest
