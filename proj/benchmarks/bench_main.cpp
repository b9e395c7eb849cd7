#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "deepwriter/index.hpp"
#include "deepwriter/ingestion.hpp"
#include "deepwriter/placement.hpp"

using namespace deepwriter;

namespace {

std::vector<float> unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<float> normal;
  std::vector<float> v(dim);
  double norm = 0;
  for (auto& x : v) {
    x = normal(rng);
    norm += static_cast<double>(x) * x;
  }
  for (auto& x : v) x = static_cast<float>(x / std::sqrt(norm));
  return v;
}

KnowledgeBase synthetic_kb(std::size_t items, std::size_t dim) {
  std::mt19937_64 rng(1);
  KnowledgeBaseParts parts;
  parts.documents.push_back({"doc", "doc.pdf", "Doc", {}, {}, 1});
  for (std::size_t i = 0; i < items; ++i) {
    Chunk c;
    c.chunk_id = "c" + std::to_string(i);
    c.doc_id = "doc";
    c.embedding = unit_vector(rng, dim);
    parts.chunks.push_back(std::move(c));
  }
  return KnowledgeBase(std::move(parts));
}

void BM_TopK(benchmark::State& state) {
  const auto items = static_cast<std::size_t>(state.range(0));
  const auto dim = static_cast<std::size_t>(state.range(1));
  const auto kb = synthetic_kb(items, dim);
  std::mt19937_64 rng(2);
  const auto query = unit_vector(rng, dim);
  for (auto _ : state) benchmark::DoNotOptimize(top_k(query, kb, 8));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(items));
}
BENCHMARK(BM_TopK)->Args({500, 64})->Args({5000, 256})->Args({50000, 256});

void BM_OptimizePlacement(benchmark::State& state) {
  const auto visuals = static_cast<std::size_t>(state.range(0));
  const auto paragraphs = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> score(-0.2, 1.0);
  RelevanceMatrix m;
  for (std::size_t i = 0; i < paragraphs; ++i) m.paragraphs.push_back({0, i});
  for (std::size_t k = 0; k < visuals; ++k) {
    m.visual_ids.push_back("v" + std::to_string(k));
    m.kinds.push_back(k % 3 == 0 ? VisualKind::Image : VisualKind::Chart);
    std::vector<double> row(paragraphs);
    for (auto& x : row) x = score(rng);
    m.rows.push_back(std::move(row));
  }
  for (auto _ : state) benchmark::DoNotOptimize(optimize_placement(m, 2));
}
BENCHMARK(BM_OptimizePlacement)->Args({5, 8})->Args({20, 60})->Args({100, 400});

void BM_ChunkPage(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string text;
  while (text.size() < static_cast<std::size_t>(state.range(0))) {
    for (int w = 0, n = 5 + static_cast<int>(rng() % 20); w < n; ++w) {
      for (int c = 0, len = 2 + static_cast<int>(rng() % 8); c < len; ++c) text += static_cast<char>(letter(rng));
      text += ' ';
    }
    text.back() = '.';
    text += ' ';
  }
  const ChunkingPolicy policy{1200, 200, 100};
  for (auto _ : state) benchmark::DoNotOptimize(chunk_page(text, policy));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ChunkPage)->Arg(4000)->Arg(40000)->Arg(400000);

}  // namespace

BENCHMARK_MAIN();
