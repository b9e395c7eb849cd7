#pragma once

#include <filesystem>

#include "deepwriter/corpus.hpp"

namespace deepwriter {

// On-disk layout:
//   manifest.json, documents.jsonl, pages.jsonl, chunks.jsonl, visuals.jsonl
// One JSON object per line; embeddings are JSON number arrays.

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& dir);
KnowledgeBase load_kb(const std::filesystem::path& dir);

}  // namespace deepwriter
