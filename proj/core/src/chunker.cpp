#include <algorithm>

#include "deepwriter/error.hpp"
#include "deepwriter/ingestion.hpp"

namespace deepwriter {

void ChunkingPolicy::validate() const {
  if (target_chars == 0 || min_chars == 0) {
    throw Error(ErrorKind::InvalidArgument, "chunk sizes must be positive");
  }
  if (min_chars > target_chars) throw Error(ErrorKind::InvalidArgument, "min_chars exceeds target_chars");
  if (overlap_chars >= min_chars) throw Error(ErrorKind::InvalidArgument, "overlap_chars must be below min_chars");
}

namespace {

// First position in [lo, hi) where a word starts after whitespace.
std::optional<std::size_t> first_word_start(std::string_view text, std::size_t lo, std::size_t hi) {
  for (std::size_t p = std::max<std::size_t>(lo, 1); p < hi; ++p) {
    if (is_space(text[p - 1]) && !is_space(text[p])) return p;
  }
  return std::nullopt;
}

std::optional<std::size_t> last_word_start(std::string_view text, std::size_t lo, std::size_t hi) {
  for (std::size_t p = hi; p >= std::max<std::size_t>(lo, 1); --p) {
    if (p < text.size() && is_space(text[p - 1]) && !is_space(text[p])) return p;
  }
  return std::nullopt;
}

}  // namespace

std::vector<PageChunk> chunk_page(std::string_view text, const ChunkingPolicy& policy) {
  policy.validate();
  std::vector<PageChunk> chunks;
  const std::size_t n = text.size();
  if (n == 0) return chunks;

  const auto breaks = sentence_breaks(text);
  const std::size_t slack = policy.slack_chars();
  std::size_t start = 0;

  while (true) {
    if (n - start <= policy.target_chars) {
      chunks.push_back({std::string(text.substr(start)), {start, n}});
      break;
    }
    const std::size_t lo = start + policy.min_chars;
    const std::size_t hi = start + policy.target_chars;
    const std::size_t slack_hi = std::min(n, hi + slack);

    std::optional<std::size_t> end;
    // Latest sentence end inside [lo, hi], else the earliest one in (hi, slack_hi].
    auto it = std::upper_bound(breaks.begin(), breaks.end(), hi);
    if (it != breaks.begin() && *std::prev(it) >= lo) {
      end = *std::prev(it);
    } else if (it != breaks.end() && *it <= slack_hi) {
      end = *it;
    }
    if (!end) end = last_word_start(text, lo, hi);
    if (!end) end = std::max(utf8_floor(text, hi), start + 1);

    if (n - *end < policy.min_chars && n - start <= policy.target_chars + slack) end = n;

    chunks.push_back({std::string(text.substr(start, *end - start)), {start, *end}});
    if (*end == n) break;

    // Next chunk re-reads up to overlap_chars, starting at a sentence or word
    // start inside the overlap window when one exists.
    const std::size_t window = std::min(policy.overlap_chars, *end - start - 1);
    const std::size_t next = *end - window;
    std::size_t snapped = next;
    auto b = std::lower_bound(breaks.begin(), breaks.end(), next);
    if (b != breaks.end() && *b < *end) {
      snapped = *b;
    } else if (auto w = first_word_start(text, next, *end)) {
      snapped = *w;
    } else {
      snapped = utf8_floor(text, next);
    }
    start = std::max(snapped, start + 1);
  }
  return chunks;
}

}  // namespace deepwriter
