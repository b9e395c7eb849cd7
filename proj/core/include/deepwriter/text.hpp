#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace deepwriter {

/// Half-open byte range [begin, end) into some text.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const TextSpan&) const = default;
};

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
/// Collapses whitespace runs into single spaces and trims both ends.
std::string normalize_whitespace(std::string_view s);

bool is_space(char c) noexcept;
bool is_sentence_terminator(char c) noexcept;

// UTF-8 helpers. Lengths that matter to users ("30% of the section") are
// counted in code points; cuts never split a multi-byte sequence.
std::size_t utf8_length(std::string_view s) noexcept;
/// Largest byte offset <= pos that starts a code point (or equals s.size()).
std::size_t utf8_floor(std::string_view s, std::size_t pos) noexcept;
/// Byte offset just past the first `chars` code points.
std::size_t utf8_offset(std::string_view s, std::size_t chars) noexcept;

/// Sentence segmentation: a sentence ends at one of . ! ? ; that is followed
/// by whitespace, or at end of text. Spans exclude surrounding whitespace.
std::vector<TextSpan> sentence_spans(std::string_view text);

/// Offsets where a new sentence may begin: just past a terminator and the
/// whitespace run that follows it. Always strictly inside (0, text.size()].
std::vector<std::size_t> sentence_breaks(std::string_view text);

/// Lowercased word tokens (ASCII alphanumerics plus any non-ASCII byte).
std::vector<std::string> words(std::string_view text);

std::set<std::string> word_trigrams(std::string_view text);
/// Jaccard similarity of word-trigram sets; 0 when both sets are empty.
double trigram_jaccard(std::string_view a, std::string_view b);

/// Splits on blank lines. Lines inside a paragraph are trimmed and joined by
/// single spaces; empty paragraphs are dropped.
std::vector<std::string> split_paragraphs(std::string_view text);

std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace deepwriter
