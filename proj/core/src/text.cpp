#include "deepwriter/text.hpp"

#include <algorithm>
#include <cctype>

namespace deepwriter {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_sentence_terminator(char c) noexcept {
  return c == '.' || c == '!' || c == '?' || c == ';';
}

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

namespace {
bool is_continuation(unsigned char c) noexcept { return (c & 0xC0) == 0x80; }
}  // namespace

std::size_t utf8_length(std::string_view s) noexcept {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return !is_continuation(static_cast<unsigned char>(c)); }));
}

std::size_t utf8_floor(std::string_view s, std::size_t pos) noexcept {
  if (pos >= s.size()) return s.size();
  while (pos > 0 && is_continuation(static_cast<unsigned char>(s[pos]))) --pos;
  return pos;
}

std::size_t utf8_offset(std::string_view s, std::size_t chars) noexcept {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(s[i]))) continue;
    if (seen == chars) return i;
    ++seen;
  }
  return s.size();
}

std::vector<TextSpan> sentence_spans(std::string_view text) {
  std::vector<TextSpan> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    const std::size_t begin = i;
    std::size_t end = n;
    for (; i < n; ++i) {
      if (is_sentence_terminator(text[i]) && i + 1 < n && is_space(text[i + 1])) {
        end = i + 1;
        ++i;
        break;
      }
    }
    if (end == n) {
      while (end > begin && is_space(text[end - 1])) --end;
      i = n;
    }
    spans.push_back({begin, end});
  }
  return spans;
}

std::vector<std::size_t> sentence_breaks(std::string_view text) {
  std::vector<std::size_t> breaks;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!is_sentence_terminator(text[i]) || !is_space(text[i + 1])) continue;
    std::size_t j = i + 1;
    while (j < n && is_space(text[j])) ++j;
    breaks.push_back(j);
    i = j - 1;
  }
  if (n > 0 && (breaks.empty() || breaks.back() != n)) breaks.push_back(n);
  return breaks;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::set<std::string> word_trigrams(std::string_view text) {
  const auto w = words(text);
  std::set<std::string> grams;
  for (std::size_t i = 0; i + 2 < w.size(); ++i) {
    grams.insert(w[i] + ' ' + w[i + 1] + ' ' + w[i + 2]);
  }
  return grams;
}

double trigram_jaccard(std::string_view a, std::string_view b) {
  const auto ga = word_trigrams(a);
  const auto gb = word_trigrams(b);
  if (ga.empty() && gb.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& g : ga) common += gb.count(g);
  const std::size_t uni = ga.size() + gb.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> paragraphs;
  std::string current;
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (line.empty()) {
      if (!current.empty()) paragraphs.push_back(std::move(current));
      current.clear();
      continue;
    }
    if (!current.empty()) current.push_back(' ');
    current.append(line);
  }
  if (!current.empty()) paragraphs.push_back(std::move(current));
  return paragraphs;
}

}  // namespace deepwriter
