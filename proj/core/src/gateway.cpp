#include "deepwriter/gateway.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

#include <nlohmann/json.hpp>

#include "deepwriter/digest.hpp"
#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"
#include "http_transport.hpp"

namespace deepwriter {

using nlohmann::json;

std::string complete(const std::string& prompt, ChatBackend& backend, const GenParams& params,
                     const RetryPolicy& retry, std::vector<ChatExchange>* transcript) {
  auto reply = with_retries(retry, [&] { return backend.complete(prompt, params); });
  if (trim(reply.text).empty()) {
    throw Error(ErrorKind::EmptyResponse, "backend " + backend.id() + " returned an empty response");
  }
  if (transcript) transcript->push_back({prompt, reply.text, backend.id(), reply.usage});
  return reply.text;
}

std::string Gateway::complete(const std::string& prompt) {
  std::vector<ChatExchange> local;
  auto text = deepwriter::complete(prompt, backend_, params_, retry_, &local);
  std::lock_guard lock(mutex_);
  transcript_.insert(transcript_.end(), local.begin(), local.end());
  return text;
}

std::vector<ChatExchange> Gateway::transcript() const {
  std::lock_guard lock(mutex_);
  return transcript_;
}

// --- scripted -----------------------------------------------------------------

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path, Match match, ChatBackend* fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read scripted fixture " + path.string());
  try {
    return ScriptedBackend(json::parse(in).get<std::map<std::string, std::string>>(), match, fallback);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "scripted fixture must map digests to strings: " + std::string(e.what()));
  }
}

std::string ScriptedBackend::digest(std::string_view prompt, Match match) {
  return match == Match::Strict ? sha256_hex(prompt) : sha256_hex(normalize_whitespace(prompt));
}

ChatReply ScriptedBackend::complete(const std::string& prompt, const GenParams& params) {
  if (auto it = responses_.find(digest(prompt, Match::Strict)); it != responses_.end()) return {it->second, {}};
  if (match_ == Match::Fuzzy) {
    if (auto it = responses_.find(digest(prompt, Match::Fuzzy)); it != responses_.end()) return {it->second, {}};
  }
  if (fallback_) return fallback_->complete(prompt, params);
  throw Error(ErrorKind::EmptyResponse, "no scripted response for prompt digest " + digest(prompt, Match::Strict));
}

// --- extractive ---------------------------------------------------------------

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  s = trim(s);
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

// Text between `open` and the next `close` (or end of prompt).
std::string section(std::string_view prompt, std::string_view open, std::string_view close) {
  const auto a = prompt.find(open);
  if (a == std::string_view::npos) return {};
  const auto start = a + open.size();
  const auto b = prompt.find(close, start);
  return std::string(trim(prompt.substr(start, b == std::string_view::npos ? std::string_view::npos : b - start)));
}

struct DocLine {
  std::string id;
  std::string text;
};

std::vector<DocLine> doc_lines(std::string_view block) {
  static const std::regex kLine(R"(^\[([^\]\s]+)\]\s+(.*)$)");
  std::vector<DocLine> docs;
  for (auto line : split_lines(block)) {
    std::smatch m;
    const std::string s(trim(line));
    if (std::regex_match(s, m, kLine)) docs.push_back({m[1].str(), m[2].str()});
  }
  return docs;
}

std::vector<std::string> sentences_of(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& s : sentence_spans(text)) out.emplace_back(text.substr(s.begin, s.size()));
  return out;
}

std::string answer_content(std::string_view prompt) {
  const auto docs = doc_lines(section(prompt, "Relevant Documents:\n", "\n\nContent Already Written"));
  const auto written = section(prompt, "Content Already Written in Previous Sections:\n", "\n\nInstructions:");
  std::set<std::string> used;
  std::vector<std::string> paragraphs;
  for (const auto& doc : docs) {
    if (paragraphs.size() == 4) break;
    std::string paragraph;
    int taken = 0;
    for (const auto& s : sentences_of(doc.text)) {
      if (taken == 3) break;
      // Chunk overlaps can start mid-sentence; skip those fragments.
      if (s.empty() || (s.front() >= 'a' && s.front() <= 'z')) continue;
      if (words(s).size() < 4 || !used.insert(s).second) continue;
      if (written.find(s) != std::string::npos) continue;
      if (!paragraph.empty()) paragraph += ' ';
      paragraph += s + " [" + doc.id + "]";
      ++taken;
    }
    if (!paragraph.empty()) paragraphs.push_back(std::move(paragraph));
  }
  if (paragraphs.empty()) return "The available sources say little about this topic.";
  std::string out;
  for (const auto& p : paragraphs) out += (out.empty() ? "" : "\n\n") + p;
  return out;
}

std::string answer_draft(std::string_view prompt) {
  const auto docs = doc_lines(section(prompt, "Relevant Documents:\n", "\n\nInstructions:"));
  std::string draft;
  for (const auto& doc : docs) {
    const auto s = sentences_of(doc.text);
    if (s.empty()) continue;
    draft += (draft.empty() ? "" : " ") + s.front();
  }
  if (draft.empty()) draft = "Outline the topic briefly; little source material is available.";
  return "Cover the following points in order. " + draft;
}

// Crude stem: the first five bytes of a word.
std::set<std::string> stems(std::string_view text) {
  static const std::set<std::string> kStop = {"and", "the", "for", "with", "from", "into", "its", "their"};
  std::set<std::string> out;
  for (const auto& w : words(text)) {
    if (w.size() < 3 || kStop.count(w)) continue;
    out.insert(w.substr(0, 5));
  }
  return out;
}

// Picks the section whose title stems are best covered by the document.
std::string answer_cluster(std::string_view prompt) {
  const auto doc = section(prompt, "Document:\n", "\n\nAvailable sections:");
  const auto titles = section(prompt, "Available sections:\n", "\n\nInstructions:");
  std::vector<std::string> options;
  for (auto line : split_lines(titles)) {
    if (!trim(line).empty()) options.emplace_back(trim(line));
  }
  if (options.empty()) return "None";
  const auto vocab = stems(doc);
  std::size_t best = options.size();
  double best_cover = 0;
  for (std::size_t i = 0; i < options.size(); ++i) {
    const auto title = stems(options[i]);
    if (title.empty()) continue;
    std::size_t hit = 0;
    for (const auto& t : title) hit += vocab.count(t);
    const double cover = static_cast<double>(hit) / static_cast<double>(title.size());
    if (cover > best_cover) {
      best_cover = cover;
      best = i;
    }
  }
  if (best == options.size()) best = fnv1a64(doc) % options.size();
  return options[best];
}

std::string answer_summary(std::string_view prompt) {
  const auto doc = section(prompt, "Content to summarize:\n", "\n\nProvide your summary below");
  const auto budget = utf8_length(doc) / 4;
  std::string out;
  for (const auto& w : sentences_of(doc)) {
    const std::string candidate = out.empty() ? w : out + " " + w;
    if (utf8_length(candidate) > budget) break;
    out = candidate;
  }
  if (out.empty()) {
    // First sentence does not fit; keep as many words as the budget allows.
    for (const auto& w : words(doc)) {
      const std::string candidate = out.empty() ? w : out + " " + w;
      if (utf8_length(candidate) > budget) break;
      out = candidate;
    }
  }
  return out.empty() ? "None" : out;
}

}  // namespace

ChatReply ExtractiveBackend::complete(const std::string& prompt, const GenParams&) {
  if (ends_with(prompt, "Your rewritten query:")) {
    return {normalize_whitespace(section(prompt, "Query:\n", "\n\nYour rewritten query:")), {}};
  }
  if (prompt.find("Format your response as a numbered list of sub-queries only.") != std::string::npos) {
    const auto q = normalize_whitespace(section(prompt, "Query:\n", "\n\nPlease help me"));
    return {"1. What are the key facts about " + q + "\n2. What figures and statistics measure " + q +
                "\n3. What conclusions and viewpoints do the reports draw about " + q +
                "\n4. Which charts or tables show trends related to " + q,
            {}};
  }
  if (ends_with(prompt, "Your section titles:")) return {"Background\nAnalysis\nViewpoints", {}};
  if (ends_with(prompt, "Your classification (return only the section name):")) return {answer_cluster(prompt), {}};
  if (ends_with(prompt, "Provide your draft below:")) return {answer_draft(prompt), {}};
  if (starts_with(prompt, "You are an expert research writer tasked with generating high-quality content")) {
    return {answer_content(prompt), {}};
  }
  if (starts_with(prompt, "You are an expert summarizer.")) return {answer_summary(prompt), {}};
  if (prompt.find("###Score Rubrics:") != std::string::npos) return {"Score: 3", {}};
  throw Error(ErrorKind::EmptyResponse, "extractive backend has no rule for this prompt");
}

// --- http ---------------------------------------------------------------------

HttpChatBackend::HttpChatBackend(HttpChatConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw Error(ErrorKind::InvalidArgument, "chat backend URL is empty");
}

ChatReply HttpChatBackend::complete(const std::string& prompt, const GenParams& params) {
  const json body = {{"model", config_.model},
                     {"messages", {{{"role", "user"}, {"content", prompt}}}},
                     {"temperature", params.temperature},
                     {"max_tokens", params.max_tokens}};
  const auto response = http::post_json(config_.url, body.dump(), config_.api_key, config_.timeout_seconds);
  try {
    const auto j = json::parse(response);
    ChatReply reply;
    const auto& content = j.at("choices").at(0).at("message").at("content");
    reply.text = content.is_null() ? std::string() : content.get<std::string>();
    if (j.contains("usage") && j.at("usage").is_object()) {
      const auto& u = j.at("usage");
      reply.usage = TokenUsage{u.value("prompt_tokens", 0L), u.value("completion_tokens", 0L)};
    }
    return reply;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::BackendUnavailable, std::string("malformed chat response: ") + e.what());
  }
}

}  // namespace deepwriter
