#include "deepwriter/citation.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <regex>
#include <set>

#include "deepwriter/error.hpp"
#include "deepwriter/placement.hpp"
#include "deepwriter/text.hpp"
#include "json_codec.hpp"

namespace deepwriter {

namespace {

constexpr std::string_view kCurrencySymbols[] = {"$", "\xE2\x82\xAC", "\xC2\xA3", "\xC2\xA5"};
const std::set<std::string> kCurrencyWords = {"usd", "dollar", "dollars", "euro", "euros", "eur"};

bool is_upper_ascii(char c) { return c >= 'A' && c <= 'Z'; }

std::string_view strip_punct(std::string_view token) {
  const auto keep = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80; };
  while (!token.empty() && !keep(token.front())) token.remove_prefix(1);
  while (!token.empty() && !keep(token.back())) token.remove_suffix(1);
  return token;
}

bool has_proper_noun_pair(std::string_view sentence) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    const auto start = i;
    while (i < sentence.size() && !is_space(sentence[i])) ++i;
    if (i > start) tokens.push_back(sentence.substr(start, i - start));
  }
  const auto capitalized = [](std::string_view t) {
    const auto w = strip_punct(t);
    return w.size() >= 2 && is_upper_ascii(w.front());
  };
  for (std::size_t k = 1; k + 1 < tokens.size(); ++k) {
    // A comma or similar between the two words breaks the pair.
    const auto first = tokens[k];
    if (!first.empty() && !std::isalnum(static_cast<unsigned char>(first.back()))) continue;
    if (capitalized(first) && capitalized(tokens[k + 1])) return true;
  }
  return false;
}

double set_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : a) shared += b.count(t);
  return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

std::string id_of(std::size_t n) {
  auto digits = std::to_string(n);
  return "cl" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

// Field presence each level requires of a source.
bool source_shape_matches(const CitationSource& s, CitationLevel level) {
  const bool chunked = s.page_no && s.chunk_id && s.para_index;
  switch (level) {
    case CitationLevel::Document: return !s.page_no && !s.chunk_id && !s.para_index && !s.sentence_index;
    case CitationLevel::Paragraph: return chunked && !s.sentence_index;
    case CitationLevel::Sentence: return chunked && s.sentence_index.has_value();
  }
  return false;
}

}  // namespace

std::string_view to_string(CitationLevel level) noexcept {
  switch (level) {
    case CitationLevel::Document: return "document";
    case CitationLevel::Paragraph: return "paragraph";
    case CitationLevel::Sentence: return "sentence";
  }
  return "document";
}

std::optional<CitationLevel> parse_citation_level(std::string_view s) noexcept {
  if (s == "document") return CitationLevel::Document;
  if (s == "paragraph") return CitationLevel::Paragraph;
  if (s == "sentence") return CitationLevel::Sentence;
  return std::nullopt;
}

nlohmann::json to_json(const CitationRecord& r) {
  nlohmann::json source = {{"doc_id", r.source.doc_id}, {"filename", r.source.filename}};
  if (r.source.page_no) source["page_no"] = *r.source.page_no;
  if (r.source.chunk_id) source["chunk_id"] = *r.source.chunk_id;
  if (r.source.para_index) source["para_index"] = *r.source.para_index;
  if (r.source.sentence_index) source["sentence_index"] = *r.source.sentence_index;
  if (r.source.bbox) source["bbox"] = bbox_to_json(*r.source.bbox);
  return {{"claim_id", r.claim_id},
          {"level", to_string(r.level)},
          {"reference", r.reference},
          {"score", r.score},
          {"source", source}};
}

CitationRecord citation_record_from_json(const nlohmann::json& j) {
  try {
    CitationRecord r;
    r.claim_id = j.at("claim_id").get<std::string>();
    const auto level = parse_citation_level(j.at("level").get<std::string>());
    if (!level) throw Error(ErrorKind::InvalidArgument, "unknown citation level in record " + r.claim_id);
    r.level = *level;
    r.reference = j.at("reference").get<std::string>();
    r.score = j.at("score").get<double>();
    const auto& s = j.at("source");
    r.source.doc_id = s.at("doc_id").get<std::string>();
    r.source.filename = s.at("filename").get<std::string>();
    if (s.contains("page_no")) r.source.page_no = s["page_no"].get<int>();
    if (s.contains("chunk_id")) r.source.chunk_id = s["chunk_id"].get<std::string>();
    if (s.contains("para_index")) r.source.para_index = s["para_index"].get<int>();
    if (s.contains("sentence_index")) r.source.sentence_index = s["sentence_index"].get<int>();
    if (s.contains("bbox")) r.source.bbox = bbox_from_json(s["bbox"]);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed citation record: ") + e.what());
  }
}

bool is_factual_sentence(std::string_view sentence) {
  if (std::any_of(sentence.begin(), sentence.end(), [](char c) { return c >= '0' && c <= '9'; })) return true;
  if (sentence.find('%') != std::string_view::npos) return true;
  for (const auto sym : kCurrencySymbols) {
    if (sentence.find(sym) != std::string_view::npos) return true;
  }
  for (const auto& w : words(sentence)) {
    if (kCurrencyWords.count(w)) return true;
  }
  return has_proper_noun_pair(sentence);
}

std::vector<Claim> extract_claims(std::span<const SectionText> article) {
  std::vector<Claim> claims;
  std::size_t global = 0;
  for (std::size_t s = 0; s < article.size(); ++s) {
    for (const auto& paragraph : article[s].paragraphs) {
      for (const auto& span : sentence_spans(paragraph.text)) {
        const auto text = paragraph.text.substr(span.begin, span.size());
        claims.push_back({id_of(claims.size() + 1), article[s].title, s, global, span, text, is_factual_sentence(text)});
      }
      ++global;
    }
  }
  return claims;
}

EmbeddingVector SourceScorer::embed_claim(std::string_view text) { return embed_text(text, embedder_, dim_); }

const SourceScorer::Cached& SourceScorer::cached(const Chunk& chunk) {
  if (auto it = cache_.find(chunk.chunk_id); it != cache_.end()) return it->second;
  Cached entry;
  std::vector<EmbedInput> inputs;
  if (!chunk.embedding) inputs.push_back(EmbedInput::text(chunk.text));
  for (std::size_t i = 0; i < chunk.sentence_spans.size(); ++i) inputs.push_back(EmbedInput::text(std::string(chunk.sentence(i))));
  auto vectors = inputs.empty() ? std::vector<EmbeddingVector>{} : embed(inputs, embedder_, dim_);
  std::size_t next = 0;
  entry.chunk = chunk.embedding ? *chunk.embedding : std::move(vectors[next++]);
  for (; next < vectors.size(); ++next) entry.sentences.push_back(std::move(vectors[next]));
  return cache_.emplace(chunk.chunk_id, std::move(entry)).first->second;
}

SourceScorer::Score SourceScorer::score(std::span<const float> claim, const Chunk& chunk) {
  const auto& c = cached(chunk);
  Score s;
  s.score = cosine(claim, c.chunk);
  for (std::size_t i = 0; i < c.sentences.size(); ++i) {
    const double v = cosine(claim, c.sentences[i]);
    if (!s.best_sentence || v > s.sentence_score) {
      s.best_sentence = i;
      s.sentence_score = v;
    }
  }
  if (s.best_sentence) s.score = std::max(s.score, s.sentence_score);
  return s;
}

SourceMatch find_source(std::span<const float> claim, std::span<const Chunk* const> supporting,
                        std::span<const Chunk* const> candidates, SourceScorer& scorer, double accept_threshold) {
  const auto best_of = [&](std::span<const Chunk* const> pool) {
    std::optional<SourceMatch> best;
    for (const Chunk* c : pool) {
      if (!c) continue;
      const auto s = scorer.score(claim, *c);
      if (!best || s.score > best->score || (s.score == best->score && c->chunk_id < best->chunk->chunk_id)) {
        best = SourceMatch{c, s.score, s.best_sentence, s.sentence_score};
      }
    }
    return best;
  };
  if (auto first = best_of(supporting); first && first->score >= accept_threshold) return *first;
  if (auto any = best_of(candidates); any && any->score >= accept_threshold) return *any;
  throw Error(ErrorKind::NoSource, "no candidate scores at least " + std::to_string(accept_threshold));
}

CitationLevel determine_granularity(const SourceMatch& match, double sentence_threshold) {
  if (!match.chunk) throw Error(ErrorKind::InvalidArgument, "granularity needs a resolved match");
  if (!match.chunk->sentence_spans.empty() && match.best_sentence && match.sentence_score >= sentence_threshold) {
    return CitationLevel::Sentence;
  }
  if (match.chunk->para_index) return CitationLevel::Paragraph;
  return CitationLevel::Document;
}

CitationLevel ReferenceLocator::level() const noexcept {
  if (sentence_index) return CitationLevel::Sentence;
  if (page_no) return CitationLevel::Paragraph;
  return CitationLevel::Document;
}

std::string format_reference(const ReferenceLocator& loc) {
  std::string out = loc.filename;
  if (loc.page_no && loc.para_index) {
    out += ":p" + std::to_string(*loc.page_no) + "." + std::to_string(*loc.para_index);
    if (loc.sentence_index) out += ".s" + std::to_string(*loc.sentence_index);
  }
  return out;
}

ReferenceLocator parse_reference(std::string_view reference) {
  static const std::regex kLocator(R"(^(.+):p(\d+)\.(\d+)(?:\.s(\d+))?$)");
  const std::string s(reference);
  std::smatch m;
  ReferenceLocator loc;
  if (!std::regex_match(s, m, kLocator)) {
    loc.filename = s;
    return loc;
  }
  loc.filename = m[1].str();
  loc.page_no = std::stoi(m[2].str());
  loc.para_index = std::stoi(m[3].str());
  if (m[4].matched) loc.sentence_index = std::stoi(m[4].str());
  return loc;
}

ReferenceLocator locator_of(const CitationSource& source) {
  return {source.filename, source.page_no, source.para_index, source.sentence_index};
}

std::optional<ResolvedReference> resolve_reference(const ReferenceLocator& loc, const KnowledgeBase& kb) {
  for (const DocumentMeta* doc : kb.documents_named(loc.filename)) {
    if (loc.level() == CitationLevel::Document) return ResolvedReference{doc, nullptr};
    if (!loc.page_no || !loc.para_index) continue;
    const Chunk* chunk = kb.find_chunk_at(doc->doc_id, *loc.page_no, *loc.para_index);
    if (!chunk) continue;
    if (loc.sentence_index && (*loc.sentence_index < 0 ||
                               static_cast<std::size_t>(*loc.sentence_index) >= chunk->sentence_spans.size())) {
      continue;
    }
    return ResolvedReference{doc, chunk};
  }
  return std::nullopt;
}

CitationRecord generate_citation(const Claim& claim, const SourceMatch& match, CitationLevel level,
                                 const KnowledgeBase& kb) {
  if (!match.chunk) throw Error(ErrorKind::InvalidArgument, "citation needs a resolved match");
  const Chunk& chunk = *match.chunk;
  const DocumentMeta* doc = kb.find_document(chunk.doc_id);
  if (!doc) throw Error(ErrorKind::InvalidArgument, "chunk " + chunk.chunk_id + " has no document");

  CitationRecord r;
  r.claim_id = claim.claim_id;
  r.level = level;
  r.score = std::clamp(match.score, -1.0, 1.0);
  r.source.doc_id = doc->doc_id;
  r.source.filename = doc->filename;
  if (level != CitationLevel::Document) {
    if (!chunk.para_index) throw Error(ErrorKind::InvalidArgument, "chunk " + chunk.chunk_id + " has no para_index");
    r.source.page_no = chunk.page_no;
    r.source.chunk_id = chunk.chunk_id;
    r.source.para_index = *chunk.para_index;
    r.source.bbox = chunk.bbox;
  }
  if (level == CitationLevel::Sentence) {
    if (!match.best_sentence) throw Error(ErrorKind::InvalidArgument, "sentence citation needs a sentence match");
    r.source.sentence_index = static_cast<int>(*match.best_sentence);
  }
  r.reference = format_reference(locator_of(r.source));
  return r;
}

ConsistencyResult consistency_check(std::span<const CitationRecord> records, std::span<const Claim> claims,
                                    const CitationOptions& options) {
  ConsistencyResult result{{records.begin(), records.end()}, {}};
  const auto n = records.size();
  if (n < 2) return result;

  std::map<std::string, const Claim*> by_id;
  for (const auto& c : claims) by_id[c.claim_id] = &c;
  std::vector<std::set<std::string>> grams(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (auto it = by_id.find(records[i].claim_id); it != by_id.end()) grams[i] = word_trigrams(it->second->text);
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(records[i].score - records[j].score) > options.consistency_score_gap + 1e-12) continue;
      if (set_jaccard(grams[i], grams[j]) <= options.consistency_jaccard) continue;
      parent[find(i)] = find(j);
    }
  }

  std::map<std::size_t, std::size_t> winner;  // root -> record index
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    auto [it, inserted] = winner.emplace(root, i);
    if (inserted) continue;
    const auto& w = records[it->second];
    if (records[i].score > w.score || (records[i].score == w.score && records[i].claim_id < w.claim_id)) it->second = i;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& w = records[winner[find(i)]];
    auto& r = result.records[i];
    if (r.reference == w.reference && r.source == w.source) continue;
    result.merge_log.push_back("claim " + r.claim_id + " rebound from " + r.reference + " to " + w.reference +
                               " (shared with " + w.claim_id + ")");
    r.level = w.level;
    r.reference = w.reference;
    r.source = w.source;
  }
  return result;
}

ValidationReport validate_citations(std::span<const SectionText> article, std::span<const CitationRecord> records,
                                    const KnowledgeBase& kb, std::span<const std::string> no_source) {
  ValidationReport report;
  const auto claims = extract_claims(article);
  const std::set<std::string> unsourced(no_source.begin(), no_source.end());
  std::set<std::string> claim_ids;
  std::set<std::string> cited;
  for (const auto& c : claims) claim_ids.insert(c.claim_id);
  for (const auto& r : records) cited.insert(r.claim_id);

  for (const auto& c : claims) {
    if (!c.is_factual || cited.count(c.claim_id)) continue;
    if (unsourced.count(c.claim_id)) {
      report.warnings.push_back("no source found for " + c.claim_id + ": " + c.text);
    } else {
      report.add(IssueKind::UncitedClaim, c.claim_id, c.text);
    }
  }

  for (const auto& r : records) {
    if (!claim_ids.count(r.claim_id)) {
      report.add(IssueKind::UnresolvableReference, r.claim_id, "record names a claim that is not in the article");
      continue;
    }
    const auto loc = parse_reference(r.reference);
    if (loc.level() != r.level || !source_shape_matches(r.source, r.level) || locator_of(r.source) != loc) {
      report.add(IssueKind::LevelFormatMismatch, r.claim_id,
                 "reference \"" + r.reference + "\" does not match level " + std::string(to_string(r.level)));
    }
    const auto resolved = resolve_reference(loc, kb);
    const bool chunk_ok = !r.source.chunk_id || (kb.find_chunk(*r.source.chunk_id) && resolved && resolved->chunk &&
                                                 resolved->chunk->chunk_id == *r.source.chunk_id);
    if (!resolved || !chunk_ok) {
      report.add(IssueKind::UnresolvableReference, r.claim_id, "reference \"" + r.reference + "\" does not resolve");
    }
  }
  return report;
}

CitationResult attribute_citations(std::span<const SectionText> article, std::span<const SectionContext> contexts,
                                   const KnowledgeBase& kb, SourceScorer& scorer, const CitationOptions& options) {
  if (contexts.size() != article.size()) {
    throw Error(ErrorKind::InvalidArgument, "need one retrieval context per section");
  }
  CitationResult result;
  result.claims = extract_claims(article);
  const auto map = paragraph_index_map(article);

  std::vector<CitationRecord> records;
  for (const auto& claim : result.claims) {
    if (!claim.is_factual) continue;
    const auto ref = map.at(claim.paragraph_index);
    const auto& paragraph = article[ref.section].paragraphs[ref.paragraph];

    std::vector<const Chunk*> supporting;
    for (const auto& id : paragraph.supporting_chunk_ids) {
      if (const Chunk* c = kb.find_chunk(id)) supporting.push_back(c);
    }
    std::vector<const Chunk*> candidates;
    for (const auto& c : contexts[ref.section].chunks) candidates.push_back(c.chunk);
    for (const Chunk* c : supporting) {
      if (std::find(candidates.begin(), candidates.end(), c) == candidates.end()) candidates.push_back(c);
    }

    try {
      const auto vec = scorer.embed_claim(claim.text);
      const auto match = find_source(vec, supporting, candidates, scorer, options.accept_threshold);
      records.push_back(generate_citation(claim, match, determine_granularity(match, options.sentence_threshold), kb));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoSource) throw;
      result.no_source.push_back(claim.claim_id);
      result.warnings.push_back("no source found for " + claim.claim_id + ": " + claim.text);
    }
  }
  auto merged = consistency_check(records, result.claims, options);
  result.records = std::move(merged.records);
  result.merge_log = std::move(merged.merge_log);
  return result;
}

}  // namespace deepwriter
