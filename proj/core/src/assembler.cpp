#include "deepwriter/assembler.hpp"

#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "deepwriter/error.hpp"
#include "deepwriter/placement.hpp"
#include "deepwriter/text.hpp"

namespace fs = std::filesystem;

namespace deepwriter {

namespace {

std::string escape_inline(std::string_view s) {
  std::string out;
  for (char c : normalize_whitespace(s)) {
    if (c == '\\' || c == '[' || c == ']' || c == '*') out += '\\';
    out += c;
  }
  return out;
}

std::string unescape_inline(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) ++i;
    out += s[i];
  }
  return out;
}

std::string first_line(std::string_view s) {
  const auto lines = split_lines(trim(s));
  return lines.empty() ? std::string() : std::string(trim(lines.front()));
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, path.string() + ": " + e.what());
  }
}

std::optional<IssueKind> parse_issue_kind(std::string_view s) {
  for (int k = 0; k <= static_cast<int>(IssueKind::MissingAsset); ++k) {
    if (to_string(static_cast<IssueKind>(k)) == s) return static_cast<IssueKind>(k);
  }
  return std::nullopt;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

ParsedParagraph parse_paragraph(const std::string& block) {
  static const std::regex kMarker(R"( \[(\d+)\])");
  ParsedParagraph p;
  std::size_t last = 0;
  for (std::sregex_iterator it(block.begin(), block.end(), kMarker), end; it != end; ++it) {
    p.text.append(block, last, static_cast<std::size_t>(it->position()) - last);
    p.markers.emplace_back(p.text.size(), std::stoi((*it)[1].str()));
    last = static_cast<std::size_t>(it->position() + it->length());
  }
  p.text.append(block, last);
  return p;
}

std::optional<FigureBlock> parse_figure(const std::string& block) {
  // ![alt](path) with escaped brackets inside alt.
  if (!starts_with(block, "![") || block.back() != ')') return std::nullopt;
  std::size_t i = 2;
  std::string alt;
  while (i < block.size() && block[i] != ']') {
    if (block[i] == '\\' && i + 1 < block.size()) ++i;
    alt += block[i++];
  }
  if (i + 1 >= block.size() || block[i + 1] != '(') return std::nullopt;
  FigureBlock f;
  f.caption = alt;
  f.asset_path = block.substr(i + 2, block.size() - i - 3);
  f.visual_id = fs::path(f.asset_path).stem().string();
  return f;
}

}  // namespace

Article add_image_paths(const Article& article, const fs::path& asset_root, const fs::path& out_dir,
                        std::vector<std::string>* copied) {
  Article out = article;
  const auto assets = out_dir / "assets";
  std::map<std::string, std::string> done;
  for (auto& section : out.sections) {
    for (auto& paragraph : section.paragraphs) {
      for (auto& fig : paragraph.figures) {
        if (auto it = done.find(fig.visual_id); it != done.end()) {
          fig.asset_path = it->second;
          continue;
        }
        fs::path source(fig.asset_path);
        if (source.is_relative()) source = asset_root / source;
        if (!fs::is_regular_file(source)) {
          throw Error(ErrorKind::DanglingAsset, fig.visual_id + ": asset " + source.string() + " does not exist");
        }
        fs::create_directories(assets);
        const auto name = fig.visual_id + source.extension().string();
        std::error_code ec;
        fs::copy_file(source, assets / name, fs::copy_options::overwrite_existing, ec);
        if (ec) throw Error(ErrorKind::Io, "copying " + source.string() + ": " + ec.message());
        fig.asset_path = "assets/" + name;
        done.emplace(fig.visual_id, fig.asset_path);
        if (copied) copied->push_back(fig.asset_path);
      }
    }
  }
  return out;
}

RenderedArticle render(const Article& article, std::span<const CitationRecord> records) {
  std::map<std::string, const CitationRecord*> by_claim;
  for (const auto& r : records) by_claim[r.claim_id] = &r;
  const auto claims = extract_claims(article.sections);
  std::map<std::size_t, std::vector<const Claim*>> by_paragraph;
  for (const auto& c : claims) by_paragraph[c.paragraph_index].push_back(&c);

  RenderedArticle out;
  std::map<std::string, int> numbers;
  std::string md = "# " + first_line(article.title) + "\n";
  std::size_t global = 0;
  for (const auto& section : article.sections) {
    md += "\n## " + first_line(section.title) + "\n";
    for (const auto& paragraph : section.paragraphs) {
      std::string text;
      std::size_t last = 0;
      for (const Claim* c : by_paragraph[global]) {
        const auto it = by_claim.find(c->claim_id);
        if (it == by_claim.end()) continue;
        auto [num, inserted] = numbers.emplace(it->second->reference, static_cast<int>(numbers.size()) + 1);
        if (inserted) out.references.push_back(it->second->reference);
        text.append(paragraph.text, last, c->sentence_span.end - last);
        text += " [" + std::to_string(num->second) + "]";
        last = c->sentence_span.end;
      }
      text.append(paragraph.text, last);
      md += "\n" + text + "\n";
      for (const auto& fig : paragraph.figures) {
        const auto caption = escape_inline(fig.caption);
        md += "\n![" + caption + "](" + fig.asset_path + ")\n\n*" + caption + "*\n";
      }
      ++global;
    }
  }
  if (!out.references.empty()) {
    md += "\n## References\n";
    for (std::size_t i = 0; i < out.references.size(); ++i) {
      md += "\n[" + std::to_string(i + 1) + "] " + out.references[i] + "\n";
    }
  }
  md += "\n" + std::string(kArticleTrailer) + "\n";
  out.markdown = std::move(md);
  return out;
}

std::vector<SectionText> ParsedArticle::section_texts() const {
  std::vector<SectionText> out;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    SectionText st;
    st.title = section_titles[s];
    for (const auto& p : sections[s]) st.paragraphs.push_back({p.text, {}, p.figures});
    out.push_back(std::move(st));
  }
  return out;
}

ParsedArticle parse_article(std::string_view markdown) {
  static const std::regex kReference(R"(^\[(\d+)\] (.+)$)");
  ParsedArticle parsed;
  bool in_references = false;
  bool expect_caption = false;

  std::vector<std::string> blocks;
  std::string current;
  for (auto line : split_lines(markdown)) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
      continue;
    }
    // Headings and list entries are blocks of their own.
    if (starts_with(line, "#") || (in_references && starts_with(line, "["))) {
      if (!current.empty()) blocks.push_back(std::move(current));
      current.clear();
      blocks.emplace_back(line);
      in_references = in_references || line == "## References";
      continue;
    }
    current += (current.empty() ? "" : " ") + std::string(line);
  }
  if (!current.empty()) blocks.push_back(std::move(current));

  in_references = false;
  for (const auto& block : blocks) {
    if (block == kArticleTrailer) {
      parsed.has_trailer = true;
      continue;
    }
    if (starts_with(block, "# ")) {
      parsed.title = block.substr(2);
      continue;
    }
    if (block == "## References") {
      in_references = true;
      continue;
    }
    if (starts_with(block, "## ")) {
      in_references = false;
      parsed.section_titles.push_back(block.substr(3));
      parsed.sections.emplace_back();
      continue;
    }
    if (in_references) {
      std::smatch m;
      if (std::regex_match(block, m, kReference)) parsed.references.emplace_back(std::stoi(m[1].str()), m[2].str());
      continue;
    }
    if (parsed.sections.empty()) continue;
    auto& paragraphs = parsed.sections.back();
    if (expect_caption && block.size() >= 2 && block.front() == '*' && block.back() == '*') {
      expect_caption = false;
      if (!paragraphs.empty() && !paragraphs.back().figures.empty()) {
        paragraphs.back().figures.back().caption = unescape_inline(block.substr(1, block.size() - 2));
      }
      continue;
    }
    expect_caption = false;
    if (auto fig = parse_figure(block)) {
      if (!paragraphs.empty()) paragraphs.back().figures.push_back(std::move(*fig));
      expect_caption = true;
      continue;
    }
    paragraphs.push_back(parse_paragraph(block));
  }
  return parsed;
}

nlohmann::json citations_json(std::span<const CitationRecord> records, std::span<const std::string> warnings,
                              std::span<const std::string> no_source) {
  auto recs = nlohmann::json::array();
  for (const auto& r : records) recs.push_back(to_json(r));
  return {{"records", recs},
          {"warnings", std::vector<std::string>(warnings.begin(), warnings.end())},
          {"no_source", std::vector<std::string>(no_source.begin(), no_source.end())}};
}

nlohmann::json to_json(const ValidationReport& report) {
  auto issues = nlohmann::json::array();
  for (const auto& i : report.issues) {
    issues.push_back({{"kind", to_string(i.kind)}, {"subject", i.subject}, {"detail", i.detail}});
  }
  return {{"ok", report.ok()}, {"issues", issues}, {"warnings", report.warnings}};
}

ValidationReport validation_report_from_json(const nlohmann::json& j) {
  ValidationReport report;
  try {
    for (const auto& i : j.at("issues")) {
      const auto kind = parse_issue_kind(i.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown issue kind " + i.at("kind").dump());
      report.add(*kind, i.at("subject").get<std::string>(), i.at("detail").get<std::string>());
    }
    report.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed report: ") + e.what());
  }
  return report;
}

void write_bundle(const fs::path& out_dir, const RenderedArticle& rendered, const nlohmann::json& citations,
                  const ValidationReport& report) {
  fs::create_directories(out_dir);
  write_file(out_dir / "article.md", rendered.markdown);
  write_file(out_dir / "citations.json", citations.dump(2) + "\n");
  write_file(out_dir / "report.json", to_json(report).dump(2) + "\n");
}

ValidationReport validate_bundle(const fs::path& out_dir, const KnowledgeBase& kb) {
  const auto parsed = parse_article(read_file(out_dir / "article.md"));
  const auto sidecar = read_json(out_dir / "citations.json");

  std::vector<CitationRecord> records;
  std::vector<std::string> no_source;
  try {
    for (const auto& r : sidecar.at("records")) records.push_back(citation_record_from_json(r));
    if (sidecar.contains("no_source")) no_source = sidecar["no_source"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("malformed citations.json: ") + e.what());
  }

  const auto sections = parsed.section_texts();
  auto report = validate_citations(sections, records, kb, no_source);

  if (!parsed.has_trailer) report.add(IssueKind::MarkerMismatch, "article.md", "missing format trailer");

  // References must be numbered 1..n and every number must be used in the text.
  std::set<int> used;
  for (const auto& section : parsed.sections) {
    for (const auto& p : section) {
      for (const auto& [offset, n] : p.markers) used.insert(n);
    }
  }
  std::set<int> listed;
  for (std::size_t i = 0; i < parsed.references.size(); ++i) {
    const int n = parsed.references[i].first;
    if (n != static_cast<int>(i) + 1) {
      report.add(IssueKind::MarkerMismatch, "[" + std::to_string(n) + "]", "references are not numbered consecutively");
    }
    listed.insert(n);
  }
  for (int n : used) {
    if (!listed.count(n)) report.add(IssueKind::MarkerMismatch, "[" + std::to_string(n) + "]", "marker has no reference entry");
  }
  for (int n : listed) {
    if (!used.count(n)) report.add(IssueKind::MarkerMismatch, "[" + std::to_string(n) + "]", "reference is never cited");
  }

  // Each cited claim carries exactly the marker of its record's reference.
  std::map<int, std::string> reference_of(parsed.references.begin(), parsed.references.end());
  std::map<std::string, const CitationRecord*> by_claim;
  for (const auto& r : records) by_claim[r.claim_id] = &r;
  std::vector<const ParsedParagraph*> flat;
  for (const auto& section : parsed.sections) {
    for (const auto& p : section) flat.push_back(&p);
  }
  for (const auto& claim : extract_claims(sections)) {
    std::vector<int> markers;
    for (const auto& [offset, n] : flat[claim.paragraph_index]->markers) {
      if (offset == claim.sentence_span.end) markers.push_back(n);
    }
    const auto it = by_claim.find(claim.claim_id);
    if (it == by_claim.end()) {
      if (!markers.empty()) report.add(IssueKind::MarkerMismatch, claim.claim_id, "marker on a claim without a citation record");
      continue;
    }
    if (markers.size() != 1 || reference_of[markers.front()] != it->second->reference) {
      report.add(IssueKind::MarkerMismatch, claim.claim_id, "marker does not point at " + it->second->reference);
    }
  }

  for (const auto& section : parsed.sections) {
    for (const auto& p : section) {
      for (const auto& fig : p.figures) {
        const fs::path rel(fig.asset_path);
        if (rel.is_absolute() || !fs::is_regular_file(out_dir / rel)) {
          report.add(IssueKind::MissingAsset, fig.visual_id, "image " + fig.asset_path + " is not in the bundle");
        }
      }
    }
  }
  return report;
}

}  // namespace deepwriter
