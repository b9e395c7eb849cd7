#include "deepwriter/kb_store.hpp"

#include <fstream>
#include <sstream>

#include "json_codec.hpp"

namespace deepwriter {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const DocumentMeta& d) {
  return {{"doc_id", d.doc_id},     {"filename", d.filename},       {"title", d.title},
          {"year", optional_to_json(d.year)}, {"domain_tags", d.domain_tags}, {"page_count", d.page_count}};
}

json to_json(const Page& p) {
  return {{"doc_id", p.doc_id},
          {"page_no", p.page_no},
          {"width_pt", p.width_pt},
          {"height_pt", p.height_pt},
          {"raw_text", p.raw_text}};
}

json to_json(const Chunk& c) {
  auto spans = json::array();
  for (const auto& s : c.sentence_spans) spans.push_back({s.begin, s.end});
  return {{"chunk_id", c.chunk_id},
          {"doc_id", c.doc_id},
          {"page_no", c.page_no},
          {"para_index", optional_to_json(c.para_index)},
          {"sentence_spans", spans},
          {"text", c.text},
          {"bbox", c.bbox ? bbox_to_json(*c.bbox) : json(nullptr)},
          {"embedding", embedding_to_json(c.embedding)}};
}

json to_json(const VisualElement& v) {
  return {{"visual_id", v.visual_id},
          {"doc_id", v.doc_id},
          {"page_no", v.page_no},
          {"kind", std::string(to_string(v.kind))},
          {"bbox", bbox_to_json(v.bbox)},
          {"asset_path", v.asset_path},
          {"caption", v.caption},
          {"embedding", embedding_to_json(v.embedding)}};
}

DocumentMeta document_from_json(const json& j) {
  DocumentMeta d;
  d.doc_id = j.at("doc_id").get<std::string>();
  d.filename = j.at("filename").get<std::string>();
  d.title = j.value("title", "");
  if (j.contains("year") && !j.at("year").is_null()) d.year = j.at("year").get<int>();
  d.domain_tags = j.value("domain_tags", std::vector<std::string>{});
  d.page_count = j.at("page_count").get<int>();
  return d;
}

Page page_from_json(const json& j) {
  return {j.at("doc_id").get<std::string>(), j.at("page_no").get<int>(), j.at("width_pt").get<double>(),
          j.at("height_pt").get<double>(), j.at("raw_text").get<std::string>()};
}

Chunk chunk_from_json(const json& j) {
  Chunk c;
  c.chunk_id = j.at("chunk_id").get<std::string>();
  c.doc_id = j.at("doc_id").get<std::string>();
  c.page_no = j.at("page_no").get<int>();
  if (!j.at("para_index").is_null()) c.para_index = j.at("para_index").get<int>();
  for (const auto& s : j.at("sentence_spans")) {
    c.sentence_spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>()});
  }
  c.text = j.at("text").get<std::string>();
  if (!j.at("bbox").is_null()) c.bbox = bbox_from_json(j.at("bbox"));
  c.embedding = embedding_from_json(j.at("embedding"));
  return c;
}

VisualElement visual_from_json(const json& j) {
  VisualElement v;
  v.visual_id = j.at("visual_id").get<std::string>();
  v.doc_id = j.at("doc_id").get<std::string>();
  v.page_no = j.at("page_no").get<int>();
  const auto kind = parse_visual_kind(j.at("kind").get<std::string>());
  if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown visual kind in " + v.visual_id);
  v.kind = *kind;
  v.bbox = bbox_from_json(j.at("bbox"));
  v.asset_path = j.at("asset_path").get<std::string>();
  v.caption = j.at("caption").get<std::string>();
  v.embedding = embedding_from_json(j.at("embedding"));
  return v;
}

template <typename T>
void write_jsonl(const fs::path& path, const std::vector<T>& items) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (const auto& item : items) out << to_json(item).dump() << '\n';
}

template <typename F>
auto read_jsonl(const fs::path& path, F&& decode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::vector<decltype(decode(json{}))> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      items.push_back(decode(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::InvalidArgument,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

}  // namespace

void save_kb(const KnowledgeBase& kb, const fs::path& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write manifest in " + dir.string());
    const json manifest = {{"format_version", kb.manifest().format_version},
                           {"embedding_dim", kb.manifest().embedding_dim}};
    out << manifest.dump(2) << '\n';
  }
  write_jsonl(dir / "documents.jsonl", kb.documents());
  write_jsonl(dir / "pages.jsonl", kb.pages());
  write_jsonl(dir / "chunks.jsonl", kb.chunks());
  write_jsonl(dir / "visuals.jsonl", kb.visuals());
}

KnowledgeBase load_kb(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json", std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "no knowledge base at " + dir.string());
  KnowledgeBaseParts parts;
  try {
    const auto manifest = json::parse(in);
    parts.manifest.format_version = manifest.at("format_version").get<int>();
    parts.manifest.embedding_dim = manifest.at("embedding_dim").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "bad manifest: " + std::string(e.what()));
  }
  if (parts.manifest.format_version != 1) {
    throw Error(ErrorKind::UnsupportedVersion,
                "knowledge base format " + std::to_string(parts.manifest.format_version));
  }
  parts.documents = read_jsonl(dir / "documents.jsonl", document_from_json);
  parts.pages = read_jsonl(dir / "pages.jsonl", page_from_json);
  parts.chunks = read_jsonl(dir / "chunks.jsonl", chunk_from_json);
  parts.visuals = read_jsonl(dir / "visuals.jsonl", visual_from_json);
  return KnowledgeBase(std::move(parts));
}

}  // namespace deepwriter
