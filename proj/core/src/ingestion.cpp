#include "deepwriter/ingestion.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deepwriter/digest.hpp"
#include "deepwriter/error.hpp"
#include "http_transport.hpp"
#include "json_codec.hpp"

namespace deepwriter {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedInterchange, what); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) malformed(where + ": missing required field '" + key + "'");
  return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number()) malformed(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) malformed(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

BoundingBox parse_bbox(const json& obj, const std::string& where) {
  const auto& v = require(obj, "bbox", where);
  if (!v.is_array() || v.size() != 4 ||
      !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
    malformed(where + ": bbox must be [x0, y0, x1, y1]");
  }
  BoundingBox b = bbox_from_json(v);
  if (!b.valid()) malformed(where + ": bbox must satisfy x0 < x1 and y0 < y1");
  return b;
}

InterchangePage parse_page(const json& j, std::size_t index) {
  const std::string where = "pages[" + std::to_string(index) + "]";
  InterchangePage page;
  const auto& page_no = require(j, "page_no", where);
  if (!page_no.is_number_integer()) malformed(where + ": page_no must be an integer");
  page.page_no = page_no.get<int>();
  page.width_pt = require_number(j, "width_pt", where);
  page.height_pt = require_number(j, "height_pt", where);
  if (!(page.width_pt > 0) || !(page.height_pt > 0)) malformed(where + ": page dimensions must be positive");

  if (j.contains("text_blocks")) {
    const auto& blocks = j.at("text_blocks");
    if (!blocks.is_array()) malformed(where + ": text_blocks must be an array");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const std::string bw = where + ".text_blocks[" + std::to_string(i) + "]";
      page.text_blocks.push_back({require_string(blocks[i], "text", bw), parse_bbox(blocks[i], bw)});
    }
  }
  if (j.contains("visuals")) {
    const auto& visuals = j.at("visuals");
    if (!visuals.is_array()) malformed(where + ": visuals must be an array");
    for (std::size_t i = 0; i < visuals.size(); ++i) {
      const std::string vw = where + ".visuals[" + std::to_string(i) + "]";
      const auto& v = visuals[i];
      InterchangeVisual visual;
      const auto kind = parse_visual_kind(require_string(v, "kind", vw));
      if (!kind) malformed(vw + ": kind must be image, table or chart");
      visual.kind = *kind;
      visual.bbox = parse_bbox(v, vw);
      visual.asset_path = require_string(v, "asset_path", vw);
      if (v.contains("caption") && !v.at("caption").is_null()) {
        if (!v.at("caption").is_string()) malformed(vw + ": caption must be a string");
        visual.caption = v.at("caption").get<std::string>();
      }
      page.visuals.push_back(std::move(visual));
    }
  }
  return page;
}

std::string slugify(std::string_view filename) {
  std::string stem = fs::path(std::string(filename)).stem().string();
  std::string out;
  for (char c : to_lower(stem)) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out.push_back(c);
    } else if (!out.empty() && out.back() != '-') {
      out.push_back('-');
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "doc" : out;
}

std::optional<int> year_from_filename(const std::string& filename) {
  static const std::regex kYear(R"((^|[^0-9])((19|20)[0-9]{2})([^0-9]|$))");
  std::smatch m;
  if (std::regex_search(filename, m, kYear)) return std::stoi(m[2].str());
  return std::nullopt;
}

std::string padded(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
  return buf;
}

BoundingBox clamp_to_page(const BoundingBox& b, double w, double h) {
  return {std::clamp(b.x0, 0.0, w), std::clamp(b.y0, 0.0, h), std::clamp(b.x1, 0.0, w), std::clamp(b.y1, 0.0, h)};
}

}  // namespace

ExtractionInterchange parse_interchange(std::string_view bytes) {
  json root;
  try {
    root = json::parse(bytes);
  } catch (const json::parse_error& e) {
    malformed(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) malformed("top level must be an object");
  const auto& version = require(root, "eif_version", "interchange");
  if (!version.is_number_integer()) malformed("eif_version must be an integer");
  if (version.get<int>() != kInterchangeVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "eif_version " + version.dump() + " is not supported");
  }
  ExtractionInterchange eif;
  eif.source_filename = require_string(root, "source_filename", "interchange");
  const auto& pages = require(root, "pages", "interchange");
  if (!pages.is_array()) malformed("pages must be an array");
  for (std::size_t i = 0; i < pages.size(); ++i) {
    auto page = parse_page(pages[i], i);
    if (page.page_no < 1) malformed("page_no must be >= 1");
    if (!eif.pages.empty() && page.page_no <= eif.pages.back().page_no) {
      malformed("page_no must be strictly increasing");
    }
    eif.pages.push_back(std::move(page));
  }
  return eif;
}

ExtractionInterchange load_interchange(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto eif = parse_interchange(buf.str());
  eif.base_dir = path.parent_path();
  return eif;
}

// --- captioning ------------------------------------------------------------

ScriptedCaptioner ScriptedCaptioner::from_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read caption fixture " + path.string());
  try {
    const auto j = json::parse(in);
    std::map<std::string, std::string> captions;
    std::set<std::string> failing;
    const auto entries = j.value("captions", json::object());
    for (const auto& [name, value] : entries.items()) {
      captions.emplace(name, value.get<std::string>());
    }
    const auto failing_names = j.value("failing", json::array());
    for (const auto& name : failing_names) failing.insert(name.get<std::string>());
    return ScriptedCaptioner(std::move(captions), std::move(failing));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, "bad caption fixture: " + std::string(e.what()));
  }
}

std::string ScriptedCaptioner::caption(const CaptionRequest& request) {
  const auto name = fs::path(request.asset_path).filename().string();
  if (failing_.count(name)) throw Error(ErrorKind::CaptionFailed, "scripted failure for " + name);
  auto it = captions_.find(name);
  if (it == captions_.end()) throw Error(ErrorKind::CaptionFailed, "no scripted caption for " + name);
  return it->second;
}

std::string HttpCaptioner::caption(const CaptionRequest& request) {
  std::ifstream in(request.asset_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::CaptionFailed, "cannot read asset " + request.asset_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string kind(to_string(request.kind));
  const json body = {
      {"model", config_.model},
      {"temperature", 0.0},
      {"messages",
       {{{"role", "user"},
         {"content",
          {{{"type", "text"},
            {"text", "Describe this " + kind + " in detail, including any values, labels and trends it shows."}},
           {{"type", "image_url"},
            {"image_url", {{"url", "data:image/png;base64," + base64_encode(buf.str())}}}}}}}}}};
  const auto response = with_retries(config_.retry, [&] {
    return http::post_json(config_.url, body.dump(), config_.api_key, config_.timeout_seconds);
  });
  try {
    auto text = json::parse(response).at("choices").at(0).at("message").at("content").get<std::string>();
    if (trim(text).empty()) throw Error(ErrorKind::CaptionFailed, "empty caption for " + request.visual_id);
    return std::string(trim(text));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::CaptionFailed, std::string("malformed caption response: ") + e.what());
  }
}

std::vector<VisualElement> caption_visuals(std::vector<VisualElement> visuals, CaptionBackend& captioner,
                                           Diagnostics& diagnostics) {
  for (auto& v : visuals) {
    if (!trim(v.caption).empty()) continue;
    try {
      v.caption = std::string(trim(captioner.caption({v.visual_id, v.kind, v.page_no, v.asset_path})));
      if (v.caption.empty()) throw Error(ErrorKind::CaptionFailed, "empty caption");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::CaptionFailed) throw;
      v.caption = "uncaptioned " + std::string(to_string(v.kind)) + " on page " + std::to_string(v.page_no);
      diagnostics.warn("caption failed for " + v.visual_id + ": " + e.what());
    }
  }
  return visuals;
}

// --- knowledge base ----------------------------------------------------------

KnowledgeBase build_kb(std::span<const ExtractionInterchange> interchanges, const ChunkingPolicy& policy,
                       EmbeddingBackend& embedder, CaptionBackend& captioner, Diagnostics& diagnostics) {
  if (interchanges.empty()) throw Error(ErrorKind::EmptyCorpus, "no interchange files given");
  policy.validate();

  KnowledgeBaseParts parts;
  std::map<std::string, int> slug_uses;
  std::size_t chunk_seq = 0;
  std::size_t visual_seq = 0;

  for (const auto& eif : interchanges) {
    DocumentMeta doc;
    const auto slug = slugify(eif.source_filename);
    const int use = ++slug_uses[slug];
    doc.doc_id = use == 1 ? slug : slug + "-" + std::to_string(use);
    doc.filename = eif.source_filename;
    doc.title = fs::path(eif.source_filename).stem().string();
    doc.year = year_from_filename(eif.source_filename);
    doc.page_count = static_cast<int>(eif.pages.size());

    for (const auto& ip : eif.pages) {
      // Page text is the reading-order concatenation of its blocks; remember
      // where each block landed so chunks can inherit a bounding box.
      std::string page_text;
      std::vector<std::pair<TextSpan, BoundingBox>> block_ranges;
      for (const auto& block : ip.text_blocks) {
        const auto body = trim(block.text);
        if (body.empty()) continue;
        if (!page_text.empty()) page_text += "\n\n";
        const std::size_t begin = page_text.size();
        page_text += body;
        block_ranges.push_back({{begin, page_text.size()},
                                clamp_to_page(block.bbox, ip.width_pt, ip.height_pt)});
      }

      int para = 0;
      for (auto& pc : chunk_page(page_text, policy)) {
        if (trim(pc.text).empty()) continue;
        Chunk c;
        c.chunk_id = padded('c', ++chunk_seq);
        c.doc_id = doc.doc_id;
        c.page_no = ip.page_no;
        c.para_index = para++;
        c.sentence_spans = sentence_spans(pc.text);
        for (const auto& [range, box] : block_ranges) {
          if (range.begin < pc.range.end && pc.range.begin < range.end && box.valid()) {
            c.bbox = c.bbox ? c.bbox->united(box) : box;
          }
        }
        c.text = std::move(pc.text);
        parts.chunks.push_back(std::move(c));
      }

      for (const auto& iv : ip.visuals) {
        VisualElement v;
        v.visual_id = padded('v', ++visual_seq);
        v.doc_id = doc.doc_id;
        v.page_no = ip.page_no;
        v.kind = iv.kind;
        v.bbox = iv.bbox;
        if (!v.bbox.within(ip.width_pt, ip.height_pt)) {
          v.bbox = clamp_to_page(iv.bbox, ip.width_pt, ip.height_pt);
          diagnostics.warn("bbox of " + v.visual_id + " clamped to page bounds");
        }
        v.asset_path = (eif.base_dir / iv.asset_path).lexically_normal().string();
        v.caption = iv.caption.value_or("");
        parts.visuals.push_back(std::move(v));
      }

      parts.pages.push_back({doc.doc_id, ip.page_no, ip.width_pt, ip.height_pt, std::move(page_text)});
    }
    parts.documents.push_back(std::move(doc));
  }

  parts.visuals = caption_visuals(std::move(parts.visuals), captioner, diagnostics);

  std::vector<EmbedInput> inputs;
  inputs.reserve(parts.chunks.size() + parts.visuals.size());
  for (const auto& c : parts.chunks) inputs.push_back(EmbedInput::text(c.text));
  for (const auto& v : parts.visuals) {
    inputs.push_back(embedder.multimodal() ? EmbedInput::image(v.asset_path) : EmbedInput::text(v.caption));
  }
  if (!inputs.empty()) {
    auto vectors = embed(inputs, embedder);
    parts.manifest.embedding_dim = vectors.front().size();
    std::size_t i = 0;
    for (auto& c : parts.chunks) c.embedding = std::move(vectors[i++]);
    for (auto& v : parts.visuals) v.embedding = std::move(vectors[i++]);
  }

  KnowledgeBase kb(std::move(parts));
  const auto report = validate_hierarchy(kb);
  if (!report.ok()) {
    const auto& first = report.issues.front();
    throw Error(ErrorKind::MalformedInterchange, "built knowledge base is inconsistent: " +
                                                     std::string(to_string(first.kind)) + " " + first.subject +
                                                     " (" + first.detail + ")");
  }
  return kb;
}

KnowledgeBase materialize_assets(const KnowledgeBase& kb, const fs::path& kb_dir) {
  KnowledgeBaseParts parts = kb.parts();
  fs::create_directories(kb_dir / "assets");
  for (auto& v : parts.visuals) {
    const fs::path source(v.asset_path);
    const fs::path relative = fs::path("assets") / (v.visual_id + source.extension().string());
    if (fs::path(v.asset_path) == relative) continue;
    if (!fs::exists(source)) throw Error(ErrorKind::DanglingAsset, v.visual_id + ": missing " + v.asset_path);
    fs::copy_file(source, kb_dir / relative, fs::copy_options::overwrite_existing);
    v.asset_path = relative.generic_string();
  }
  return KnowledgeBase(std::move(parts));
}

}  // namespace deepwriter
