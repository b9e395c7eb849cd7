#include "deepwriter/config.hpp"

#include <cstdlib>
#include <fstream>

#include "deepwriter/error.hpp"
#include "deepwriter/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace deepwriter {

namespace {

const char* const kPathKeys[] = {"llm.fixture", "judge.fixture", "caption.fixture"};

json::json_pointer pointer(std::string_view dotted) {
  std::string p;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto dot = dotted.find('.', start);
    p += "/" + std::string(dotted.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return json::json_pointer(p);
}

void collect_keys(const json& node, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& [k, v] : node.items()) {
    const auto key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      collect_keys(v, key, out);
    } else {
      out.push_back(key);
    }
  }
}

json parse_as(const json& like, const std::string& key, const std::string& raw) {
  const auto value = std::string(trim(raw));
  try {
    if (like.is_boolean()) {
      const auto v = to_lower(value);
      if (v == "true" || v == "1" || v == "yes") return true;
      if (v == "false" || v == "0" || v == "no") return false;
    } else if (like.is_number_unsigned()) {
      std::size_t used = 0;
      const auto n = std::stoull(value, &used);
      if (used == value.size() && value.front() != '-') return n;
    } else if (like.is_number_integer()) {
      std::size_t used = 0;
      const auto n = std::stoll(value, &used);
      if (used == value.size()) return n;
    } else if (like.is_number_float()) {
      std::size_t used = 0;
      const auto n = std::stod(value, &used);
      if (used == value.size()) return n;
    } else {
      return raw;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::InvalidArgument, "config key " + key + ": cannot parse \"" + raw + "\"");
}

json checked(const json& like, const std::string& key, const json& value) {
  const bool ok = (like.is_boolean() && value.is_boolean()) || (like.is_string() && value.is_string()) ||
                  (like.is_number_unsigned() &&
                   (value.is_number_unsigned() || (value.is_number_integer() && value.get<std::int64_t>() >= 0))) ||
                  (like.is_number_integer() && !like.is_number_unsigned() && value.is_number_integer()) ||
                  (like.is_number_float() && value.is_number());
  if (!ok) throw Error(ErrorKind::InvalidArgument, "config key " + key + " has the wrong type: " + value.dump());
  if (like.is_number_float()) return value.get<double>();
  if (like.is_number_unsigned()) return value.get<std::uint64_t>();
  return value;
}

BackendSettings backend_of(const json& node) {
  return {node.at("backend").get<std::string>(), node.at("url").get<std::string>(), node.at("model").get<std::string>(),
          node.value("fixture", std::string()), node.at("timeout_seconds").get<int>()};
}

}  // namespace

RetryPolicy Settings::retry_policy() const {
  RetryPolicy p;
  p.max_attempts = retry_max_attempts;
  p.base_backoff = std::chrono::milliseconds(retry_base_delay_ms);
  return p;
}

json default_config() {
  return {
      {"llm",
       {{"backend", "extractive"}, {"url", ""}, {"model", ""}, {"fixture", ""}, {"match", "fuzzy"}, {"fallback", ""},
        {"temperature", 0.0}, {"max_tokens", 2048}, {"timeout_seconds", 120}}},
      {"judge", {{"backend", ""}, {"url", ""}, {"model", ""}, {"fixture", ""}, {"timeout_seconds", 120}}},
      {"embedding",
       {{"backend", "hash"}, {"url", ""}, {"model", ""}, {"dim", 256u}, {"seed", 0u}, {"multimodal", false},
        {"batch_size", 64u}, {"timeout_seconds", 60}}},
      {"caption", {{"backend", "none"}, {"url", ""}, {"model", ""}, {"fixture", ""}, {"timeout_seconds", 120}}},
      {"chunking", {{"target_chars", 1200u}, {"min_chars", 200u}, {"overlap_chars", 100u}}},
      {"retrieval", {{"k_text", 8u}, {"k_visual", 4u}}},
      {"placement", {{"capacity", 1u}}},
      {"composer",
       {{"support_threshold", 0.35}, {"repetition_jaccard", 0.5}, {"summary_ratio", 0.30}, {"allow_empty_sections", true}}},
      {"citation",
       {{"accept_threshold", 0.30}, {"sentence_threshold", 0.60}, {"consistency_jaccard", 0.7},
        {"consistency_score_gap", 0.05}}},
      {"retry", {{"max_attempts", 3}, {"base_delay_ms", 250}}},
  };
}

std::string env_var_for(std::string_view dotted_key) {
  std::string out = "DEEPWRITER_";
  for (char c : dotted_key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

json resolve_config(const ConfigSources& sources) {
  const auto defaults = default_config();
  auto resolved = defaults;
  std::vector<std::string> keys;
  collect_keys(defaults, "", keys);

  if (sources.file) {
    if (!sources.file->is_object()) throw Error(ErrorKind::InvalidArgument, "config file must hold a JSON object");
    std::vector<std::string> given;
    collect_keys(*sources.file, "", given);
    for (const auto& key : given) {
      const auto ptr = pointer(key);
      if (!defaults.contains(ptr) || defaults.at(ptr).is_object()) {
        throw Error(ErrorKind::InvalidArgument, "unknown config key " + key);
      }
      auto value = checked(defaults.at(ptr), key, sources.file->at(ptr));
      const bool is_path = std::find(std::begin(kPathKeys), std::end(kPathKeys), key) != std::end(kPathKeys);
      if (is_path && !value.get<std::string>().empty() && fs::path(value.get<std::string>()).is_relative()) {
        value = (sources.file_dir / value.get<std::string>()).lexically_normal().string();
      }
      resolved[ptr] = value;
    }
  }
  if (sources.getenv) {
    for (const auto& key : keys) {
      if (auto raw = sources.getenv(env_var_for(key))) resolved[pointer(key)] = parse_as(defaults.at(pointer(key)), key, *raw);
    }
  }
  for (const auto& [key, raw] : sources.overrides) {
    const auto ptr = pointer(key);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorKind::InvalidArgument, "unknown config key " + key);
    }
    resolved[ptr] = parse_as(defaults.at(ptr), key, raw);
  }
  return resolved;
}

Settings settings_from_config(const json& c, std::string api_key) {
  Settings s;
  s.llm = backend_of(c.at("llm"));
  s.llm_match = c.at("llm").at("match").get<std::string>();
  if (s.llm_match != "strict" && s.llm_match != "fuzzy") {
    throw Error(ErrorKind::InvalidArgument, "llm.match must be strict or fuzzy");
  }
  s.llm_fallback = c.at("llm").at("fallback").get<std::string>();
  if (!s.llm_fallback.empty() && s.llm_fallback != "extractive") {
    throw Error(ErrorKind::InvalidArgument, "llm.fallback must be empty or extractive");
  }
  s.gen.temperature = c.at("llm").at("temperature").get<double>();
  s.gen.max_tokens = c.at("llm").at("max_tokens").get<int>();
  s.judge = backend_of(c.at("judge"));
  s.embedding = backend_of(c.at("embedding"));
  s.embedding_dim = c.at("embedding").at("dim").get<std::size_t>();
  s.embedding_seed = c.at("embedding").at("seed").get<std::uint64_t>();
  s.embedding_multimodal = c.at("embedding").at("multimodal").get<bool>();
  s.embedding_batch_size = c.at("embedding").at("batch_size").get<std::size_t>();
  s.caption = backend_of(c.at("caption"));
  s.chunking.target_chars = c.at("chunking").at("target_chars").get<std::size_t>();
  s.chunking.min_chars = c.at("chunking").at("min_chars").get<std::size_t>();
  s.chunking.overlap_chars = c.at("chunking").at("overlap_chars").get<std::size_t>();
  s.chunking.validate();
  s.retrieval.k_text = c.at("retrieval").at("k_text").get<std::size_t>();
  s.retrieval.k_visual = c.at("retrieval").at("k_visual").get<std::size_t>();
  s.placement_capacity = c.at("placement").at("capacity").get<std::size_t>();
  const auto& comp = c.at("composer");
  s.composer.support_threshold = comp.at("support_threshold").get<double>();
  s.composer.repetition_jaccard = comp.at("repetition_jaccard").get<double>();
  s.composer.summary_ratio = comp.at("summary_ratio").get<double>();
  s.allow_empty_sections = comp.at("allow_empty_sections").get<bool>();
  const auto& cit = c.at("citation");
  s.citation.accept_threshold = cit.at("accept_threshold").get<double>();
  s.citation.sentence_threshold = cit.at("sentence_threshold").get<double>();
  s.citation.consistency_jaccard = cit.at("consistency_jaccard").get<double>();
  s.citation.consistency_score_gap = cit.at("consistency_score_gap").get<double>();
  s.retry_max_attempts = c.at("retry").at("max_attempts").get<int>();
  s.retry_base_delay_ms = c.at("retry").at("base_delay_ms").get<int>();
  s.api_key = std::move(api_key);
  if (s.retrieval.k_text == 0 || s.retrieval.k_visual == 0 || s.placement_capacity == 0 || s.embedding_dim == 0) {
    throw Error(ErrorKind::InvalidArgument, "k values, capacity and embedding.dim must be >= 1");
  }
  return s;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

Settings load_settings(const std::optional<fs::path>& explicit_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::optional<fs::path> path = explicit_path;
  if (!path) {
    if (auto env = process_env(std::string(kConfigEnv)); env && !env->empty()) path = *env;
  }
  if (!path && fs::is_regular_file(kConfigFileName)) path = fs::path(kConfigFileName);

  ConfigSources sources;
  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read config " + path->string());
    try {
      sources.file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::InvalidArgument, path->string() + ": " + e.what());
    }
    sources.file_dir = fs::absolute(*path).parent_path();
  }
  sources.getenv = process_env;
  sources.overrides = overrides;
  return settings_from_config(resolve_config(sources), process_env(std::string(kApiKeyEnv)).value_or(""));
}

}  // namespace deepwriter
