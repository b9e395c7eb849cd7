#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "deepwriter/citation.hpp"
#include "deepwriter/composer.hpp"
#include "deepwriter/ingestion.hpp"
#include "deepwriter/retrieval.hpp"

namespace deepwriter {

inline constexpr std::string_view kConfigFileName = "deepwriter.json";
inline constexpr std::string_view kConfigEnv = "DEEPWRITER_CONFIG";
inline constexpr std::string_view kApiKeyEnv = "DEEPWRITER_API_KEY";

struct BackendSettings {
  std::string backend;  // llm/judge: extractive | scripted | http; embedding: hash | http; caption: none | scripted | http
  std::string url;
  std::string model;
  std::string fixture;  // scripted fixture file
  int timeout_seconds = 120;
};

struct Settings {
  BackendSettings llm;
  std::string llm_match = "fuzzy";
  std::string llm_fallback;  // "extractive" answers prompts the scripted fixture misses
  GenParams gen;
  BackendSettings judge;  // empty backend means: same as llm
  BackendSettings embedding;
  std::size_t embedding_dim = 256;
  std::uint64_t embedding_seed = 0;
  bool embedding_multimodal = false;
  std::size_t embedding_batch_size = 64;
  BackendSettings caption;
  ChunkingPolicy chunking;
  RetrievalLimits retrieval;
  std::size_t placement_capacity = 1;
  ComposerOptions composer;
  bool allow_empty_sections = true;
  CitationOptions citation;
  int retry_max_attempts = 3;
  int retry_base_delay_ms = 250;
  std::string api_key;  // from the environment only

  RetryPolicy retry_policy() const;
};

/// Every key with its default value, as a nested object.
nlohmann::json default_config();

/// "llm.url" -> "DEEPWRITER_LLM_URL".
std::string env_var_for(std::string_view dotted_key);

struct ConfigSources {
  std::optional<nlohmann::json> file;
  std::filesystem::path file_dir;  // relative fixture paths resolve against it
  std::function<std::optional<std::string>(const std::string&)> getenv;
  std::vector<std::pair<std::string, std::string>> overrides;  // --set key=value
};

/// Merges default < file < environment < overrides, key by key. Values from
/// strings are parsed to the type of the default. Unknown keys are rejected.
nlohmann::json resolve_config(const ConfigSources& sources);

Settings settings_from_config(const nlohmann::json& resolved, std::string api_key = {});

/// Reads the process environment. The file is explicit_path, else
/// $DEEPWRITER_CONFIG, else ./deepwriter.json when it exists.
Settings load_settings(const std::optional<std::filesystem::path>& explicit_path,
                       const std::vector<std::pair<std::string, std::string>>& overrides);

std::optional<std::string> process_env(const std::string& name);

}  // namespace deepwriter
