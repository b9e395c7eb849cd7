#include <gtest/gtest.h>

#include <map>

#include "deepwriter/config.hpp"
#include "deepwriter/error.hpp"
#include "support.hpp"

using namespace deepwriter;
using nlohmann::json;

namespace {

ConfigSources with_env(std::map<std::string, std::string> env) {
  ConfigSources s;
  s.getenv = [env](const std::string& name) -> std::optional<std::string> {
    if (auto it = env.find(name); it != env.end()) return it->second;
    return std::nullopt;
  };
  return s;
}

}  // namespace

TEST(Config, DefaultsResolveToSettings) {
  const auto s = settings_from_config(resolve_config({}));
  EXPECT_EQ(s.llm.backend, "extractive");
  EXPECT_EQ(s.embedding_dim, 256u);
  EXPECT_EQ(s.retrieval.k_text, 8u);
  EXPECT_EQ(s.retrieval.k_visual, 4u);
  EXPECT_EQ(s.placement_capacity, 1u);
  EXPECT_DOUBLE_EQ(s.composer.summary_ratio, 0.30);
  EXPECT_DOUBLE_EQ(s.citation.accept_threshold, 0.30);
  EXPECT_DOUBLE_EQ(s.citation.sentence_threshold, 0.60);
  EXPECT_EQ(s.retry_policy().max_attempts, 3);
}

TEST(Config, EnvVarNames) {
  EXPECT_EQ(env_var_for("llm.url"), "DEEPWRITER_LLM_URL");
  EXPECT_EQ(env_var_for("retrieval.k_text"), "DEEPWRITER_RETRIEVAL_K_TEXT");
}

TEST(Config, PrecedencePerKey) {
  auto sources = with_env({{"DEEPWRITER_RETRIEVAL_K_TEXT", "5"}, {"DEEPWRITER_RETRIEVAL_K_VISUAL", "6"}});
  sources.file = json{{"retrieval", {{"k_text", 3}, {"k_visual", 3}}}, {"placement", {{"capacity", 2}}}};
  sources.overrides = {{"retrieval.k_visual", "7"}};
  const auto c = resolve_config(sources);
  EXPECT_EQ(c["retrieval"]["k_text"], 5);      // env over file
  EXPECT_EQ(c["retrieval"]["k_visual"], 7);    // --set over env
  EXPECT_EQ(c["placement"]["capacity"], 2);    // file over default
  EXPECT_EQ(c["embedding"]["dim"], 256);       // default
}

TEST(Config, UnknownKeysRejected) {
  ConfigSources file_typo;
  file_typo.file = json{{"retrieval", {{"k_txt", 3}}}};
  EXPECT_THROW(resolve_config(file_typo), Error);
  ConfigSources set_typo;
  set_typo.overrides = {{"llm.modle", "x"}};
  EXPECT_THROW(resolve_config(set_typo), Error);
}

TEST(Config, TypesChecked) {
  ConfigSources bad_file;
  bad_file.file = json{{"retrieval", {{"k_text", "three"}}}};
  EXPECT_THROW(resolve_config(bad_file), Error);
  ConfigSources bad_set;
  bad_set.overrides = {{"retrieval.k_text", "-1"}};
  EXPECT_THROW(resolve_config(bad_set), Error);
  ConfigSources flag;
  flag.overrides = {{"embedding.multimodal", "yes"}, {"composer.summary_ratio", "0.25"}};
  const auto c = resolve_config(flag);
  EXPECT_EQ(c["embedding"]["multimodal"], true);
  EXPECT_DOUBLE_EQ(c["composer"]["summary_ratio"].get<double>(), 0.25);
}

TEST(Config, ZeroCapacityRejected) {
  ConfigSources s;
  s.overrides = {{"placement.capacity", "0"}};
  EXPECT_THROW(settings_from_config(resolve_config(s)), Error);
}

TEST(Config, FixturePathsRelativeToConfigFile) {
  ConfigSources s;
  s.file = json{{"llm", {{"fixture", "llm_script.json"}}}, {"caption", {{"fixture", "/abs/captions.json"}}}};
  s.file_dir = "/etc/dw";
  const auto c = resolve_config(s);
  EXPECT_EQ(c["llm"]["fixture"], "/etc/dw/llm_script.json");
  EXPECT_EQ(c["caption"]["fixture"], "/abs/captions.json");
}

TEST(Config, LoadsFixtureFile) {
  const auto s = load_settings(dwtest::fixture_dir() / "deepwriter.json", {});
  EXPECT_EQ(s.llm.backend, "scripted");
  EXPECT_EQ(s.llm_match, "strict");
  EXPECT_EQ(std::filesystem::path(s.llm.fixture), dwtest::fixture_dir() / "llm_script.json");
  EXPECT_EQ(s.chunking.target_chars, 240u);
  EXPECT_EQ(s.retry_max_attempts, 1);
}

TEST(Config, MissingFileIsIo) {
  try {
    load_settings(std::filesystem::path("/nonexistent/deepwriter.json"), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Io);
  }
}
