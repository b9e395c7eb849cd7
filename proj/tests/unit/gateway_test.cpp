#include <gtest/gtest.h>

#include "deepwriter/digest.hpp"
#include "deepwriter/error.hpp"
#include "deepwriter/gateway.hpp"
#include "deepwriter/prompts.hpp"
#include "deepwriter/text.hpp"
#include "support.hpp"

using namespace deepwriter;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::InvalidArgument;
}

bool ends_with(std::string_view s, std::string_view tail) {
  return s.size() >= tail.size() && s.substr(s.size() - tail.size()) == tail;
}

class Flaky : public ChatBackend {
 public:
  explicit Flaky(int failures, std::string reply = "ok") : failures_(failures), reply_(std::move(reply)) {}
  std::string id() const override { return "flaky"; }
  ChatReply complete(const std::string&, const GenParams&) override {
    ++calls;
    if (calls <= failures_) throw TransientError("503");
    return {reply_, {}};
  }
  int calls = 0;

 private:
  int failures_;
  std::string reply_;
};

RetryPolicy recording(std::vector<long>* delays, int attempts = 3) {
  RetryPolicy p;
  p.max_attempts = attempts;
  p.sleep = [delays](std::chrono::milliseconds d) { delays->push_back(d.count()); };
  return p;
}

}  // namespace

// SHA-256 of each template body, computed from the prompt text outside the
// library and pinned here.
TEST(Templates, ChecksumsArePinned) {
  const std::map<std::string, std::string> pinned = {
      {"rewrite", "50674f11d578480fed61f328ce06e188fad34f2ab46404e39b9d781b1a30fad4"},
      {"decompose", "702394c4ac6b5eacaf256ab89bf420a49772acd8bbcc44cc77fd9969f174b5ff"},
      {"section_titles", "b8ab65cabc72dbcbdb886ac32461d6fa1256f11780561e6c9d5308bc67e8a150"},
      {"section_draft", "58ed2d61c7d44d0f78e49aec7f9a518e5076bc07628b8c666b7adebc5ce33352"},
      {"cluster", "0fdda3a6de6144b201c95fc18e4e7e09e9cea870914bab80c6a032a3820a5f39"},
      {"section_content", "b3d83f8db59225762653590f88f3eac33f0e5a45a6b7b5cdf27c2263b0b63d5d"},
      {"summarize", "2f63cccfe8b08c9bbc775056f655e37a3287356958eeba8954b3882294a2732a"},
  };
  ASSERT_EQ(all_templates().size(), 7u);
  for (const auto& t : all_templates()) {
    EXPECT_EQ(sha256_hex(t.body), pinned.at(std::string(t.id))) << t.id;
    EXPECT_EQ(parse_template_name(t.id), t.name);
  }
}

TEST(Templates, EveryPlaceholderIsDeclared) {
  for (const auto& t : all_templates()) {
    Bindings b;
    for (auto p : t.parameters) b.emplace(std::string(p), "X");
    const auto text = render(t.name, b);
    for (auto p : t.parameters) {
      EXPECT_EQ(text.find("{" + std::string(p) + "}"), std::string::npos) << t.id << " " << p;
    }
  }
}

TEST(Render, RewriteEndsWithCue) {
  const auto text = render(TemplateName::Rewrite, {{"query", "Q"}});
  EXPECT_NE(text.find("Q"), std::string::npos);
  EXPECT_TRUE(ends_with(trim(text), "Your rewritten query:"));
}

TEST(Render, DecomposeAsksForThreeToFive) {
  const auto text = render(TemplateName::Decompose, {{"query", "Q"}});
  EXPECT_NE(text.find("3-5 more specific, related sub-queries"), std::string::npos);
}

TEST(Render, MissingBinding) {
  EXPECT_EQ(kind_of([] { render(TemplateName::Cluster, {{"query", "q"}, {"doc", "d"}}); }),
            ErrorKind::MissingBinding);
}

TEST(Render, BoundValuesAreNotRescanned) {
  const auto text = render(TemplateName::Rewrite, {{"query", "{query} stays"}});
  EXPECT_NE(text.find("{query} stays"), std::string::npos);
}

TEST(Render, InjectiveInBindings) {
  std::mt19937_64 rng(3);
  std::map<std::string, std::string> by_text;
  for (int i = 0; i < 200; ++i) {
    const auto q = dwtest::random_word(rng) + " " + dwtest::random_word(rng);
    const auto [it, inserted] = by_text.emplace(render(TemplateName::Rewrite, {{"query", q}}), q);
    EXPECT_EQ(it->second, q);
  }
}

TEST(NumberedList, CanonicalForm) {
  EXPECT_EQ(parse_numbered_list("1. A\n2. B\n3. C", 3, 5), (std::vector<std::string>{"A", "B", "C"}));
}

TEST(NumberedList, TooFew) {
  EXPECT_EQ(kind_of([] { parse_numbered_list("- A\n- B", 3, 5); }), ErrorKind::MalformedResponse);
}

TEST(NumberedList, MixedMarkers) {
  EXPECT_EQ(parse_numbered_list("1) A\n\n2) B\n3)C\n4. D", 3, 5),
            (std::vector<std::string>{"A", "B", "C", "D"}));
}

TEST(NumberedList, TooMany) {
  EXPECT_EQ(kind_of([] { parse_numbered_list("a\nb\nc\nd\ne\nf", 3, 5); }), ErrorKind::MalformedResponse);
}

TEST(NumberedList, FormatThenParseIsIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> items(1 + rng() % 8);
    for (auto& s : items) s = dwtest::random_word(rng) + " " + dwtest::random_word(rng);
    EXPECT_EQ(parse_numbered_list(format_numbered_list(items), 1, 8), items);
  }
}

TEST(Scripted, ReturnsCannedAnswerByDigest) {
  const std::string prompt = render(TemplateName::Rewrite, {{"query", "WTO trade 2024?"}});
  ScriptedBackend backend(std::map<std::string, std::string>{{sha256_hex(prompt), "canned"}});
  Gateway gw(backend);
  EXPECT_EQ(gw.complete(prompt), "canned");
  EXPECT_EQ(gw.complete(prompt), "canned");
  EXPECT_EQ(gw.transcript().size(), 2u);
  EXPECT_EQ(gw.transcript()[0].backend_id, "scripted");
}

TEST(Scripted, StrictMissIsEmptyResponse) {
  ScriptedBackend backend(std::map<std::string, std::string>{});
  Gateway gw(backend);
  EXPECT_EQ(kind_of([&] { gw.complete("unknown"); }), ErrorKind::EmptyResponse);
}

TEST(Scripted, FuzzyIgnoresWhitespace) {
  ScriptedBackend backend(std::map<std::string, std::string>{{ScriptedBackend::digest("a  b\n c", ScriptedBackend::Match::Fuzzy), "yes"}},
                          ScriptedBackend::Match::Fuzzy);
  Gateway gw(backend);
  EXPECT_EQ(gw.complete("a b c"), "yes");
  ScriptedBackend strict(std::map<std::string, std::string>{{ScriptedBackend::digest("a  b\n c", ScriptedBackend::Match::Fuzzy), "yes"}});
  Gateway sgw(strict);
  EXPECT_EQ(kind_of([&] { sgw.complete("a b \n c"); }), ErrorKind::EmptyResponse);
}

TEST(Scripted, MissGoesToFallback) {
  Flaky fallback(0, "from fallback");
  ScriptedBackend backend(std::map<std::string, std::string>{}, ScriptedBackend::Match::Strict, &fallback);
  Gateway gw(backend);
  EXPECT_EQ(gw.complete("anything"), "from fallback");
}

TEST(Scripted, FromFile) {
  dwtest::TempDir dir;
  dwtest::write_file(dir.path() / "s.json", R"({")" + sha256_hex("p") + R"(": "r"})");
  auto backend = ScriptedBackend::from_file(dir.path() / "s.json");
  Gateway gw(backend);
  EXPECT_EQ(gw.complete("p"), "r");
}

TEST(Complete, RetriesTransientWithExponentialBackoff) {
  Flaky backend(2);
  std::vector<long> delays;
  EXPECT_EQ(complete("p", backend, {}, recording(&delays)), "ok");
  EXPECT_EQ(backend.calls, 3);
  EXPECT_EQ(delays, (std::vector<long>{250, 500}));
}

TEST(Complete, GivesUpAsBackendUnavailable) {
  Flaky backend(5);
  std::vector<long> delays;
  EXPECT_EQ(kind_of([&] { complete("p", backend, {}, recording(&delays)); }), ErrorKind::BackendUnavailable);
  EXPECT_EQ(backend.calls, 3);
}

TEST(Complete, BlankReplyIsEmptyResponse) {
  Flaky backend(0, "  \n");
  std::vector<long> delays;
  EXPECT_EQ(kind_of([&] { complete("p", backend, {}, recording(&delays)); }), ErrorKind::EmptyResponse);
}

TEST(Extractive, AnswersEveryTemplate) {
  ExtractiveBackend backend;
  Gateway gw(backend);
  const std::vector<std::pair<TemplateName, Bindings>> prompts = {
      {TemplateName::Rewrite, {{"query", "trade 2021?"}}},
      {TemplateName::Decompose, {{"query", "How did trade evolve in 2021?"}}},
      {TemplateName::SectionTitles, {{"query", "How did trade evolve in 2021?"}}},
      {TemplateName::Cluster, {{"query", "q"}, {"doc", "World trade grew"}, {"sections", "Trade\nEnergy"}}},
  };
  for (const auto& [name, b] : prompts) {
    const auto a = gw.complete(name, b);
    EXPECT_FALSE(trim(a).empty());
    EXPECT_EQ(a, gw.complete(name, b));
  }
  EXPECT_EQ(gw.complete(TemplateName::Cluster,
                        {{"query", "q"}, {"doc", "World trade grew strongly"}, {"sections", "Energy Markets\nWorld Trade"}}),
            "World Trade");
  const auto decomposed = parse_numbered_list(gw.complete(TemplateName::Decompose, {{"query", "How did trade evolve?"}}), 3, 5);
  EXPECT_GE(decomposed.size(), 3u);
}
