#include <gtest/gtest.h>

#include "deepwriter/composer.hpp"
#include "deepwriter/diagnostics.hpp"
#include "deepwriter/error.hpp"
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

const std::vector<std::string> kTexts = {
    "Container freight rates tripled during the year as ports were congested.",
    "Liquefied natural gas prices in Europe reached record highs.",
    "Digitally delivered services exports grew faster than goods trade.",
    "Merchandise trade volume rebounded strongly after the pandemic contraction.",
    "Policy makers recommend investment in resilient supply chains.",
};

SectionContext context_of(const KnowledgeBase& kb) {
  SectionContext ctx{"Analysis", {}, {}};
  for (const auto& c : kb.chunks()) ctx.chunks.push_back({&c, 0.5});
  return ctx;
}

std::string repeat(const std::string& unit, std::size_t times) {
  std::string out;
  for (std::size_t i = 0; i < times; ++i) out += unit;
  return out;
}

SectionText section_of(const std::string& body) { return {"Analysis", {{body, {}, {}}}, "draft", false}; }

}  // namespace

TEST(Draft, FixtureEcho) {
  HashEmbedder embedder(64);
  const auto kb = dwtest::kb_from_texts(kTexts, {}, embedder);
  dwtest::FnBackend backend([](const std::string&) { return "The scripted draft.\n"; });
  Gateway gw(backend);
  const auto d = draft_section("Analysis", context_of(kb), {}, gw, "q");
  EXPECT_EQ(d.text, "The scripted draft.");
  EXPECT_FALSE(d.thin);
}

TEST(Draft, PromptCarriesEveryContextId) {
  HashEmbedder embedder(64);
  const auto kb = dwtest::kb_from_texts(kTexts, {}, embedder);
  dwtest::FnBackend backend([](const std::string&) { return "d"; });
  Gateway gw(backend);
  draft_section("Analysis", context_of(kb), {}, gw, "q");
  ASSERT_EQ(backend.prompts.size(), 1u);
  for (const auto& c : kb.chunks()) {
    EXPECT_NE(backend.prompts[0].find("[" + c.chunk_id + "]"), std::string::npos) << c.chunk_id;
  }
}

TEST(Draft, EmptyContext) {
  dwtest::FnBackend backend([](const std::string&) { return "From the title alone."; });
  Gateway gw(backend);
  const SectionContext empty{"Outlook", {}, {}};
  const auto d = draft_section("Outlook", empty, {}, gw, "q", true);
  EXPECT_TRUE(d.thin);
  EXPECT_EQ(d.text, "From the title alone.");
  EXPECT_EQ(kind_of([&] { draft_section("Outlook", empty, {}, gw, "q", false); }), ErrorKind::InvalidArgument);
}

TEST(WriteSection, MarkerRecoveredAndStripped) {
  Chunk c7;
  c7.chunk_id = "c7";
  c7.doc_id = "d";
  c7.text = "Freight rates tripled.";
  HashEmbedder embedder(64);
  c7.embedding = embed_text(c7.text, embedder);
  const SectionContext ctx{"Analysis", {{&c7, 0.9}}, {}};
  dwtest::FnBackend backend([](const std::string&) {
    return "## Analysis\n\nOpening words without a source.\n\nFreight rates tripled [c7]. Ports were busy [42].";
  });
  Gateway gw(backend);
  const auto s = write_section("Analysis", {"draft", false}, ctx, {}, gw, "q", embedder);
  ASSERT_EQ(s.paragraphs.size(), 2u);
  EXPECT_EQ(s.paragraphs[1].text, "Freight rates tripled. Ports were busy.");
  EXPECT_EQ(s.paragraphs[1].supporting_chunk_ids, (std::vector<std::string>{"c7"}));
  EXPECT_EQ(s.draft, "draft");
  EXPECT_NE(backend.prompts[0].find("[c7] Freight rates tripled."), std::string::npos);
}

TEST(WriteSection, MarkerlessParagraphUsesCosineFallback) {
  HashEmbedder embedder(256);
  const auto kb = dwtest::kb_from_texts(kTexts, {}, embedder);
  const std::string para = "Liquefied natural gas prices in Europe reached highs.";
  // Brute force: exactly one context chunk clears the 0.35 threshold.
  const auto pv = embed_text(para, embedder);
  std::vector<std::string> above;
  for (const auto& c : kb.chunks()) {
    if (dwtest::oracle_cosine(pv, *c.embedding) >= 0.35) above.push_back(c.chunk_id);
  }
  ASSERT_EQ(above, (std::vector<std::string>{"c000002"}));
  dwtest::FnBackend backend([&](const std::string&) { return para; });
  Gateway gw(backend);
  const auto s = write_section("Analysis", {"draft", false}, context_of(kb), {}, gw, "q", embedder);
  ASSERT_EQ(s.paragraphs.size(), 1u);
  EXPECT_EQ(s.paragraphs[0].supporting_chunk_ids, above);
}

TEST(WriteSection, RepetitionWarning) {
  HashEmbedder embedder(64);
  const auto kb = dwtest::kb_from_texts(kTexts, {}, embedder);
  const std::string text = "Trade volumes rebounded strongly across every major region this year.";
  // Identical word sequences give trigram Jaccard 1.0 > 0.5.
  ASSERT_GT(trigram_jaccard(text, text), 0.5);
  dwtest::FnBackend backend([&](const std::string&) { return text; });
  Gateway gw(backend);
  Diagnostics diag;
  RunningSummary history{{"Unrelated earlier summary about energy.", text}};
  write_section("Analysis", {"draft", false}, context_of(kb), history, gw, "q", embedder, {}, &diag);
  EXPECT_EQ(diag.count(), 1u);
  EXPECT_NE(backend.prompts[0].find(text), std::string::npos);
}

TEST(WriteSection, HeadingsOnlyIsEmptyResponse) {
  HashEmbedder embedder(64);
  const auto kb = dwtest::kb_from_texts(kTexts, {}, embedder);
  dwtest::FnBackend backend([](const std::string&) { return "# Analysis\n## More"; });
  Gateway gw(backend);
  EXPECT_EQ(kind_of([&] { write_section("Analysis", {"draft", false}, context_of(kb), {}, gw, "q", embedder); }),
            ErrorKind::EmptyResponse);
}

TEST(WriteSection, SupportsBelongToContext) {
  HashEmbedder embedder(64);
  const auto kb = dwtest::kb_from_texts(kTexts, {}, embedder);
  dwtest::FnBackend backend([](const std::string&) {
    return "Rates rose [c000001] [c999999]. Gas peaked [c000002].\n\nServices grew [c000003].";
  });
  Gateway gw(backend);
  const auto s = write_section("Analysis", {"draft", false}, context_of(kb), {}, gw, "q", embedder);
  for (const auto& p : s.paragraphs) {
    for (const auto& id : p.supporting_chunk_ids) EXPECT_NE(kb.find_chunk(id), nullptr) << id;
    EXPECT_EQ(p.text.find('['), std::string::npos);
  }
  EXPECT_EQ(s.paragraphs[0].supporting_chunk_ids, (std::vector<std::string>{"c000001", "c000002"}));
}

TEST(Summary, BudgetIsExactThirtyPercent) {
  EXPECT_EQ(summary_budget(1000), 300u);
  EXPECT_EQ(summary_budget(999), 299u);
  EXPECT_EQ(summary_budget(10), 3u);
  EXPECT_EQ(summary_budget(0), 0u);
}

TEST(Summary, UnderBoundAcceptedUnchanged) {
  const auto body = repeat("abcdefghi ", 99) + "abcdefghi.";
  ASSERT_EQ(body.size(), 1000u);
  const auto summary = repeat("x", 249) + ".";
  dwtest::FnBackend backend([&](const std::string&) { return summary; });
  Gateway gw(backend);
  EXPECT_EQ(summarize_section(section_of(body), "q", gw), summary);
  EXPECT_EQ(backend.prompts.size(), 1u);
}

TEST(Summary, OverBoundTwiceIsTruncatedAtWordBreak) {
  const auto body = repeat("abcdefghi ", 99) + "abcdefghi.";
  const auto reply = repeat("abcd ", 79) + "abcd.";
  ASSERT_EQ(reply.size(), 400u);
  dwtest::FnBackend backend([&](const std::string&) { return reply; });
  Gateway gw(backend);
  Diagnostics diag;
  const auto out = summarize_section(section_of(body), "q", gw, 0.30, &diag);
  // 60 whole words of 4 letters and 59 spaces.
  EXPECT_EQ(out, repeat("abcd ", 59) + "abcd");
  EXPECT_EQ(out.size(), 299u);
  ASSERT_EQ(backend.prompts.size(), 2u);
  EXPECT_NE(backend.prompts[1].find("Shorten it to at most 300 characters."), std::string::npos);
  EXPECT_EQ(diag.count(), 1u);
}

TEST(Summary, RetrySucceeds) {
  const auto body = repeat("abcdefghi ", 99) + "abcdefghi.";
  int calls = 0;
  dwtest::FnBackend backend([&](const std::string&) { return ++calls == 1 ? repeat("y", 400) : "short one"; });
  Gateway gw(backend);
  EXPECT_EQ(summarize_section(section_of(body), "q", gw), "short one");
}

TEST(Summary, NoneMeansEmptyEntry) {
  dwtest::FnBackend backend([](const std::string&) { return "None"; });
  Gateway gw(backend);
  EXPECT_EQ(summarize_section(section_of("Some body text here."), "q", gw), "");
}

TEST(Summary, TruncateAtWord) {
  EXPECT_EQ(truncate_at_word("alpha beta gamma", 12), "alpha beta");
  EXPECT_EQ(truncate_at_word("alpha beta gamma", 10), "alpha beta");
  EXPECT_EQ(truncate_at_word("alphabetagamma", 5), "alpha");
  EXPECT_EQ(truncate_at_word("short", 50), "short");
}

TEST(Summary, BoundHoldsForRandomReplies) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    std::string body, reply;
    for (std::size_t w = 0, n = 5 + rng() % 200; w < n; ++w) body += dwtest::random_word(rng) + " ";
    for (std::size_t w = 0, n = 1 + rng() % 200; w < n; ++w) reply += dwtest::random_word(rng) + " ";
    dwtest::FnBackend backend([&](const std::string&) { return reply; });
    Gateway gw(backend);
    const auto section = section_of(std::string(trim(body)));
    const auto out = summarize_section(section, "q", gw);
    EXPECT_LE(utf8_length(out), summary_budget(utf8_length(section.body())));
  }
}
