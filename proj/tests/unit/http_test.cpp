#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <nlohmann/json.hpp>
#include <thread>

#include "deepwriter/diagnostics.hpp"
#include "deepwriter/embedding.hpp"
#include "deepwriter/error.hpp"
#include "deepwriter/gateway.hpp"
#include "deepwriter/ingestion.hpp"
#include "support.hpp"

using namespace deepwriter;
using nlohmann::json;

namespace {

// Local stand-in for the chat and embedding services.
class FakeService {
 public:
  FakeService() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth = req.get_header_value("Authorization");
      last_body = json::parse(req.body);
      if (fail_next > 0) {
        --fail_next;
        res.status = 503;
        return;
      }
      if (bad_request) {
        res.status = 400;
        res.set_content("bad", "text/plain");
        return;
      }
      const json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", chat_reply}}}}}},
                          {"usage", {{"prompt_tokens", 7}, {"completion_tokens", 3}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
      last_body = json::parse(req.body);
      json data = json::array();
      int i = 0;
      for (const auto& in : last_body.at("input")) {
        (void)in;
        data.push_back({{"embedding", {3.0 + i, 4.0}}, {"index", i}});
        ++i;
      }
      ++embedding_requests;
      res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeService() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

  std::string chat_reply = "hello";
  std::atomic<int> fail_next{0};
  bool bad_request = false;
  std::string last_auth;
  json last_body;
  int embedding_requests = 0;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

RetryPolicy no_sleep(int attempts = 3) {
  RetryPolicy p;
  p.max_attempts = attempts;
  p.sleep = [](std::chrono::milliseconds) {};
  return p;
}

}  // namespace

TEST(HttpChat, SendsWireFormatAndReadsContent) {
  FakeService svc;
  HttpChatBackend backend({svc.url("/v1/chat/completions"), "m1", "secret", 5});
  Gateway gw(backend, {0.0, 512}, no_sleep());
  EXPECT_EQ(gw.complete("prompt text"), "hello");
  EXPECT_EQ(svc.last_auth, "Bearer secret");
  EXPECT_EQ(svc.last_body.at("model"), "m1");
  EXPECT_EQ(svc.last_body.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(svc.last_body.at("messages").at(0).at("content"), "prompt text");
  EXPECT_EQ(svc.last_body.at("max_tokens"), 512);
  ASSERT_TRUE(gw.transcript().at(0).token_usage);
  EXPECT_EQ(gw.transcript().at(0).token_usage->prompt_tokens, 7);
}

TEST(HttpChat, RetriesServerErrors) {
  FakeService svc;
  svc.fail_next = 2;
  HttpChatBackend backend({svc.url("/v1/chat/completions"), "m", "", 5});
  Gateway gw(backend, {}, no_sleep());
  EXPECT_EQ(gw.complete("p"), "hello");
  EXPECT_EQ(svc.fail_next, 0);
}

TEST(HttpChat, ClientErrorIsNotRetried) {
  FakeService svc;
  svc.bad_request = true;
  HttpChatBackend backend({svc.url("/v1/chat/completions"), "m", "", 5});
  Gateway gw(backend, {}, no_sleep());
  try {
    gw.complete("p");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BackendUnavailable);
  }
}

TEST(HttpChat, UnreachableServiceIsBackendUnavailable) {
  HttpChatBackend backend({"http://127.0.0.1:1/v1/chat/completions", "m", "", 1});
  Gateway gw(backend, {}, no_sleep(2));
  try {
    gw.complete("p");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BackendUnavailable);
  }
}

TEST(HttpEmbedder, BatchesAndNormalizes) {
  FakeService svc;
  HttpEmbedderConfig cfg;
  cfg.url = svc.url("/v1/embeddings");
  cfg.model = "e1";
  cfg.batch_size = 2;
  cfg.retry = no_sleep();
  HttpEmbedder embedder(cfg);
  const std::vector<EmbedInput> in{EmbedInput::text("a"), EmbedInput::text("b"), EmbedInput::text("c")};
  const auto out = embed(in, embedder);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(svc.embedding_requests, 2);
  EXPECT_NEAR(out[0][0], 0.6, 1e-6);
  EXPECT_NEAR(out[0][1], 0.8, 1e-6);
  EXPECT_EQ(svc.last_body.at("model"), "e1");
}

TEST(HttpCaptioner, SendsImageAndReturnsCaption) {
  FakeService svc;
  svc.chat_reply = "  A bar chart of exports.  ";
  HttpCaptionerConfig cfg;
  cfg.url = svc.url("/v1/chat/completions");
  cfg.model = "vl";
  cfg.retry = no_sleep();
  HttpCaptioner captioner(cfg);
  const auto asset = (dwtest::fixture_dir() / "corpus" / "assets" / "wtr2021_regional_table.png").string();
  EXPECT_EQ(captioner.caption({"v1", VisualKind::Chart, 1, asset}), "A bar chart of exports.");
  const auto& parts = svc.last_body.at("messages").at(0).at("content");
  EXPECT_EQ(parts.at(1).at("type"), "image_url");
  EXPECT_EQ(parts.at(1).at("image_url").at("url").get<std::string>().rfind("data:image/png;base64,", 0), 0u);
}
