#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "deepwriter/prompts.hpp"
#include "deepwriter/retry.hpp"

namespace deepwriter {

struct GenParams {
  double temperature = 0.0;
  int max_tokens = 2048;
};

struct TokenUsage {
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

struct ChatExchange {
  std::string prompt;
  std::string response;
  std::string backend_id;
  std::optional<TokenUsage> token_usage;
};

struct ChatReply {
  std::string text;
  std::optional<TokenUsage> usage;
};

/// Single-shot chat completion. Implementations throw TransientError for
/// retryable failures; backends must be safe to share across threads.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string id() const = 0;
  virtual ChatReply complete(const std::string& prompt, const GenParams& params) = 0;
};

/// Retries transient failures, rejects empty replies, and keeps a transcript.
std::string complete(const std::string& prompt, ChatBackend& backend, const GenParams& params,
                     const RetryPolicy& retry, std::vector<ChatExchange>* transcript = nullptr);

class Gateway {
 public:
  explicit Gateway(ChatBackend& backend, GenParams params = {}, RetryPolicy retry = {})
      : backend_(backend), params_(params), retry_(std::move(retry)) {}

  std::string complete(const std::string& prompt);
  std::string complete(TemplateName name, const Bindings& bindings) { return complete(render(name, bindings)); }

  std::string backend_id() const { return backend_.id(); }
  std::vector<ChatExchange> transcript() const;

 private:
  ChatBackend& backend_;
  GenParams params_;
  RetryPolicy retry_;
  mutable std::mutex mutex_;
  std::vector<ChatExchange> transcript_;
};

/// Fixture-driven backend keyed on the SHA-256 of the rendered prompt.
/// Fuzzy matching also accepts the digest of the whitespace-normalized
/// prompt. A miss goes to the fallback backend, or raises EmptyResponse.
class ScriptedBackend final : public ChatBackend {
 public:
  enum class Match { Strict, Fuzzy };

  ScriptedBackend(std::map<std::string, std::string> responses, Match match = Match::Strict,
                  ChatBackend* fallback = nullptr)
      : responses_(std::move(responses)), match_(match), fallback_(fallback) {}

  /// Reads a JSON object {digest: response}.
  static ScriptedBackend from_file(const std::filesystem::path& path, Match match = Match::Strict,
                                   ChatBackend* fallback = nullptr);

  static std::string digest(std::string_view prompt, Match match);

  std::string id() const override { return "scripted"; }
  ChatReply complete(const std::string& prompt, const GenParams& params) override;

 private:
  std::map<std::string, std::string> responses_;
  Match match_;
  ChatBackend* fallback_;
};

/// Deterministic offline writer that answers each of the seven prompts (and
/// judge prompts) by rule, reusing sentences from the documents it is shown.
/// Content answers keep the [chunk_id] marker after every reused sentence.
class ExtractiveBackend final : public ChatBackend {
 public:
  std::string id() const override { return "extractive"; }
  ChatReply complete(const std::string& prompt, const GenParams& params) override;
};

struct HttpChatConfig {
  std::string url;  // full chat-completions endpoint
  std::string model;
  std::string api_key;
  int timeout_seconds = 120;
};

/// Client for the de-facto chat-completions wire format.
class HttpChatBackend final : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpChatConfig config);
  std::string id() const override { return "http:" + config_.model; }
  ChatReply complete(const std::string& prompt, const GenParams& params) override;

 private:
  HttpChatConfig config_;
};

}  // namespace deepwriter
