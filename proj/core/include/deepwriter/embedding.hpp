#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deepwriter/corpus.hpp"
#include "deepwriter/retry.hpp"

namespace deepwriter {

struct EmbedInput {
  enum class Kind { Text, Image };

  Kind kind = Kind::Text;
  std::string value;  // text body, or a filesystem path for images

  static EmbedInput text(std::string s) { return {Kind::Text, std::move(s)}; }
  static EmbedInput image(std::string path) { return {Kind::Image, std::move(path)}; }
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual std::string id() const = 0;
  /// True when image inputs are embedded from pixels rather than captions.
  virtual bool multimodal() const { return false; }
  /// Raw vectors, one per input, in input order. Not necessarily normalized.
  virtual std::vector<std::vector<float>> embed_raw(std::span<const EmbedInput> inputs) = 0;
};

/// Deterministic offline embedder. Each lowercase word token seeds a
/// pseudo-random vector from its 64-bit FNV-1a hash; a text embeds as the sum
/// of its token vectors. Identical texts give identical vectors and texts that
/// share tokens are correlated, which fixtures use to steer similarity.
class HashEmbedder final : public EmbeddingBackend {
 public:
  explicit HashEmbedder(std::size_t dim = 256, std::uint64_t seed = 0);

  std::string id() const override { return "hash-" + std::to_string(dim_); }
  std::vector<std::vector<float>> embed_raw(std::span<const EmbedInput> inputs) override;

  std::size_t dim() const noexcept { return dim_; }

 private:
  void add_token(std::string_view token, std::vector<double>& acc) const;

  std::size_t dim_;
  std::uint64_t seed_;
};

struct HttpEmbedderConfig {
  std::string url;  // full endpoint, e.g. http://host:port/v1/embeddings
  std::string model;
  std::string api_key;
  bool multimodal = false;
  int timeout_seconds = 60;
  std::size_t batch_size = 64;
  RetryPolicy retry;
};

/// Client for the de-facto embeddings wire format:
///   POST {"model": m, "input": [...]}  ->  {"data": [{"embedding": [...]}]}
/// Images are sent as {"image": "data:<mime>;base64,..."} entries.
class HttpEmbedder final : public EmbeddingBackend {
 public:
  explicit HttpEmbedder(HttpEmbedderConfig config);

  std::string id() const override { return "http:" + config_.model; }
  bool multimodal() const override { return config_.multimodal; }
  std::vector<std::vector<float>> embed_raw(std::span<const EmbedInput> inputs) override;

 private:
  HttpEmbedderConfig config_;
};

/// Normalizes to unit length. Throws DegenerateEmbedding on a zero vector.
EmbeddingVector normalize(std::span<const float> v);

/// Embeds inputs through the backend and unit-normalizes each vector.
/// expected_dim, when given, must match every returned vector.
std::vector<EmbeddingVector> embed(std::span<const EmbedInput> inputs, EmbeddingBackend& backend,
                                   std::optional<std::size_t> expected_dim = std::nullopt);

EmbeddingVector embed_text(std::string_view text, EmbeddingBackend& backend,
                           std::optional<std::size_t> expected_dim = std::nullopt);

/// dot(a,b) / (|a||b|), clamped to [-1, 1].
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace deepwriter
