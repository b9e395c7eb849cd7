#include "deepwriter/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "deepwriter/digest.hpp"
#include "deepwriter/text.hpp"
#include "http_transport.hpp"

namespace deepwriter {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string image_data_uri(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read image " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  auto ext = to_lower(std::filesystem::path(path).extension().string());
  std::string mime = "application/octet-stream";
  if (ext == ".png") mime = "image/png";
  else if (ext == ".jpg" || ext == ".jpeg") mime = "image/jpeg";
  else if (ext == ".gif") mime = "image/gif";
  else if (ext == ".webp") mime = "image/webp";
  return "data:" + mime + ";base64," + base64_encode(buf.str());
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ == 0) throw Error(ErrorKind::InvalidArgument, "embedding dimension must be positive");
}

void HashEmbedder::add_token(std::string_view token, std::vector<double>& acc) const {
  std::uint64_t state = fnv1a64(token) ^ seed_;
  for (std::size_t i = 0; i < dim_; ++i) {
    // 53 random bits mapped to [-1, 1).
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    acc[i] += 2.0 * u - 1.0;
  }
}

std::vector<std::vector<float>> HashEmbedder::embed_raw(std::span<const EmbedInput> inputs) {
  std::vector<std::vector<float>> out;
  out.reserve(inputs.size());
  for (const auto& input : inputs) {
    std::vector<double> acc(dim_, 0.0);
    const auto tokens = words(input.value);
    if (tokens.empty()) {
      add_token(input.value, acc);
    } else {
      for (const auto& t : tokens) add_token(t, acc);
    }
    out.emplace_back(acc.begin(), acc.end());
  }
  return out;
}

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw Error(ErrorKind::InvalidArgument, "embedding backend URL is empty");
  if (config_.batch_size == 0) config_.batch_size = 1;
}

std::vector<std::vector<float>> HttpEmbedder::embed_raw(std::span<const EmbedInput> inputs) {
  std::vector<std::vector<float>> out;
  out.reserve(inputs.size());
  for (std::size_t start = 0; start < inputs.size(); start += config_.batch_size) {
    const auto batch = inputs.subspan(start, std::min(config_.batch_size, inputs.size() - start));
    nlohmann::json body = {{"model", config_.model}, {"input", nlohmann::json::array()}};
    for (const auto& in : batch) {
      if (in.kind == EmbedInput::Kind::Image && config_.multimodal) {
        body["input"].push_back({{"image", image_data_uri(in.value)}});
      } else {
        body["input"].push_back(in.value);
      }
    }
    const auto response = with_retries(config_.retry, [&] {
      return http::post_json(config_.url, body.dump(), config_.api_key, config_.timeout_seconds);
    });
    try {
      const auto j = nlohmann::json::parse(response);
      const auto& data = j.at("data");
      if (data.size() != batch.size()) {
        throw Error(ErrorKind::BackendUnavailable, "embedding response has " + std::to_string(data.size()) +
                                                       " vectors for " + std::to_string(batch.size()) +
                                                       " inputs");
      }
      for (const auto& item : data) out.push_back(item.at("embedding").get<std::vector<float>>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::BackendUnavailable, std::string("malformed embedding response: ") + e.what());
    }
  }
  return out;
}

EmbeddingVector normalize(std::span<const float> v) {
  double sq = 0;
  for (float x : v) sq += static_cast<double>(x) * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::DegenerateEmbedding, "cannot normalize a zero or non-finite vector");
  }
  EmbeddingVector out(v.size());
  std::transform(v.begin(), v.end(), out.begin(),
                 [norm](float x) { return static_cast<float>(static_cast<double>(x) / norm); });
  return out;
}

std::vector<EmbeddingVector> embed(std::span<const EmbedInput> inputs, EmbeddingBackend& backend,
                                   std::optional<std::size_t> expected_dim) {
  if (inputs.empty()) throw Error(ErrorKind::InvalidArgument, "embed() needs at least one input");
  auto raw = backend.embed_raw(inputs);
  if (raw.size() != inputs.size()) {
    throw Error(ErrorKind::BackendUnavailable, "backend returned " + std::to_string(raw.size()) +
                                                   " vectors for " + std::to_string(inputs.size()) + " inputs");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (const auto& v : raw) {
    const std::size_t want = expected_dim ? *expected_dim : raw.front().size();
    if (v.size() != want || v.empty()) {
      throw Error(ErrorKind::DimensionalityMismatch,
                  "expected dimension " + std::to_string(want) + ", got " + std::to_string(v.size()));
    }
    out.push_back(normalize(v));
  }
  return out;
}

EmbeddingVector embed_text(std::string_view text, EmbeddingBackend& backend,
                           std::optional<std::size_t> expected_dim) {
  const EmbedInput input = EmbedInput::text(std::string(text));
  return std::move(embed(std::span(&input, 1), backend, expected_dim).front());
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionalityMismatch,
                "cosine of vectors with dimensions " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (!(na > 0) || !(nb > 0)) throw Error(ErrorKind::DegenerateEmbedding, "cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace deepwriter
