#pragma once

// JSON encodings shared by persistence, the citation sidecar and the CLI.

#include <nlohmann/json.hpp>

#include "deepwriter/corpus.hpp"
#include "deepwriter/error.hpp"

namespace deepwriter {

inline nlohmann::json bbox_to_json(const BoundingBox& b) { return {b.x0, b.y0, b.x1, b.y1}; }

inline BoundingBox bbox_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorKind::InvalidArgument, "bbox must be an array of four numbers");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

template <typename T>
nlohmann::json optional_to_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json embedding_to_json(const std::optional<EmbeddingVector>& e) {
  if (!e) return nullptr;
  auto arr = nlohmann::json::array();
  for (float x : *e) arr.push_back(x);
  return arr;
}

inline std::optional<EmbeddingVector> embedding_from_json(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  EmbeddingVector v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(x.get<float>());
  return v;
}

}  // namespace deepwriter
