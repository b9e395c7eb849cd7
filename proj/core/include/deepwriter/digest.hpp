#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace deepwriter {

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view data);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view data) noexcept;

}  // namespace deepwriter
