#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace litelong {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents.
std::string file_sha256_hex(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace litelong
