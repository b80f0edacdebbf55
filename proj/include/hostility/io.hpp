#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace hostility {

/// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

/// Hex SHA-256 of an in-memory buffer.
std::string sha256_hex(std::string_view bytes);

/// Shortest decimal that round-trips the double exactly.
std::string format_double(double value);

/// Writes `contents` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

} // namespace hostility
