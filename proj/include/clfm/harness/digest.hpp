#pragma once

#include <string>
#include <string_view>

namespace clfm::harness {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::string& path);

std::string to_hex(std::string_view bytes);
/// Throws std::invalid_argument on odd length or non-hex characters.
std::string from_hex(std::string_view hex);

}  // namespace clfm::harness
