#pragma once

#include <string>
#include <string_view>

namespace searchlab {

// Lowercase hex SHA-256 digest of the given bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace searchlab
