#pragma once

#include <string>
#include <string_view>

namespace ccr {

// SHA-256 of the given bytes, lowercase hex.
std::string sha256_hex(std::string_view bytes);

// First 8 bytes of sha256(bytes), little-endian, as an unsigned 64-bit value.
std::uint64_t sha256_prefix64(std::string_view bytes);

}  // namespace ccr
