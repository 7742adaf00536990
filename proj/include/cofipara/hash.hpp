#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cofipara {

// Hex-encoded SHA-256 digest of the input bytes.
std::string sha256_hex(std::string_view data);

// FNV-1a 64-bit content hash, used for prompt fingerprints.
std::uint64_t fnv1a64(std::string_view data);

}  // namespace cofipara
