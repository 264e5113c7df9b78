#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace mvm {

/// Hex digest of the SHA-256 of a byte buffer.
std::string sha256_hex(const void* data, size_t len);

}  // namespace mvm
