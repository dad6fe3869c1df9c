#pragma once

#include <string>
#include <string_view>

namespace wde {

/// Hex-encoded SHA-256 of the given bytes. Content refs in the blob store are
/// exactly this digest.
std::string sha256_hex(std::string_view bytes);

}  // namespace wde
