#pragma once

#include <string>
#include <string_view>

namespace biaskit {

std::string sha256_hex(std::string_view bytes);

// First 16 hex digits of the SHA-256 digest; the stable id used for
// articles and images.
std::string short_hash(std::string_view bytes);

}  // namespace biaskit
