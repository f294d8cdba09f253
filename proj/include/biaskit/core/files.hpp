#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace biaskit {

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a torn file. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace biaskit
