#pragma once

#include <filesystem>
#include <string>

namespace glucolens {

// Writes to a sibling temporary file, then renames it over `path`, so readers
// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

}  // namespace glucolens
