#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kgtox {

// Shortest round-trip decimal form; stable across runs and platforms.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

// Writes to "<path>.tmp" then renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::vector<std::string> split(const std::string& s, char sep);

// FNV-1a over the bytes, hex-encoded; used for config hashes in manifests.
std::string fnv1a_hex(const std::string& bytes);

} // namespace kgtox
