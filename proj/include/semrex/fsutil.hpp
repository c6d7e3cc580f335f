#pragma once

#include <filesystem>
#include <string>

namespace semrex {

/// Whole file as bytes. Throws std::runtime_error when it cannot be opened.
std::string read_file(const std::filesystem::path& p);

/// Writes to a sibling temporary file, then renames over `p`. Creates parent
/// directories. Concurrent writers of identical content leave a valid file.
void write_atomically(const std::filesystem::path& p, const std::string& content);

}  // namespace semrex
