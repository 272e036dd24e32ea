#pragma once

#include <string>

namespace memoforge {

// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);
// Hash of a file's contents; throws Io on missing file.
std::string sha256_file(const std::string& path);

} // namespace memoforge
