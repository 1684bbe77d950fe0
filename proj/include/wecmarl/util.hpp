#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wecmarl {

// SHA-256 digest of a byte string, as a lowercase hex string. Used to pin
// parameter blobs (freeze contracts, run manifests).
std::array<std::uint8_t, 32> sha256(const void* data, std::size_t len);
std::string sha256_hex(const std::string& bytes);

// Minimal CSV writing: fields are quoted only when they contain separators.
std::string csv_escape(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);
// Fixed, locale-independent numeric formatting for reproducible files.
std::string format_double(double v, int precision = 9);

}  // namespace wecmarl
