// Text utilities shared by every module: Unicode normalization, code-point
// segmentation, whitespace tokenization and stable hashing.

#ifndef CHAI_TEXT_HPP_
#define CHAI_TEXT_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chai {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace text {

/// NFC-normalizes and trims leading/trailing Unicode whitespace.
std::string normalize(std::string_view s);

/// NFC normalization only.
std::string nfc(std::string_view s);

std::string trim(std::string_view s);

/// Full Unicode lowercasing (root locale).
std::string lowercase(std::string_view s);

/// Splits UTF-8 text into code points, each returned as its UTF-8 bytes.
/// Invalid byte sequences are passed through one byte at a time.
std::vector<std::string> code_points(std::string_view s);

/// Splits on runs of Unicode whitespace.
std::vector<std::string> split_whitespace(std::string_view s);

/// Removes every Unicode whitespace code point.
std::string remove_whitespace(std::string_view s);

/// Strips leading and trailing Unicode punctuation/symbol code points.
std::string strip_punctuation(std::string_view s);

bool is_blank(std::string_view s);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hex-encoded SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace text
}  // namespace chai

#endif  // CHAI_TEXT_HPP_
