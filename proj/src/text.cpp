#include "chai/text.hpp"

#include <openssl/evp.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace chai::text {
namespace {

icu::UnicodeString to_unicode(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

// Decodes the code point starting at `pos`; returns -1 for malformed input.
UChar32 next_code_point(std::string_view s, int32_t& pos) {
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), pos, static_cast<int32_t>(s.size()), c);
  return c;
}

template <typename Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
  int32_t pos = 0;
  const auto len = static_cast<int32_t>(s.size());
  while (pos < len) {
    const int32_t start = pos;
    const UChar32 c = next_code_point(s, pos);
    fn(c, s.substr(start, pos - start));
  }
}

bool is_space(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

}  // namespace

std::string nfc(std::string_view s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString out = norm->normalize(to_unicode(s), status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  return to_utf8(out);
}

std::string trim(std::string_view s) {
  std::size_t begin = std::string_view::npos;
  std::size_t end = 0;
  int32_t pos = 0;
  const auto len = static_cast<int32_t>(s.size());
  while (pos < len) {
    const int32_t start = pos;
    const UChar32 c = next_code_point(s, pos);
    if (!is_space(c)) {
      if (begin == std::string_view::npos) begin = static_cast<std::size_t>(start);
      end = static_cast<std::size_t>(pos);
    }
  }
  if (begin == std::string_view::npos) return {};
  return std::string(s.substr(begin, end - begin));
}

std::string normalize(std::string_view s) { return trim(nfc(s)); }

std::string lowercase(std::string_view s) {
  icu::UnicodeString u = to_unicode(s);
  u.toLower(icu::Locale::getRoot());
  return to_utf8(u);
}

std::vector<std::string> code_points(std::string_view s) {
  std::vector<std::string> out;
  out.reserve(s.size());
  for_each_code_point(s, [&](UChar32, std::string_view bytes) { out.emplace_back(bytes); });
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  for_each_code_point(s, [&](UChar32 c, std::string_view bytes) {
    if (is_space(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(bytes);
    }
  });
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string remove_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for_each_code_point(s, [&](UChar32 c, std::string_view bytes) {
    if (!is_space(c)) out.append(bytes);
  });
  return out;
}

std::string strip_punctuation(std::string_view s) {
  auto is_punct = [](UChar32 c) { return c >= 0 && (u_ispunct(c) || u_charType(c) == U_MATH_SYMBOL ||
                                                    u_charType(c) == U_CURRENCY_SYMBOL ||
                                                    u_charType(c) == U_MODIFIER_SYMBOL ||
                                                    u_charType(c) == U_OTHER_SYMBOL); };
  std::vector<std::pair<UChar32, std::string_view>> cps;
  for_each_code_point(s, [&](UChar32 c, std::string_view bytes) { cps.emplace_back(c, bytes); });
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_punct(cps[b].first)) ++b;
  while (e > b && is_punct(cps[e - 1].first)) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) out.append(cps[i].second);
  return out;
}

bool is_blank(std::string_view s) {
  bool blank = true;
  for_each_code_point(s, [&](UChar32 c, std::string_view) {
    if (!is_space(c)) blank = false;
  });
  return blank;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write failed: " + path);
}

}  // namespace chai::text
