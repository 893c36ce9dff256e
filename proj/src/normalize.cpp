#include "pairkg/normalize.hpp"

#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/utypes.h>

#include <stdexcept>

namespace pairkg {

namespace {

std::u16string to_utf16(const std::string& utf8) {
  if (utf8.empty()) return {};
  std::u16string out(utf8.size() + 1, u'\0');
  UErrorCode ec = U_ZERO_ERROR;
  int32_t len = 0;
  u_strFromUTF8WithSub(out.data(), static_cast<int32_t>(out.size()), &len,
                       utf8.data(), static_cast<int32_t>(utf8.size()),
                       0xFFFD, nullptr, &ec);
  if (U_FAILURE(ec)) throw std::runtime_error("utf8 decode failed");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::string to_utf8(const std::u16string& utf16) {
  if (utf16.empty()) return {};
  std::string out(utf16.size() * 4 + 1, '\0');
  UErrorCode ec = U_ZERO_ERROR;
  int32_t len = 0;
  u_strToUTF8WithSub(out.data(), static_cast<int32_t>(out.size()), &len,
                     utf16.data(), static_cast<int32_t>(utf16.size()),
                     0xFFFD, nullptr, &ec);
  if (U_FAILURE(ec)) throw std::runtime_error("utf8 encode failed");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::u16string nfc(const std::u16string& in) {
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  if (U_FAILURE(ec)) throw std::runtime_error("NFC normalizer unavailable");
  std::u16string out(in.size() * 2 + 8, u'\0');
  int32_t len = unorm2_normalize(norm, in.data(), static_cast<int32_t>(in.size()),
                                 out.data(), static_cast<int32_t>(out.size()), &ec);
  if (ec == U_BUFFER_OVERFLOW_ERROR) {
    ec = U_ZERO_ERROR;
    out.resize(static_cast<std::size_t>(len) + 1);
    len = unorm2_normalize(norm, in.data(), static_cast<int32_t>(in.size()),
                           out.data(), static_cast<int32_t>(out.size()), &ec);
  }
  if (U_FAILURE(ec)) throw std::runtime_error("NFC normalization failed");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

std::u16string casefold(const std::u16string& in) {
  if (in.empty()) return {};
  std::u16string out(in.size() * 2 + 8, u'\0');
  UErrorCode ec = U_ZERO_ERROR;
  int32_t len = u_strFoldCase(out.data(), static_cast<int32_t>(out.size()),
                              in.data(), static_cast<int32_t>(in.size()),
                              U_FOLD_CASE_DEFAULT, &ec);
  if (ec == U_BUFFER_OVERFLOW_ERROR) {
    ec = U_ZERO_ERROR;
    out.resize(static_cast<std::size_t>(len) + 1);
    len = u_strFoldCase(out.data(), static_cast<int32_t>(out.size()),
                        in.data(), static_cast<int32_t>(in.size()),
                        U_FOLD_CASE_DEFAULT, &ec);
  }
  if (U_FAILURE(ec)) throw std::runtime_error("case folding failed");
  out.resize(static_cast<std::size_t>(len));
  return out;
}

bool is_space(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' ||
         c == U'\v' || c == 0x00A0 || c == 0x3000;  // NBSP, ideographic space
}

}  // namespace

std::string normalize_name(const std::string& raw) {
  if (raw.empty()) return {};
  std::u16string u = casefold(nfc(to_utf16(raw)));
  std::vector<char32_t> cps = utf8_codepoints(to_utf8(u));

  std::vector<char32_t> out;
  out.reserve(cps.size());
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(c);
  }
  return utf8_encode(out);
}

std::vector<char32_t> utf8_codepoints(const std::string& text) {
  std::vector<char32_t> cps;
  cps.reserve(text.size());
  std::size_t i = 0;
  const auto* s = reinterpret_cast<const unsigned char*>(text.data());
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char b = s[i];
    char32_t cp = 0xFFFD;
    std::size_t len = 1;
    if (b < 0x80) {
      cp = b;
    } else if ((b & 0xE0) == 0xC0 && i + 1 < n && (s[i + 1] & 0xC0) == 0x80) {
      cp = (char32_t(b & 0x1F) << 6) | (s[i + 1] & 0x3F);
      len = 2;
      if (cp < 0x80) cp = 0xFFFD;
    } else if ((b & 0xF0) == 0xE0 && i + 2 < n && (s[i + 1] & 0xC0) == 0x80 &&
               (s[i + 2] & 0xC0) == 0x80) {
      cp = (char32_t(b & 0x0F) << 12) | (char32_t(s[i + 1] & 0x3F) << 6) | (s[i + 2] & 0x3F);
      len = 3;
      if (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    } else if ((b & 0xF8) == 0xF0 && i + 3 < n && (s[i + 1] & 0xC0) == 0x80 &&
               (s[i + 2] & 0xC0) == 0x80 && (s[i + 3] & 0xC0) == 0x80) {
      cp = (char32_t(b & 0x07) << 18) | (char32_t(s[i + 1] & 0x3F) << 12) |
           (char32_t(s[i + 2] & 0x3F) << 6) | (s[i + 3] & 0x3F);
      len = 4;
      if (cp < 0x10000 || cp > 0x10FFFF) cp = 0xFFFD;
    }
    cps.push_back(cp);
    i += len;
  }
  return cps;
}

std::string utf8_encode(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size() * 2);
  for (char32_t c : cps) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::string truncate_at_whitespace(const std::string& text, std::size_t max_codepoints) {
  std::vector<char32_t> cps = utf8_codepoints(text);
  if (cps.size() <= max_codepoints) return text;
  std::size_t cut = max_codepoints;
  for (std::size_t i = max_codepoints; i > 0; --i) {
    if (is_space(cps[i - 1])) {
      cut = i - 1;
      break;
    }
  }
  if (cut == 0) cut = max_codepoints;  // no whitespace to break at
  std::vector<char32_t> head(cps.begin(), cps.begin() + static_cast<long>(cut));
  while (!head.empty() && is_space(head.back())) head.pop_back();
  return utf8_encode(head);
}

}  // namespace pairkg
