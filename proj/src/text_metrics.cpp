#include "leap/text_metrics.hpp"

#include <algorithm>
#include <numeric>

namespace leap {

std::vector<char32_t> decode_utf8(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  while (i < text.size()) {
    unsigned char b0 = byte(i);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 < 0x80) {
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(b0);  // stray continuation byte
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(b0);
      ++i;
      continue;
    }
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      if ((byte(i + k) & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (byte(i + k) & 0x3F);
    }
    if (!valid) {
      out.push_back(b0);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
  const std::vector<char32_t> ua = decode_utf8(a);
  const std::vector<char32_t> ub = decode_utf8(b);
  const std::vector<char32_t>& s = ua.size() <= ub.size() ? ua : ub;
  const std::vector<char32_t>& t = ua.size() <= ub.size() ? ub : ua;

  if (s.empty()) return t.size();

  // Two-row dynamic program over the shorter string.
  std::vector<std::size_t> prev(s.size() + 1);
  std::vector<std::size_t> cur(s.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});

  for (std::size_t j = 1; j <= t.size(); ++j) {
    cur[0] = j;
    for (std::size_t i = 1; i <= s.size(); ++i) {
      const std::size_t sub = prev[i - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
      cur[i] = std::min({prev[i] + 1, cur[i - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[s.size()];
}

double normalized_similarity(std::string_view a, std::string_view b) {
  const std::size_t la = decode_utf8(a).size();
  const std::size_t lb = decode_utf8(b).size();
  const std::size_t longest = std::max(la, lb);
  if (longest == 0) return 1.0;  // both empty: identical by convention
  const std::size_t d = levenshtein_distance(a, b);
  return 1.0 - static_cast<double>(d) / static_cast<double>(longest);
}

}  // namespace leap
