#pragma once

/**
 * Edit-distance text metrics backing all routing decisions.
 *
 * Comparison unit is the Unicode scalar (code point), not the byte and not
 * a model token, so scores are reproducible across tokenizers. Invalid
 * UTF-8 bytes are treated leniently as one unit each.
 */

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace leap {

/// Decodes UTF-8 into code points; each invalid byte becomes one unit.
std::vector<char32_t> decode_utf8(std::string_view text);

/// Minimum number of single-character insertions, deletions, and
/// substitutions transforming `a` into `b`. Symmetric, zero iff equal,
/// satisfies the triangle inequality.
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

/// 1 - D_lev(a,b) / max(|a|,|b|), in [0,1]; higher means more similar.
/// Both-empty compares as identical and returns 1.
double normalized_similarity(std::string_view a, std::string_view b);

}  // namespace leap
