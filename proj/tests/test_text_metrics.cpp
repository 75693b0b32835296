#include <doctest.h>

#include <map>
#include <string>
#include <vector>

#include "leap/seeding.hpp"
#include "leap/text_metrics.hpp"

using namespace leap;

namespace {

// Independent oracle: naive recursion with memoization over byte strings
// (all oracle inputs are ASCII, so bytes equal code points).
std::size_t oracle_distance_impl(const std::string& a, const std::string& b, std::size_t i,
                                 std::size_t j,
                                 std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const auto key = std::make_pair(i, j);
  const auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  std::size_t best;
  if (a[i] == b[j]) {
    best = oracle_distance_impl(a, b, i + 1, j + 1, memo);
  } else {
    const std::size_t sub = oracle_distance_impl(a, b, i + 1, j + 1, memo);
    const std::size_t del = oracle_distance_impl(a, b, i + 1, j, memo);
    const std::size_t ins = oracle_distance_impl(a, b, i, j + 1, memo);
    best = 1 + std::min({sub, del, ins});
  }
  memo[key] = best;
  return best;
}

std::size_t oracle_distance(const std::string& a, const std::string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  return oracle_distance_impl(a, b, 0, 0, memo);
}

std::string random_string(SplitMix64& rng, std::size_t max_len, const char* alphabet,
                          std::size_t alphabet_size) {
  const std::size_t len = rng.below(max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet_size)];
  return s;
}

}  // namespace

TEST_CASE("levenshtein distance matches hand-expanded examples") {
  CHECK(levenshtein_distance("kitten", "sitting") == 3);
  CHECK(levenshtein_distance("abc", "abc") == 0);
  CHECK(levenshtein_distance("abc", "") == 3);
  CHECK(levenshtein_distance("", "abc") == 3);
  CHECK(levenshtein_distance("", "") == 0);
  CHECK(levenshtein_distance("flaw", "lawn") == 2);
}

TEST_CASE("normalized similarity anchors") {
  CHECK(normalized_similarity("kitten", "sitting") ==
        doctest::Approx(1.0 - 3.0 / 7.0).epsilon(1e-12));
  CHECK(normalized_similarity("abc", "xyz") == 0.0);
  CHECK(normalized_similarity("", "") == 1.0);
  CHECK(normalized_similarity("same text", "same text") == 1.0);
}

TEST_CASE("comparison unit is the code point, not the byte") {
  // Two-byte UTF-8 character counts once.
  CHECK(levenshtein_distance("caf\xc3\xa9", "cafe") == 1);
  CHECK(levenshtein_distance("\xc3\xa9", "") == 1);
  CHECK(normalized_similarity("\xc3\xa9", "e") == 0.0);
}

TEST_CASE("symmetry, bounds, and triangle inequality on random strings") {
  SplitMix64 rng{0x5eedULL};
  for (int trial = 0; trial < 300; ++trial) {
    const std::string a = random_string(rng, 10, "abcd", 4);
    const std::string b = random_string(rng, 10, "abcd", 4);
    const std::string c = random_string(rng, 10, "abcd", 4);

    const std::size_t ab = levenshtein_distance(a, b);
    CHECK(ab == levenshtein_distance(b, a));
    CHECK(ab <= std::max(a.size(), b.size()));
    CHECK(levenshtein_distance(a, c) <= ab + levenshtein_distance(b, c));

    const double sim = normalized_similarity(a, b);
    CHECK(sim >= 0.0);
    CHECK(sim <= 1.0);
    CHECK(sim == normalized_similarity(b, a));
    if (a == b) CHECK(sim == 1.0);
    if (sim == 1.0) CHECK(a == b);
  }
}

TEST_CASE("production distance equals the memoized recursive oracle") {
  // Pool: every string of length <= 2 over {a,b,c} plus seeded random
  // strings of lengths 3..8 — 115 strings, 6670 unordered pairs.
  std::vector<std::string> pool = {""};
  const std::string alphabet = "abc";
  for (const char c1 : alphabet) {
    pool.push_back(std::string(1, c1));
    for (const char c2 : alphabet) pool.push_back(std::string{c1, c2});
  }
  SplitMix64 rng{20240501ULL};
  for (std::size_t len = 3; len <= 8; ++len) {
    for (int i = 0; i < 17; ++i) {
      std::string s;
      for (std::size_t k = 0; k < len; ++k) s += alphabet[rng.below(3)];
      pool.push_back(std::move(s));
    }
  }
  REQUIRE(pool.size() == 115);

  std::size_t pairs = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (std::size_t j = i; j < pool.size(); ++j) {
      CHECK(levenshtein_distance(pool[i], pool[j]) == oracle_distance(pool[i], pool[j]));
      ++pairs;
    }
  }
  CHECK(pairs == 6670);
}
