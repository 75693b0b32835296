#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "leap/routing.hpp"
#include "leap/seeding.hpp"
#include "leap/text_metrics.hpp"

using namespace leap;

namespace {

std::vector<Summary> make_summaries(const std::vector<std::string>& payloads) {
  std::vector<Summary> out;
  for (std::size_t i = 0; i < payloads.size(); ++i) {
    Summary s;
    s.path_id = static_cast<int>(i);
    s.payload = payloads[i];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<int> senders_of(const RoutingPlan& plan, int receiver) {
  std::vector<int> out;
  for (const auto& s : plan.entries.at(receiver)) out.push_back(s.path_id);
  return out;
}

struct ScoredPeer {
  double similarity;
  int sender;
};

std::vector<ScoredPeer> oracle_scores(const std::vector<Summary>& summaries, std::size_t self) {
  std::vector<ScoredPeer> scores;
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    if (j == self) continue;
    scores.push_back({normalized_similarity(summaries[self].payload, summaries[j].payload),
                      summaries[j].path_id});
  }
  return scores;
}

// Exhaustive-sort oracles. The dispersed/clustered oracles sort the full
// pairwise similarity list per receiver; the hybrid oracle re-derives the
// half split, dedupe, and alternating refill step by step.
std::vector<int> oracle_dispersed(const std::vector<Summary>& summaries, std::size_t self,
                                  int k) {
  auto scores = oracle_scores(summaries, self);
  std::stable_sort(scores.begin(), scores.end(), [](const ScoredPeer& a, const ScoredPeer& b) {
    return a.similarity < b.similarity || (a.similarity == b.similarity && a.sender < b.sender);
  });
  std::vector<int> out;
  for (std::size_t i = 0; i < scores.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(scores[i].sender);
  }
  return out;
}

std::vector<int> oracle_clustered(const std::vector<Summary>& summaries, std::size_t self,
                                  int k) {
  auto scores = oracle_scores(summaries, self);
  std::stable_sort(scores.begin(), scores.end(), [](const ScoredPeer& a, const ScoredPeer& b) {
    return a.similarity > b.similarity || (a.similarity == b.similarity && a.sender < b.sender);
  });
  std::vector<int> out;
  for (std::size_t i = 0; i < scores.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(scores[i].sender);
  }
  return out;
}

std::vector<int> oracle_hybrid(const std::vector<Summary>& summaries, std::size_t self, int k) {
  const auto sim_rank = oracle_clustered(summaries, self, static_cast<int>(summaries.size()));
  const auto dis_rank = oracle_dispersed(summaries, self, static_cast<int>(summaries.size()));
  const std::size_t take = std::min<std::size_t>(k, summaries.size() - 1);
  const std::size_t want_sim = (static_cast<std::size_t>(k) + 1) / 2;
  const std::size_t want_dis = static_cast<std::size_t>(k) / 2;

  std::vector<int> chosen;
  std::set<int> used;
  std::size_t si = 0, di = 0;
  const auto take_next = [&](const std::vector<int>& rank, std::size_t& cursor) {
    while (cursor < rank.size() && used.count(rank[cursor])) ++cursor;
    if (cursor >= rank.size()) return false;
    used.insert(rank[cursor]);
    chosen.push_back(rank[cursor]);
    ++cursor;
    return true;
  };
  for (std::size_t r = 0; r < want_sim && chosen.size() < take; ++r) take_next(sim_rank, si);
  for (std::size_t r = 0; r < want_dis && chosen.size() < take; ++r) take_next(dis_rank, di);
  bool prefer_sim = true;
  while (chosen.size() < take) {
    const bool got = prefer_sim ? take_next(sim_rank, si) : take_next(dis_rank, di);
    if (!got && !(prefer_sim ? take_next(dis_rank, di) : take_next(sim_rank, si))) break;
    prefer_sim = !prefer_sim;
  }
  return chosen;
}

std::string random_payload(SplitMix64& rng) {
  static const std::vector<std::string> dictionary = {
      "alpha", "beta", "gamma", "delta", "sum", "case", "route", "proof"};
  std::string out;
  const std::size_t words = rng.below(5);
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += dictionary[rng.below(dictionary.size())];
  }
  return out;
}

void check_plan_invariants(const RoutingPlan& plan, const std::vector<Summary>& summaries,
                           int k) {
  const std::size_t expect = std::min<std::size_t>(k, summaries.size() - 1);
  for (const auto& s : summaries) {
    const auto& entry = plan.entries.at(s.path_id);
    CHECK(entry.size() == expect);
    std::set<int> distinct;
    for (const auto& peer : entry) {
      CHECK(peer.path_id != s.path_id);  // self-exclusion
      CHECK(distinct.insert(peer.path_id).second);
    }
  }
}

}  // namespace

TEST_CASE("dispersed picks the least similar peers") {
  const auto summaries = make_summaries({"aaaa", "aaab", "zzzz", "aazz"});
  const auto plan = route_dispersed(summaries, 1);
  REQUIRE(plan.has_value());
  CHECK(senders_of(*plan, 0) == std::vector<int>{2});  // A receives C
}

TEST_CASE("clustered picks the most similar peers") {
  const auto summaries = make_summaries({"aaaa", "aaab", "zzzz", "aazz"});
  const auto plan = route_clustered(summaries, 1);
  REQUIRE(plan.has_value());
  CHECK(senders_of(*plan, 0) == std::vector<int>{1});  // A receives B
}

TEST_CASE("hybrid takes a similar half and a dissimilar half") {
  const auto summaries = make_summaries({"aaaa", "aaab", "zzzz", "aazz"});
  const auto plan = route_hybrid(summaries, 2);
  REQUIRE(plan.has_value());
  const auto senders = senders_of(*plan, 0);
  CHECK(std::set<int>(senders.begin(), senders.end()) == std::set<int>{1, 2});
}

TEST_CASE("hybrid with k=1 takes one top-similar peer only") {
  const auto summaries = make_summaries({"aaaa", "aaab", "zzzz", "aazz"});
  const auto plan = route_hybrid(summaries, 1);
  REQUIRE(plan.has_value());
  CHECK(senders_of(*plan, 0) == std::vector<int>{1});
}

TEST_CASE("k of at least N-1 routes every peer") {
  const auto summaries = make_summaries({"one", "two", "three", "four"});
  for (const auto& plan :
       {route_dispersed(summaries, 7), route_clustered(summaries, 7), route_hybrid(summaries, 7),
        route_random(summaries, 7, 99)}) {
    REQUIRE(plan.has_value());
    for (int receiver = 0; receiver < 4; ++receiver) {
      auto senders = senders_of(*plan, receiver);
      std::sort(senders.begin(), senders.end());
      std::vector<int> expect;
      for (int s = 0; s < 4; ++s) {
        if (s != receiver) expect.push_back(s);
      }
      CHECK(senders == expect);
    }
  }
}

TEST_CASE("two paths always exchange with each other") {
  const auto summaries = make_summaries({"left", "right"});
  for (const auto& plan :
       {route_dispersed(summaries, 4), route_clustered(summaries, 1), route_hybrid(summaries, 3),
        route_random(summaries, 2, 7)}) {
    REQUIRE(plan.has_value());
    CHECK(senders_of(*plan, 0) == std::vector<int>{1});
    CHECK(senders_of(*plan, 1) == std::vector<int>{0});
  }
}

TEST_CASE("identical summaries tie-break by ascending sender id") {
  const auto summaries = make_summaries({"same", "same", "same", "same"});
  const auto plan = route_clustered(summaries, 2);
  REQUIRE(plan.has_value());
  CHECK(senders_of(*plan, 0) == std::vector<int>{1, 2});
  CHECK(senders_of(*plan, 3) == std::vector<int>{0, 1});
}

TEST_CASE("fewer than two summaries skips routing") {
  CHECK_FALSE(route_dispersed(make_summaries({"solo"}), 2).has_value());
  CHECK_FALSE(route_clustered({}, 2).has_value());
  CHECK_FALSE(route_hybrid(make_summaries({"solo"}), 1).has_value());
  CHECK_FALSE(route_random(make_summaries({"solo"}), 1, 3).has_value());
}

TEST_CASE("argmin/argmax duality at k=1 with distinct similarities") {
  const auto summaries = make_summaries({"aaaaaa", "aaaaab", "aaabbb", "bbbbbb"});
  const auto dispersed = route_dispersed(summaries, 1);
  const auto clustered = route_clustered(summaries, 1);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto scores = oracle_scores(summaries, i);
    const auto minmax = std::minmax_element(
        scores.begin(), scores.end(),
        [](const ScoredPeer& a, const ScoredPeer& b) { return a.similarity < b.similarity; });
    CHECK(senders_of(*dispersed, static_cast<int>(i))[0] == minmax.first->sender);
    CHECK(senders_of(*clustered, static_cast<int>(i))[0] == minmax.second->sender);
  }
}

TEST_CASE("plans equal the exhaustive-sort oracle across N, k, and random sets") {
  SplitMix64 rng{0xABCDEFULL};
  for (int n = 2; n <= 6; ++n) {
    for (int k = 1; k <= 5; ++k) {
      for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> payloads;
        for (int i = 0; i < n; ++i) {
          // Occasional duplicates force tie cases.
          if (!payloads.empty() && rng.below(4) == 0) {
            payloads.push_back(payloads[rng.below(payloads.size())]);
          } else {
            payloads.push_back(random_payload(rng));
          }
        }
        const auto summaries = make_summaries(payloads);
        const auto dispersed = route_dispersed(summaries, k);
        const auto clustered = route_clustered(summaries, k);
        const auto hybrid = route_hybrid(summaries, k);
        REQUIRE(dispersed.has_value());
        REQUIRE(clustered.has_value());
        REQUIRE(hybrid.has_value());
        check_plan_invariants(*dispersed, summaries, k);
        check_plan_invariants(*clustered, summaries, k);
        check_plan_invariants(*hybrid, summaries, k);
        for (int receiver = 0; receiver < n; ++receiver) {
          CHECK(senders_of(*dispersed, receiver) ==
                oracle_dispersed(summaries, receiver, k));
          CHECK(senders_of(*clustered, receiver) ==
                oracle_clustered(summaries, receiver, k));
          CHECK(senders_of(*hybrid, receiver) == oracle_hybrid(summaries, receiver, k));
        }
      }
    }
  }
}

TEST_CASE("random routing is deterministic per seed and uniform across seeds") {
  std::vector<std::string> payloads;
  for (int i = 0; i < 8; ++i) payloads.push_back("summary " + std::to_string(i));
  const auto summaries = make_summaries(payloads);

  const auto first = route_random(summaries, 4, 1234);
  const auto second = route_random(summaries, 4, 1234);
  REQUIRE(first.has_value());
  REQUIRE(second.has_value());
  for (int receiver = 0; receiver < 8; ++receiver) {
    CHECK(senders_of(*first, receiver) == senders_of(*second, receiver));
  }

  // Monte-Carlo uniformity: with N=8 and k=4 every peer of receiver 0
  // should appear with frequency 4/7.
  std::map<int, int> hits;
  const int trials = 10000;
  for (int seed = 0; seed < trials; ++seed) {
    const auto plan = route_random(summaries, 4, static_cast<std::uint64_t>(seed));
    for (const int sender : senders_of(*plan, 0)) ++hits[sender];
  }
  for (int sender = 1; sender < 8; ++sender) {
    const double freq = static_cast<double>(hits[sender]) / trials;
    CHECK(freq == doctest::Approx(4.0 / 7.0).epsilon(0.05 / (4.0 / 7.0)));
  }
}

TEST_CASE("duplicate path ids are rejected") {
  auto summaries = make_summaries({"x", "y"});
  summaries[1].path_id = 0;
  CHECK_THROWS_AS((void)route_dispersed(summaries, 1), std::invalid_argument);
}
