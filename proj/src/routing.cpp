#include "leap/routing.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "leap/seeding.hpp"
#include "leap/text_metrics.hpp"

namespace leap {

namespace {

struct ScoredPeer {
  double similarity;
  int sender;
  std::size_t index;  // into the summaries vector
};

void check_preconditions(const std::vector<Summary>& summaries, int k) {
  if (k < 1) throw std::invalid_argument("routing: k must be >= 1");
  std::set<int> ids;
  for (const auto& s : summaries) {
    if (!ids.insert(s.path_id).second) {
      throw std::invalid_argument("routing: duplicate path id " + std::to_string(s.path_id));
    }
  }
}

std::vector<ScoredPeer> scored_peers(const std::vector<Summary>& summaries, std::size_t self) {
  std::vector<ScoredPeer> peers;
  peers.reserve(summaries.size() - 1);
  for (std::size_t j = 0; j < summaries.size(); ++j) {
    if (j == self) continue;
    peers.push_back({normalized_similarity(summaries[self].payload, summaries[j].payload),
                     summaries[j].path_id, j});
  }
  return peers;
}

}  // namespace

const char* to_string(RoutingKind kind) {
  switch (kind) {
    case RoutingKind::Dispersed: return "dispersed";
    case RoutingKind::Clustered: return "clustered";
    case RoutingKind::Hybrid: return "hybrid";
    case RoutingKind::Random: return "random";
  }
  return "dispersed";
}

RoutingKind routing_kind_from_string(const std::string& name) {
  if (name == "dispersed") return RoutingKind::Dispersed;
  if (name == "clustered") return RoutingKind::Clustered;
  if (name == "hybrid") return RoutingKind::Hybrid;
  if (name == "random") return RoutingKind::Random;
  throw std::invalid_argument("unknown routing kind: " + name);
}

std::optional<RoutingPlan> route_dispersed(const std::vector<Summary>& summaries, int k) {
  check_preconditions(summaries, k);
  if (summaries.size() < 2) return std::nullopt;
  const std::size_t take = std::min<std::size_t>(k, summaries.size() - 1);

  RoutingPlan plan;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    auto peers = scored_peers(summaries, i);
    std::sort(peers.begin(), peers.end(), [](const ScoredPeer& a, const ScoredPeer& b) {
      if (a.similarity != b.similarity) return a.similarity < b.similarity;
      return a.sender < b.sender;
    });
    auto& entry = plan.entries[summaries[i].path_id];
    for (std::size_t r = 0; r < take; ++r) entry.push_back(summaries[peers[r].index]);
  }
  return plan;
}

std::optional<RoutingPlan> route_clustered(const std::vector<Summary>& summaries, int k) {
  check_preconditions(summaries, k);
  if (summaries.size() < 2) return std::nullopt;
  const std::size_t take = std::min<std::size_t>(k, summaries.size() - 1);

  RoutingPlan plan;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    auto peers = scored_peers(summaries, i);
    std::sort(peers.begin(), peers.end(), [](const ScoredPeer& a, const ScoredPeer& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.sender < b.sender;
    });
    auto& entry = plan.entries[summaries[i].path_id];
    for (std::size_t r = 0; r < take; ++r) entry.push_back(summaries[peers[r].index]);
  }
  return plan;
}

std::optional<RoutingPlan> route_hybrid(const std::vector<Summary>& summaries, int k) {
  check_preconditions(summaries, k);
  if (summaries.size() < 2) return std::nullopt;
  const std::size_t n_peers = summaries.size() - 1;
  const std::size_t take = std::min<std::size_t>(k, n_peers);
  const std::size_t want_sim = (static_cast<std::size_t>(k) + 1) / 2;
  const std::size_t want_dis = static_cast<std::size_t>(k) / 2;

  RoutingPlan plan;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    auto sim_rank = scored_peers(summaries, i);
    std::sort(sim_rank.begin(), sim_rank.end(), [](const ScoredPeer& a, const ScoredPeer& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.sender < b.sender;
    });
    auto dis_rank = sim_rank;
    std::sort(dis_rank.begin(), dis_rank.end(), [](const ScoredPeer& a, const ScoredPeer& b) {
      if (a.similarity != b.similarity) return a.similarity < b.similarity;
      return a.sender < b.sender;
    });

    std::set<int> used;
    std::vector<std::size_t> chosen;  // indices into summaries
    const auto take_from = [&](const std::vector<ScoredPeer>& rank, std::size_t& cursor) {
      while (cursor < rank.size() && used.count(rank[cursor].sender)) ++cursor;
      if (cursor >= rank.size()) return false;
      used.insert(rank[cursor].sender);
      chosen.push_back(rank[cursor].index);
      ++cursor;
      return true;
    };

    std::size_t si = 0, di = 0;
    for (std::size_t r = 0; r < want_sim && chosen.size() < take; ++r) take_from(sim_rank, si);
    for (std::size_t r = 0; r < want_dis && chosen.size() < take; ++r) take_from(dis_rank, di);

    // Overlap between the halves shrinks the union; refill with the
    // next-ranked unused peers, alternating similar/dissimilar.
    bool prefer_sim = true;
    while (chosen.size() < take) {
      const bool got = prefer_sim ? take_from(sim_rank, si) : take_from(dis_rank, di);
      if (!got && !(prefer_sim ? take_from(dis_rank, di) : take_from(sim_rank, si))) break;
      prefer_sim = !prefer_sim;
    }

    auto& entry = plan.entries[summaries[i].path_id];
    for (std::size_t idx : chosen) entry.push_back(summaries[idx]);
  }
  return plan;
}

std::optional<RoutingPlan> route_random(const std::vector<Summary>& summaries, int k,
                                        std::uint64_t seed) {
  check_preconditions(summaries, k);
  if (summaries.size() < 2) return std::nullopt;
  const std::size_t take = std::min<std::size_t>(k, summaries.size() - 1);

  RoutingPlan plan;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    // Candidate peers in ascending sender id, then a partial Fisher-Yates
    // shuffle seeded per (run seed, receiver id) so receivers decorrelate.
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < summaries.size(); ++j) {
      if (j != i) candidates.push_back(j);
    }
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return summaries[a].path_id < summaries[b].path_id;
    });

    SplitMix64 rng{mix_seed(seed, static_cast<std::uint64_t>(
                                      static_cast<std::int64_t>(summaries[i].path_id)))};
    auto& entry = plan.entries[summaries[i].path_id];
    for (std::size_t r = 0; r < take; ++r) {
      const std::size_t pick = r + rng.below(candidates.size() - r);
      std::swap(candidates[r], candidates[pick]);
      entry.push_back(summaries[candidates[r]]);
    }
  }
  return plan;
}

std::optional<RoutingPlan> route(const std::vector<Summary>& summaries,
                                 const RoutingStrategy& strategy) {
  switch (strategy.kind) {
    case RoutingKind::Dispersed: return route_dispersed(summaries, strategy.k);
    case RoutingKind::Clustered: return route_clustered(summaries, strategy.k);
    case RoutingKind::Hybrid: return route_hybrid(summaries, strategy.k);
    case RoutingKind::Random: return route_random(summaries, strategy.k, strategy.seed);
  }
  throw std::logic_error("unreachable routing kind");
}

}  // namespace leap
