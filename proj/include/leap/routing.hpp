#pragma once

/**
 * Peer-summary routing: given one summary per active path, decide which
 * peer summaries each path receives in a round.
 *
 * Four strategies:
 *   Dispersed — the k peers least similar to the receiver's own summary
 *   Clustered — the k most similar peers
 *   Hybrid    — ceil(k/2) most similar plus floor(k/2) least similar
 *   Random    — k peers sampled uniformly, seeded per receiver
 *
 * Similarity is normalized Levenshtein over the summary payloads. Ties
 * break by ascending sender path id so plans are replayable.
 */

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace leap {

/// One path's intermediate summary; `payload` is the routable text
/// (summary-template sentence plus the model's completion, tags excluded).
struct Summary {
  int path_id = -1;
  int round = 0;
  std::string payload;
  std::size_t token_count = 0;
  bool truncated = false;
};

enum class RoutingKind { Dispersed, Clustered, Hybrid, Random };

struct RoutingStrategy {
  RoutingKind kind = RoutingKind::Dispersed;
  int k = 4;                 // peer summaries per path, >= 1
  std::uint64_t seed = 0;    // Random only
};

const char* to_string(RoutingKind kind);
RoutingKind routing_kind_from_string(const std::string& name);

/// Receiver path id -> peer summaries in routed order. Entries never
/// contain the receiver's own summary, all senders within an entry are
/// distinct, and every entry has exactly min(k, peers) elements.
struct RoutingPlan {
  std::map<int, std::vector<Summary>> entries;
};

/// Each returns std::nullopt when fewer than two summaries are present
/// (routing is skipped and the caller proceeds without injection).
/// Preconditions: distinct path ids, k >= 1.
std::optional<RoutingPlan> route_dispersed(const std::vector<Summary>& summaries, int k);
std::optional<RoutingPlan> route_clustered(const std::vector<Summary>& summaries, int k);
std::optional<RoutingPlan> route_hybrid(const std::vector<Summary>& summaries, int k);
std::optional<RoutingPlan> route_random(const std::vector<Summary>& summaries, int k,
                                        std::uint64_t seed);

/// Dispatch on strategy.kind.
std::optional<RoutingPlan> route(const std::vector<Summary>& summaries,
                                 const RoutingStrategy& strategy);

}  // namespace leap
