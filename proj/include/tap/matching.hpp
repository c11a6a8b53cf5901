// Exact minimum-weight perfect matching on general graphs
// (Edmonds primal-dual with blossoms, rational arithmetic).
#pragma once

#include <vector>

#include "tap/rational.hpp"

namespace tap {

struct WeightedEdge {
    int u, v;
    Rat w;
};

struct MatchingResult {
    std::vector<int> edge_ids;  // one per matched pair, ascending
    Rat weight;
};

// Throws tap::Error if no perfect matching exists.
MatchingResult min_weight_perfect_matching(int n, const std::vector<WeightedEdge>& edges);

}  // namespace tap
