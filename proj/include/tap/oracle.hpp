// Independent brute-force ground truth: exact optimum, exhaustive leaf-cover
// optimum, and the shadow-minimal twin-maximal optimal witness.
#pragma once

#include <cstdint>
#include <vector>

#include "tap/instance.hpp"
#include "tap/leafcover.hpp"
#include "tap/rational.hpp"

namespace tap {

struct OracleResult {
    int opt_size = 0;
    std::vector<std::vector<LinkPair>> witnesses;  // up to the cap
    bool truncated = false;
    std::uint64_t nodes_examined = 0;
};

// Exhaustive search over link subsets using covered-edge bitmasks.
// Caps: at most 30 links, at most 62 tree edges.
OracleResult exact_opt(const TapInstance& inst, int witness_cap = 1000);

struct LeafCoverOpt {
    Rat weight;
    std::vector<LinkPair> links;
};

// Enumerates every assignment of exactly one incident link per leaf.
// Cap: at most 10 leaves.
LeafCoverOpt exact_leaf_cover_opt(const TapInstance& inst, const LeafWeightConfig& cfg);

// Among all optimal solutions of the closed instance, a shadow-minimal one
// maximizing the number of twin links (ties to the smallest link set).
std::vector<LinkPair> shadow_minimal_twin_max(const TapInstance& inst, int witness_cap = 1000);

}  // namespace tap
