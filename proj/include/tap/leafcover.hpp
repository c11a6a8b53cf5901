// Minimum-weight exact edge cover of the leaves via reduction to
// minimum-weight perfect matching.
#pragma once

#include <vector>

#include "tap/instance.hpp"
#include "tap/rational.hpp"

namespace tap {

struct LeafWeightConfig {
    Rat rho = Rat(7, 4);
};

inline void check_rho(const LeafWeightConfig& cfg) {
    if (cfg.rho < Rat(3, 2)) throw Error("rho must be at least 3/2");
}

struct ExactLeafCover {
    std::vector<LinkPair> links;          // every leaf incident to exactly one
    Rat weight;
    std::vector<LinkPair> matching_part;  // leaf-to-leaf subset (the matching M)
};

// Weight of a leaf-incident link: rho for leaf-leaf non-twin, rho - 1/2 for
// leaf-internal, rho + 1/2 for twin links. Throws if e has no leaf endpoint.
Rat link_weight(const LeafWeightConfig& cfg, const TapInstance& inst, LinkPair e);

// Requires a closed instance where every leaf has an incident link.
// Ties are broken toward the lexicographically smallest link set.
ExactLeafCover min_weight_exact_cover(const LeafWeightConfig& cfg, const TapInstance& inst);

}  // namespace tap
