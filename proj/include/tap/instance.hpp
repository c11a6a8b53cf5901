// Tree augmentation instances: rooted tree, links, shadow closure,
// twin links and stems, parsing/serialization and solution validation.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tap/rational.hpp"

namespace tap {

using NodeId = int;
using LinkPair = std::pair<NodeId, NodeId>;  // canonical: first < second

inline LinkPair canon(NodeId u, NodeId v) {
    return u < v ? LinkPair{u, v} : LinkPair{v, u};
}

struct RootedTree {
    NodeId root = 0;
    std::vector<int> parent;                  // -1 for the root
    std::vector<std::vector<NodeId>> children;
    std::vector<int> depth;

    int n() const { return static_cast<int>(parent.size()); }

    // Validates that `edges` forms a spanning tree on n nodes.
    static RootedTree build(int n, NodeId root,
                            const std::vector<LinkPair>& edges);

    bool is_ancestor(NodeId anc, NodeId v) const;  // reflexive
    NodeId lca(NodeId u, NodeId v) const;
    // All nodes on the tree path from u to v, endpoints included.
    std::vector<NodeId> path_nodes(NodeId u, NodeId v) const;
};

struct Link {
    NodeId u, v;                        // u < v
    std::optional<LinkPair> origin;     // set iff this link is an added shadow

    LinkPair pair() const { return {u, v}; }
    bool operator==(const Link&) const = default;
};

// Tree edges are identified by their child endpoint (every non-root node
// has exactly one parent edge).
using TreeEdge = NodeId;

struct TapInstance {
    RootedTree tree;
    std::vector<Link> links;            // sorted by (u,v), unique
    bool closed = false;

    std::vector<int> twins;             // link ids in W, ascending
    std::vector<NodeId> stem_of;        // per link id: stem node, -1 if not a twin
    std::vector<NodeId> leaves;         // L, ascending
    std::vector<char> leaf_mask;        // per node

    int link_id(NodeId u, NodeId v) const;   // -1 if absent
    bool is_twin(int link) const;
    bool is_leaf(NodeId v) const { return leaf_mask[v] != 0; }
    // Links of the original (pre-closure) instance.
    std::vector<LinkPair> original_links() const;
};

TapInstance parse_instance(const std::string& text);
std::string serialize_instance(const TapInstance& inst);

// Edge set of the unique tree path between u and v, as child ids.
std::vector<TreeEdge> path_edges(const TapInstance& inst, NodeId u, NodeId v);

// Adds every shadow of every link (all node pairs along each link's path),
// recording provenance. Idempotent.
TapInstance shadow_completion(const TapInstance& inst);

struct TwinInfo {
    std::vector<int> twins;       // link ids
    std::vector<NodeId> stem_of;  // per link id, -1 when not a twin
};
TwinInfo compute_twins_and_stems(const TapInstance& inst);

bool is_feasible(const TapInstance& inst);
std::vector<TreeEdge> uncovered_edges(const TapInstance& inst);

// True iff the union of covered edges over F equals the tree edge set.
// Throws if F contains a link not present in the instance.
bool validate_solution(const TapInstance& inst, const std::vector<LinkPair>& F);

// Replaces each shadow by its origin link; merges duplicates.
std::vector<LinkPair> map_to_original(const TapInstance& inst,
                                      const std::vector<LinkPair>& F);

}  // namespace tap
