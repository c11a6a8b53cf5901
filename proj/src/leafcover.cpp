#include "tap/leafcover.hpp"

#include <algorithm>
#include <map>

#include "tap/matching.hpp"

namespace tap {

Rat link_weight(const LeafWeightConfig& cfg, const TapInstance& inst, LinkPair e) {
    check_rho(cfg);
    bool lu = inst.is_leaf(e.first), lv = inst.is_leaf(e.second);
    if (!lu && !lv) throw Error("link_weight: link has no leaf endpoint");
    if (lu && lv) {
        int id = inst.link_id(e.first, e.second);
        if (id >= 0 && inst.is_twin(id)) return cfg.rho + Rat(1, 2);
        return cfg.rho;
    }
    return cfg.rho - Rat(1, 2);
}

// Auxiliary graph: one node per leaf plus one dummy per leaf. A leaf pair
// may match through its leaf-leaf link; a leaf may match its own dummy at
// the cost of its cheapest upward link; dummies pair off freely at zero.
// A tiny 2^-i perturbation makes the optimum unique and lexicographically
// smallest in canonical link order.
ExactLeafCover min_weight_exact_cover(const LeafWeightConfig& cfg, const TapInstance& inst) {
    check_rho(cfg);
    if (!inst.closed) throw Error("min_weight_exact_cover requires a closed instance");

    int k = static_cast<int>(inst.leaves.size());
    std::vector<int> leaf_index(inst.tree.n(), -1);
    for (int i = 0; i < k; ++i) leaf_index[inst.leaves[i]] = i;

    struct Cand {
        LinkPair link;
        int a, b;  // aux endpoints
        Rat w;
    };
    std::vector<Cand> cands;
    std::vector<char> has_up(k, 0), has_any(k, 0);
    std::vector<LinkPair> up_choice(k);
    for (const auto& l : inst.links) {
        bool lu = inst.is_leaf(l.u), lv = inst.is_leaf(l.v);
        if (!lu && !lv) continue;
        if (lu && lv) {
            cands.push_back({l.pair(), leaf_index[l.u], leaf_index[l.v],
                             link_weight(cfg, inst, l.pair())});
            has_any[leaf_index[l.u]] = has_any[leaf_index[l.v]] = 1;
        } else {
            NodeId leaf = lu ? l.u : l.v;
            int i = leaf_index[leaf];
            has_any[i] = 1;
            if (!has_up[i]) {  // links arrive in canonical order; first wins
                has_up[i] = 1;
                up_choice[i] = l.pair();
            }
        }
    }
    for (int i = 0; i < k; ++i)
        if (!has_any[i])
            throw Error("leaf " + std::to_string(inst.leaves[i]) + " has no incident link");
    for (int i = 0; i < k; ++i)
        if (has_up[i])
            cands.push_back({up_choice[i], i, i + k, cfg.rho - Rat(1, 2)});
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.link < b.link; });

    // Perturbation small enough never to cross a true-weight gap.
    Rat eps = Rat(1) / (Rat(8) * Rat(denominator(cfg.rho)));
    std::vector<WeightedEdge> aux;
    Rat scale = eps / 2;
    for (const auto& c : cands) {
        aux.push_back({c.a, c.b, c.w - scale});
        scale /= 2;
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            aux.push_back({i + k, j + k, Rat(0) - scale});
            scale /= 2;
        }

    MatchingResult m;
    try {
        m = min_weight_perfect_matching(2 * k, aux);
    } catch (const Error&) {
        throw Error("no exact leaf cover exists");
    }

    ExactLeafCover out;
    out.weight = 0;
    for (int id : m.edge_ids) {
        if (id >= static_cast<int>(cands.size())) continue;  // dummy pairing
        const auto& c = cands[id];
        out.links.push_back(c.link);
        out.weight += c.w;
        if (c.b < k) out.matching_part.push_back(c.link);
    }
    std::sort(out.links.begin(), out.links.end());
    std::sort(out.matching_part.begin(), out.matching_part.end());

    std::vector<int> deg(inst.tree.n(), 0);
    for (auto [u, v] : out.links) {
        if (inst.is_leaf(u)) ++deg[u];
        if (inst.is_leaf(v)) ++deg[v];
    }
    for (NodeId v : inst.leaves)
        if (deg[v] != 1) throw Error("internal: cover leaf degree violated");
    return out;
}

}  // namespace tap
