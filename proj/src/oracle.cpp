#include "tap/oracle.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <map>

namespace tap {

namespace {

using Mask = std::uint64_t;

struct CoverSearch {
    const TapInstance& inst;
    std::vector<Mask> link_mask;  // covered tree edges per link
    Mask full = 0;
    std::vector<std::vector<int>> by_edge;  // bit -> covering link ids
    std::uint64_t examined = 0;

    explicit CoverSearch(const TapInstance& i) : inst(i) {
        if (inst.links.size() > 30) throw Error("oracle cap exceeded: more than 30 links");
        int n = inst.tree.n();
        if (n - 1 > 62) throw Error("oracle cap exceeded: more than 62 tree edges");
        std::vector<int> edge_bit(n, -1);
        int bit = 0;
        for (NodeId v = 0; v < n; ++v)
            if (v != inst.tree.root) edge_bit[v] = bit++;
        full = (Mask(1) << bit) - 1;
        by_edge.assign(bit, {});
        for (int id = 0; id < (int)inst.links.size(); ++id) {
            const auto& l = inst.links[id];
            Mask m = 0;
            for (TreeEdge e : path_edges(inst, l.u, l.v)) m |= Mask(1) << edge_bit[e];
            link_mask.push_back(m);
            Mask mm = m;
            while (mm) {
                by_edge[std::countr_zero(mm)].push_back(id);
                mm &= mm - 1;
            }
        }
        Mask all = 0;
        for (Mask m : link_mask) all |= m;
        if (all != full) throw Error("infeasible instance: some tree edge is uncoverable");
    }

    // Visits every cover of size exactly `budget` once (duplicate-free by
    // branching on the lowest uncovered edge and forbidding earlier
    // coverers), or any one cover when `sink` is null. Returns true when a
    // cover was found / the sink asked to stop.
    bool search(Mask covered, int budget, std::vector<int>& chosen, Mask forbidden,
                const std::function<bool(const std::vector<int>&)>* sink) {
        ++examined;
        if (covered == full) {
            if (!sink) return true;
            if (budget > 0) return false;
            return (*sink)(chosen);
        }
        if (budget == 0) return false;
        int b = std::countr_zero(~covered & full);
        for (int id : by_edge[b]) {
            if (forbidden >> id & 1) continue;
            forbidden |= Mask(1) << id;
            chosen.push_back(id);
            bool stop = search(covered | link_mask[id], budget - 1, chosen, forbidden, sink);
            chosen.pop_back();
            if (stop) return true;
        }
        return false;
    }

    int optimum() {
        std::vector<int> chosen;
        int k = 0;
        while (!search(0, k, chosen, 0, nullptr)) ++k;
        return k;
    }

    void enumerate(int k, const std::function<bool(const std::vector<int>&)>& sink) {
        std::vector<int> chosen;
        search(0, k, chosen, 0, &sink);
    }
};

std::vector<LinkPair> sorted(std::vector<LinkPair> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

OracleResult exact_opt(const TapInstance& inst, int witness_cap) {
    CoverSearch cs(inst);
    OracleResult res;
    res.opt_size = cs.optimum();
    std::function<bool(const std::vector<int>&)> sink = [&](const std::vector<int>& chosen) {
        if ((int)res.witnesses.size() >= witness_cap) {
            res.truncated = true;
            return true;
        }
        std::vector<LinkPair> w;
        for (int id : chosen) w.push_back(inst.links[id].pair());
        res.witnesses.push_back(sorted(std::move(w)));
        return false;
    };
    cs.enumerate(res.opt_size, sink);
    std::sort(res.witnesses.begin(), res.witnesses.end());
    res.nodes_examined = cs.examined;
    return res;
}

LeafCoverOpt exact_leaf_cover_opt(const TapInstance& inst, const LeafWeightConfig& cfg) {
    check_rho(cfg);
    if (!inst.closed) throw Error("exact_leaf_cover_opt requires a closed instance");
    int k = static_cast<int>(inst.leaves.size());
    if (k > 10) throw Error("oracle cap exceeded: more than 10 leaves");

    std::vector<int> leaf_index(inst.tree.n(), -1);
    for (int i = 0; i < k; ++i) leaf_index[inst.leaves[i]] = i;
    std::vector<std::vector<int>> incident(k);
    for (int id = 0; id < (int)inst.links.size(); ++id) {
        const auto& l = inst.links[id];
        if (inst.is_leaf(l.u)) incident[leaf_index[l.u]].push_back(id);
        if (inst.is_leaf(l.v)) incident[leaf_index[l.v]].push_back(id);
    }
    for (int i = 0; i < k; ++i)
        if (incident[i].empty())
            throw Error("leaf " + std::to_string(inst.leaves[i]) + " has no incident link");

    LeafCoverOpt best;
    bool have = false;
    std::vector<int> chosen;
    std::vector<char> done(k, 0);
    auto weight_of = [&](int id) { return link_weight(cfg, inst, inst.links[id].pair()); };

    // Assign leaves in index order; a leaf-leaf link consumes both its leaves.
    auto rec = [&](auto&& self, int i, const Rat& acc) -> void {
        while (i < k && done[i]) ++i;
        if (i == k) {
            std::vector<LinkPair> cand;
            for (int id : chosen) cand.push_back(inst.links[id].pair());
            cand = sorted(std::move(cand));
            if (!have || acc < best.weight || (acc == best.weight && cand < best.links)) {
                have = true;
                best.weight = acc;
                best.links = std::move(cand);
            }
            return;
        }
        done[i] = 1;
        for (int id : incident[i]) {
            const auto& l = inst.links[id];
            NodeId other = (inst.is_leaf(l.u) && leaf_index[l.u] == i) ? l.v : l.u;
            int oi = inst.is_leaf(other) ? leaf_index[other] : -1;
            if (oi >= 0) {
                if (done[oi]) continue;  // would give the other leaf degree 2
                done[oi] = 1;
            }
            chosen.push_back(id);
            self(self, i + 1, acc + weight_of(id));
            chosen.pop_back();
            if (oi >= 0) done[oi] = 0;
        }
        done[i] = 0;
    };
    rec(rec, 0, Rat(0));
    if (!have) throw Error("no exact leaf cover exists");
    return best;
}

std::vector<LinkPair> shadow_minimal_twin_max(const TapInstance& inst, int /*witness_cap*/) {
    if (!inst.closed) throw Error("shadow_minimal_twin_max requires a closed instance");
    CoverSearch cs(inst);
    int opt = cs.optimum();

    // A set is shadow-minimal when no member can be replaced by a proper
    // shadow that still covers the member's exclusively covered edges.
    auto shadow_minimal = [&](const std::vector<int>& ids) {
        Mask twice = 0, once = 0;
        for (int id : ids) {
            twice |= once & cs.link_mask[id];
            once |= cs.link_mask[id];
        }
        for (int id : ids) {
            Mask excl = cs.link_mask[id] & ~twice;
            if (excl == cs.link_mask[id]) continue;  // no proper shadow covers all of it
            if (excl == 0) return false;             // fully redundant
            const auto& l = inst.links[id];
            auto nodes = inst.tree.path_nodes(l.u, l.v);
            for (size_t a = 0; a < nodes.size(); ++a)
                for (size_t b = a + 1; b < nodes.size(); ++b) {
                    if (nodes[a] == l.u && nodes[b] == l.v) continue;
                    int sid = inst.link_id(nodes[a], nodes[b]);
                    if (sid < 0) continue;  // closure guarantees presence, but be safe
                    if ((excl & ~cs.link_mask[sid]) == 0) return false;
                }
        }
        return true;
    };

    std::vector<LinkPair> best;
    int best_twins = -1;
    std::function<bool(const std::vector<int>&)> sink = [&](const std::vector<int>& ids) {
        if (!shadow_minimal(ids)) return false;
        int t = 0;
        for (int id : ids)
            if (inst.is_twin(id)) ++t;
        std::vector<LinkPair> w;
        for (int id : ids) w.push_back(inst.links[id].pair());
        w = sorted(std::move(w));
        if (t > best_twins || (t == best_twins && w < best)) {
            best_twins = t;
            best = std::move(w);
        }
        return false;
    };
    cs.enumerate(opt, sink);
    if (best_twins < 0) throw Error("internal: no shadow-minimal optimal witness");
    return best;
}

}  // namespace tap
