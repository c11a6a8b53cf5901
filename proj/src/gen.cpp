#include "tap/gen.hpp"

#include <algorithm>

namespace tap {

GenMode parse_gen_mode(const std::string& name) {
    if (name == "random-tree") return GenMode::RandomTree;
    if (name == "caterpillar") return GenMode::Caterpillar;
    if (name == "star-of-paths") return GenMode::StarOfPaths;
    throw Error("unknown generator mode: " + name);
}

std::string gen_mode_name(GenMode mode) {
    switch (mode) {
        case GenMode::RandomTree: return "random-tree";
        case GenMode::Caterpillar: return "caterpillar";
        case GenMode::StarOfPaths: return "star-of-paths";
    }
    throw Error("bad mode");
}

TapInstance gen_instance(const GenSpec& spec) {
    if (spec.n < 2) throw Error("generator needs n >= 2");
    if (spec.link_density <= 0 || spec.link_density > 1)
        throw Error("link density must lie in (0, 1]");
    Rng rng(spec.seed * 0x2545f4914f6cdd1dull + 0x9e3779b97f4a7c15ull);

    int n = spec.n;
    std::vector<int> parent(n, -1);
    switch (spec.mode) {
        case GenMode::RandomTree:
            for (int v = 1; v < n; ++v) parent[v] = (int)rng.below(v);
            break;
        case GenMode::Caterpillar: {
            int spine = std::max(2, n / 2);
            for (int v = 1; v < spine; ++v) parent[v] = v - 1;
            for (int v = spine; v < n; ++v) parent[v] = (int)rng.below(spine);
            break;
        }
        case GenMode::StarOfPaths: {
            int branches = 2 + (int)rng.below(3);
            std::vector<int> tip(branches, 0);  // current end of each path
            for (int v = 1; v < n; ++v) {
                int b = (int)rng.below(branches);
                parent[v] = tip[b];
                tip[b] = v;
            }
            break;
        }
    }

    std::vector<LinkPair> edges;
    std::vector<char> is_edge(n * n, 0);
    for (int v = 1; v < n; ++v) {
        edges.push_back(canon(v, parent[v]));
        is_edge[edges.back().first * n + edges.back().second] = 1;
    }

    TapInstance inst;
    inst.tree = RootedTree::build(n, 0, edges);
    auto p = numerator(spec.link_density).convert_to<std::uint64_t>();
    auto q = denominator(spec.link_density).convert_to<std::uint64_t>();
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            if (is_edge[u * n + v]) continue;
            if (rng.below(q) < p) inst.links.push_back(Link{u, v, std::nullopt});
        }

    // Patch feasibility: repeatedly link the deepest uncovered edge's child
    // to the root.
    while (true) {
        std::vector<char> cov(n, 0);
        for (const auto& l : inst.links) {
            NodeId a = inst.tree.lca(l.u, l.v);
            for (NodeId x = l.u; x != a; x = inst.tree.parent[x]) cov[x] = 1;
            for (NodeId x = l.v; x != a; x = inst.tree.parent[x]) cov[x] = 1;
        }
        int pick = -1;
        for (NodeId v = 0; v < n; ++v) {
            if (v == 0 || cov[v]) continue;
            if (pick < 0 || inst.tree.depth[v] > inst.tree.depth[pick] ||
                (inst.tree.depth[v] == inst.tree.depth[pick] && v < pick))
                pick = v;
        }
        if (pick < 0) break;
        inst.links.push_back(Link{0, pick, std::nullopt});
    }

    std::sort(inst.links.begin(), inst.links.end(),
              [](const Link& a, const Link& b) { return a.pair() < b.pair(); });
    // Rebuild through the parser path so all derived fields are consistent.
    TapInstance out;
    out.tree = inst.tree;
    out.links = inst.links;
    std::string text = serialize_instance(out);
    return parse_instance(text);
}

std::string gen_instance_text(const GenSpec& spec) {
    return serialize_instance(gen_instance(spec));
}

}  // namespace tap
