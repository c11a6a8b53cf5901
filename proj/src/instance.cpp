#include "tap/instance.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tap {

RootedTree RootedTree::build(int n, NodeId root,
                             const std::vector<LinkPair>& edges) {
    if (n < 2) throw Error("instance needs at least 2 nodes");
    if (root < 0 || root >= n) throw Error("root id out of range");
    if (static_cast<int>(edges.size()) != n - 1)
        throw Error("expected " + std::to_string(n - 1) + " edges, got " +
                    std::to_string(edges.size()));

    std::vector<std::vector<NodeId>> adj(n);
    std::map<LinkPair, int> seen;
    for (auto [u, v] : edges) {
        if (u < 0 || u >= n || v < 0 || v >= n) throw Error("edge endpoint out of range");
        if (u == v) throw Error("self-loop edge");
        if (seen.count(canon(u, v))) throw Error("duplicate edge");
        seen[canon(u, v)] = 1;
        adj[u].push_back(v);
        adj[v].push_back(u);
    }

    RootedTree t;
    t.root = root;
    t.parent.assign(n, -2);  // -2 = unvisited
    t.children.assign(n, {});
    t.depth.assign(n, 0);
    std::vector<NodeId> stack{root};
    t.parent[root] = -1;
    int visited = 0;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        ++visited;
        for (NodeId w : adj[u]) {
            if (t.parent[w] != -2) continue;
            t.parent[w] = u;
            t.depth[w] = t.depth[u] + 1;
            t.children[u].push_back(w);
            stack.push_back(w);
        }
    }
    if (visited != n) throw Error("edges do not form a tree (not connected)");
    for (auto& c : t.children) std::sort(c.begin(), c.end());
    return t;
}

bool RootedTree::is_ancestor(NodeId anc, NodeId v) const {
    while (v != -1 && depth[v] >= depth[anc]) {
        if (v == anc) return true;
        v = parent[v];
    }
    return false;
}

NodeId RootedTree::lca(NodeId u, NodeId v) const {
    while (u != v) {
        if (depth[u] < depth[v]) std::swap(u, v);
        u = parent[u];
    }
    return u;
}

std::vector<NodeId> RootedTree::path_nodes(NodeId u, NodeId v) const {
    NodeId a = lca(u, v);
    std::vector<NodeId> up;
    for (NodeId x = u; x != a; x = parent[x]) up.push_back(x);
    up.push_back(a);
    std::vector<NodeId> down;
    for (NodeId x = v; x != a; x = parent[x]) down.push_back(x);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
}

int TapInstance::link_id(NodeId u, NodeId v) const {
    auto p = canon(u, v);
    auto it = std::lower_bound(links.begin(), links.end(), p,
                               [](const Link& l, const LinkPair& q) { return l.pair() < q; });
    if (it == links.end() || it->pair() != p) return -1;
    return static_cast<int>(it - links.begin());
}

bool TapInstance::is_twin(int link) const { return stem_of[link] >= 0; }

std::vector<LinkPair> TapInstance::original_links() const {
    std::vector<LinkPair> out;
    for (const auto& l : links)
        if (!l.origin) out.push_back(l.pair());
    return out;
}

namespace {

void finalize(TapInstance& inst) {
    std::sort(inst.links.begin(), inst.links.end(),
              [](const Link& a, const Link& b) { return a.pair() < b.pair(); });
    int n = inst.tree.n();
    inst.leaf_mask.assign(n, 0);
    inst.leaves.clear();
    for (NodeId v = 0; v < n; ++v)
        if (v != inst.tree.root && inst.tree.children[v].empty()) {
            inst.leaf_mask[v] = 1;
            inst.leaves.push_back(v);
        }
    auto tw = compute_twins_and_stems(inst);
    inst.twins = std::move(tw.twins);
    inst.stem_of = std::move(tw.stem_of);
}

}  // namespace

TapInstance parse_instance(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t) toks.push_back(t);
        if (!toks.empty()) rows.push_back(std::move(toks));
    }
    if (rows.empty()) throw Error("empty instance");

    size_t i = 0;
    auto expect = [&](const std::string& kw, size_t arity) -> std::vector<std::string> {
        if (i >= rows.size()) throw Error("unexpected end of input, wanted '" + kw + "'");
        if (rows[i][0] != kw || rows[i].size() != arity + 1)
            throw Error("malformed line: expected '" + kw + "' with " +
                        std::to_string(arity) + " value(s)");
        auto r = rows[i++];
        r.erase(r.begin());
        return r;
    };
    auto to_int = [](const std::string& s) {
        try {
            size_t pos = 0;
            int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw Error("malformed integer: " + s);
        }
    };

    if (expect("tap", 1)[0] != "1") throw Error("unsupported format version");
    int n = to_int(expect("nodes", 1)[0]);
    NodeId root = to_int(expect("root", 1)[0]);

    std::vector<LinkPair> edges;
    for (int k = 0; k < n - 1; ++k) {
        auto e = expect("edge", 2);
        edges.push_back(canon(to_int(e[0]), to_int(e[1])));
    }

    TapInstance inst;
    inst.tree = RootedTree::build(n, root, edges);

    std::map<LinkPair, int> dup;
    while (i < rows.size()) {
        auto l = expect("link", 2);
        NodeId u = to_int(l[0]), v = to_int(l[1]);
        if (u < 0 || u >= n || v < 0 || v >= n) throw Error("link endpoint out of range");
        if (u == v) throw Error("link with equal endpoints");
        if (dup.count(canon(u, v))) throw Error("duplicate link");
        dup[canon(u, v)] = 1;
        inst.links.push_back(Link{canon(u, v).first, canon(u, v).second, std::nullopt});
    }
    finalize(inst);
    return inst;
}

std::string serialize_instance(const TapInstance& inst) {
    std::ostringstream out;
    out << "tap 1\n";
    out << "nodes " << inst.tree.n() << "\n";
    out << "root " << inst.tree.root << "\n";
    std::vector<LinkPair> edges;
    for (NodeId v = 0; v < inst.tree.n(); ++v)
        if (v != inst.tree.root) edges.push_back(canon(v, inst.tree.parent[v]));
    std::sort(edges.begin(), edges.end());
    for (auto [u, v] : edges) out << "edge " << u << " " << v << "\n";
    for (const auto& l : inst.links) out << "link " << l.u << " " << l.v << "\n";
    return out.str();
}

std::vector<TreeEdge> path_edges(const TapInstance& inst, NodeId u, NodeId v) {
    if (u == v) throw Error("path_edges requires distinct endpoints");
    const auto& t = inst.tree;
    NodeId a = t.lca(u, v);
    std::vector<TreeEdge> out;
    for (NodeId x = u; x != a; x = t.parent[x]) out.push_back(x);
    for (NodeId x = v; x != a; x = t.parent[x]) out.push_back(x);
    std::sort(out.begin(), out.end());
    return out;
}

TapInstance shadow_completion(const TapInstance& inst) {
    TapInstance out;
    out.tree = inst.tree;
    out.closed = true;

    // Pair -> origin pair of the smallest original link that spawned it;
    // pairs that are themselves original links carry no origin.
    std::map<LinkPair, std::optional<LinkPair>> pool;
    for (const auto& l : inst.links) {
        auto it = pool.find(l.pair());
        if (it == pool.end() || it->second)
            pool[l.pair()] = l.origin;
    }
    for (const auto& l : inst.links) {
        LinkPair origin = l.origin ? *l.origin : l.pair();
        auto nodes = inst.tree.path_nodes(l.u, l.v);
        for (size_t a = 0; a < nodes.size(); ++a)
            for (size_t b = a + 1; b < nodes.size(); ++b) {
                LinkPair p = canon(nodes[a], nodes[b]);
                auto it = pool.find(p);
                if (it == pool.end())
                    pool[p] = origin;
                else if (it->second && origin < *it->second)
                    it->second = origin;
            }
    }
    for (const auto& [p, org] : pool)
        out.links.push_back(Link{p.first, p.second, org});
    finalize(out);
    return out;
}

TwinInfo compute_twins_and_stems(const TapInstance& inst) {
    const auto& t = inst.tree;
    int n = t.n();
    std::vector<char> leaf(n, 0);
    for (NodeId v = 0; v < n; ++v)
        if (v != t.root && t.children[v].empty()) leaf[v] = 1;

    TwinInfo info;
    info.stem_of.assign(inst.links.size(), -1);
    for (size_t id = 0; id < inst.links.size(); ++id) {
        const auto& l = inst.links[id];
        if (!leaf[l.u] || !leaf[l.v]) continue;
        NodeId s = t.lca(l.u, l.v);
        if (t.parent[s] == -1) continue;  // contracting against the root yields no new leaf
        if (t.children[s].size() != 2) continue;
        if (canon(t.children[s][0], t.children[s][1]) != l.pair()) continue;
        info.twins.push_back(static_cast<int>(id));
        info.stem_of[id] = s;
    }
    return info;
}

std::vector<TreeEdge> uncovered_edges(const TapInstance& inst) {
    int n = inst.tree.n();
    std::vector<char> cov(n, 0);
    for (const auto& l : inst.links)
        for (TreeEdge e : path_edges(inst, l.u, l.v)) cov[e] = 1;
    std::vector<TreeEdge> out;
    for (NodeId v = 0; v < n; ++v)
        if (v != inst.tree.root && !cov[v]) out.push_back(v);
    return out;
}

bool is_feasible(const TapInstance& inst) { return uncovered_edges(inst).empty(); }

bool validate_solution(const TapInstance& inst, const std::vector<LinkPair>& F) {
    int n = inst.tree.n();
    std::vector<char> cov(n, 0);
    for (auto [u, v] : F) {
        if (inst.link_id(u, v) < 0)
            throw Error("solution link not present in instance: " +
                        std::to_string(u) + "-" + std::to_string(v));
        for (TreeEdge e : path_edges(inst, u, v)) cov[e] = 1;
    }
    for (NodeId v = 0; v < n; ++v)
        if (v != inst.tree.root && !cov[v]) return false;
    return true;
}

std::vector<LinkPair> map_to_original(const TapInstance& inst,
                                      const std::vector<LinkPair>& F) {
    std::vector<LinkPair> out;
    for (auto [u, v] : F) {
        int id = inst.link_id(u, v);
        if (id < 0) throw Error("map_to_original: unknown link");
        const auto& l = inst.links[id];
        out.push_back(l.origin ? *l.origin : l.pair());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace tap
