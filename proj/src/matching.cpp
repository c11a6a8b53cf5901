#include "tap/matching.hpp"

#include <algorithm>

// Primal-dual scheme: maintain vertex duals y and blossom duals z >= 0 with
//   slack(uv) = w - y_u - y_v + sum of z over blossoms containing both u,v
// nonnegative everywhere, matched and blossom-cycle edges tight.  Alternating
// forests are grown from all exposed nodes simultaneously with one global
// dual step per round.

namespace tap {

namespace {

enum Label : char { kFree = 0, kEven = 1, kOdd = 2 };

struct Solver {
    int n;
    const std::vector<WeightedEdge>& edges;
    std::vector<std::vector<int>> inc;  // incident edge ids per original vertex

    // Node ids: 0..n-1 original vertices, >= n blossoms.
    std::vector<int> parent_blossom;          // enclosing blossom or -1
    std::vector<std::vector<int>> cyc_child;  // blossom cycle, [0] = base child
    std::vector<std::vector<int>> cyc_edge;   // cyc_edge[i] joins child i and i+1 (mod)
    std::vector<Rat> dual;                    // y for vertices, z for blossoms
    std::vector<int> base_vertex;
    std::vector<char> alive;
    std::vector<Label> label;       // valid on top-level ids
    std::vector<int> parent_edge;   // tree edge to parent top; -1 at roots
    std::vector<int> mate_edge;     // matched boundary edge per top, -1 if exposed
    std::vector<char> matched;      // per edge id
    std::vector<int> queue;

    Solver(int n_, const std::vector<WeightedEdge>& es) : n(n_), edges(es) {
        inc.resize(n);
        for (int i = 0; i < (int)edges.size(); ++i) {
            inc[edges[i].u].push_back(i);
            inc[edges[i].v].push_back(i);
        }
        parent_blossom.assign(n, -1);
        cyc_child.assign(n, {});
        cyc_edge.assign(n, {});
        dual.assign(n, Rat(0));
        base_vertex.resize(n);
        alive.assign(n, 1);
        label.assign(n, kFree);
        parent_edge.assign(n, -1);
        mate_edge.assign(n, -1);
        matched.assign(edges.size(), 0);
        for (int v = 0; v < n; ++v) base_vertex[v] = v;
        if (!edges.empty()) {
            Rat mn = edges[0].w;
            for (const auto& e : edges) mn = std::min(mn, e.w);
            for (int v = 0; v < n; ++v) dual[v] = mn / 2;
        }
    }

    int new_node() {
        parent_blossom.push_back(-1);
        cyc_child.emplace_back();
        cyc_edge.emplace_back();
        dual.emplace_back(0);
        base_vertex.push_back(-1);
        alive.push_back(1);
        label.push_back(kFree);
        parent_edge.push_back(-1);
        mate_edge.push_back(-1);
        return (int)parent_blossom.size() - 1;
    }

    int top(int x) const {
        while (parent_blossom[x] != -1) x = parent_blossom[x];
        return x;
    }
    bool is_top(int x) const { return alive[x] && parent_blossom[x] == -1; }
    bool is_blossom(int x) const { return x >= n; }

    void collect_deep(int x, std::vector<int>& out) const {
        if (x < n) {
            out.push_back(x);
            return;
        }
        for (int c : cyc_child[x]) collect_deep(c, out);
    }
    std::vector<int> deep(int x) const {
        std::vector<int> out;
        collect_deep(x, out);
        return out;
    }
    // Whether original vertex v lies inside node x.
    bool contains(int x, int v) const {
        int c = v;
        while (c != -1) {
            if (c == x) return true;
            c = parent_blossom[c];
        }
        return false;
    }

    Rat slack(int e) const {
        const auto& ed = edges[e];
        Rat s = ed.w - dual[ed.u] - dual[ed.v];
        // Blossoms containing both endpoints: shared suffix of the two chains.
        int a = parent_blossom[ed.u];
        std::vector<int> chain;
        for (; a != -1; a = parent_blossom[a]) chain.push_back(a);
        for (int b = parent_blossom[ed.v]; b != -1; b = parent_blossom[b])
            if (std::find(chain.begin(), chain.end(), b) != chain.end()) s += dual[b];
        return s;
    }

    int other_top(int e, int t) const {
        int tu = top(edges[e].u), tv = top(edges[e].v);
        return tu == t ? tv : tu;
    }

    int root_of(int t) const {
        while (parent_edge[t] != -1) t = other_top(parent_edge[t], t);
        return t;
    }

    void recompute_mates() {
        for (int x = 0; x < (int)alive.size(); ++x)
            if (is_top(x)) mate_edge[x] = -1;
        for (int e = 0; e < (int)edges.size(); ++e) {
            if (!matched[e]) continue;
            int tu = top(edges[e].u), tv = top(edges[e].v);
            if (tu == tv) continue;  // internal to a blossom
            mate_edge[tu] = e;
            mate_edge[tv] = e;
        }
    }

    // Re-route the internal matching of b so that vertex v becomes exposed
    // within b (v receives b's boundary matched edge).
    void set_base(int b, int v) {
        if (b < n) return;
        auto& ch = cyc_child[b];
        auto& ce = cyc_edge[b];
        int s = (int)ch.size();
        int i = 0;
        while (!contains(ch[i], v)) ++i;
        std::rotate(ch.begin(), ch.begin() + i, ch.end());
        std::rotate(ce.begin(), ce.begin() + i, ce.end());
        for (int j = 0; j < s; ++j) matched[ce[j]] = 0;
        for (int j = 1; j + 1 < s; j += 2) {
            matched[ce[j]] = 1;
            int eu = edges[ce[j]].u, ev = edges[ce[j]].v;
            if (contains(ch[j], ev)) std::swap(eu, ev);
            set_base(ch[j], eu);
            set_base(ch[j + 1], ev);
        }
        set_base(ch[0], v);
        base_vertex[b] = v;
    }

    void flip_path(int t, int through_vertex) {
        // Flip matched status along the tree path from the even top t to its
        // root and rebase every top on the path.  `through_vertex` is the
        // endpoint of the newly matched edge inside t.
        std::vector<int> tops{t};
        std::vector<int> path_edges;
        int x = t;
        while (parent_edge[x] != -1) {
            path_edges.push_back(parent_edge[x]);
            x = other_top(parent_edge[x], x);
            tops.push_back(x);
        }
        for (int e : path_edges) matched[e] = !matched[e];
        set_base(t, through_vertex);
        // After the flip, tops[j]'s matched path edge is f_j for odd j
        // (labels alternate even/odd and the path has even length).
        for (size_t j = 1; j < tops.size(); ++j) {
            int m = (j % 2 == 1) ? path_edges[j] : path_edges[j - 1];
            int eu = edges[m].u, ev = edges[m].v;
            int inside = contains(tops[j], eu) ? eu : ev;
            set_base(tops[j], inside);
        }
    }

    void augment(int t, int o, int e) {
        int eu = edges[e].u, ev = edges[e].v;
        if (!contains(t, eu)) std::swap(eu, ev);
        flip_path(t, eu);
        flip_path(o, ev);
        matched[e] = 1;
        recompute_mates();
    }

    void shrink(int t, int o, int e) {
        // Ancestor paths to the forest lca.
        auto ancestors = [&](int x) {
            std::vector<int> a{x};
            while (parent_edge[x] != -1) {
                x = other_top(parent_edge[x], x);
                a.push_back(x);
            }
            return a;
        };
        auto at = ancestors(t), ao = ancestors(o);
        int lca = -1;
        for (int x : at) {
            if (std::find(ao.begin(), ao.end(), x) != ao.end()) {
                lca = x;
                break;
            }
        }
        if (lca == -1) throw Error("internal: forest lca not found");
        std::vector<int> pt;  // t .. just below lca
        for (int x : at) {
            if (x == lca) break;
            pt.push_back(x);
        }
        std::vector<int> po;
        for (int x : ao) {
            if (x == lca) break;
            po.push_back(x);
        }

        int b = new_node();
        auto& ch = cyc_child[b];
        auto& ce = cyc_edge[b];
        ch.push_back(lca);
        for (int j = (int)pt.size() - 1; j >= 0; --j) {
            ce.push_back(parent_edge[pt[j]]);
            ch.push_back(pt[j]);
        }
        ce.push_back(e);
        for (int j = 0; j < (int)po.size(); ++j) {
            ch.push_back(po[j]);
            ce.push_back(parent_edge[po[j]]);
        }
        if (ch.size() % 2 != 1 || ch.size() != ce.size())
            throw Error("internal: malformed blossom cycle");

        base_vertex[b] = base_vertex[lca];
        parent_edge[b] = parent_edge[lca];
        mate_edge[b] = mate_edge[lca];
        label[b] = kEven;
        for (int c : ch) {
            parent_blossom[c] = b;
            label[c] = kFree;
            parent_edge[c] = -1;
        }
        queue.push_back(b);
    }

    void expand(int b) {
        if (!is_blossom(b) || label[b] != kOdd || dual[b] != 0)
            throw Error("internal: bad expand call");
        auto ch = cyc_child[b];
        auto ce = cyc_edge[b];
        int s = (int)ch.size();
        int pe = parent_edge[b];
        int a = contains(b, edges[pe].u) ? edges[pe].u : edges[pe].v;
        int ia = 0;
        while (!contains(ch[ia], a)) ++ia;

        for (int c : ch) {
            parent_blossom[c] = -1;
            label[c] = kFree;
            parent_edge[c] = -1;
        }
        alive[b] = 0;
        parent_blossom[b] = -1;

        // Walk from child ia to the base child 0 along the even-length side,
        // alternating ODD/EVEN; remaining children stay free (matched in pairs).
        int step = (ia % 2 == 0) ? -1 : +1;  // even side: downward indices if ia even
        label[ch[ia]] = kOdd;
        parent_edge[ch[ia]] = pe;
        int cur = ia;
        while (cur != 0) {
            int eidx = (step == -1) ? cur - 1 : cur;
            int nxt = (cur + step + s) % s;
            int child = ch[nxt];
            parent_edge[child] = ce[eidx];
            label[child] = (label[ch[cur]] == kOdd) ? kEven : kOdd;
            if (label[child] == kEven) queue.push_back(child);
            cur = nxt;
        }
        recompute_mates();
    }

    // Returns true if an augmentation happened.
    bool scan() {
        while (!queue.empty()) {
            int t = queue.back();
            queue.pop_back();
            if (!is_top(t) || label[t] != kEven) continue;
            for (int v : deep(t)) {
                if (!is_top(t)) break;  // t got shrunk into a new blossom
                for (int e : inc[v]) {
                    if (!is_top(t)) break;
                    int o = top(other_vertex(e, v));
                    if (o == t || slack(e) != 0) continue;
                    if (label[o] == kFree) {
                        label[o] = kOdd;
                        parent_edge[o] = e;
                        int me = mate_edge[o];
                        if (me == -1) throw Error("internal: free top without mate");
                        int w = other_top(me, o);
                        label[w] = kEven;
                        parent_edge[w] = me;
                        queue.push_back(w);
                    } else if (label[o] == kEven) {
                        if (root_of(t) != root_of(o)) {
                            augment(t, o, e);
                            return true;
                        }
                        shrink(t, o, e);
                    }
                }
            }
        }
        return false;
    }

    int other_vertex(int e, int v) const { return edges[e].u == v ? edges[e].v : edges[e].u; }

    // One full phase: grows forests until an augmentation. Throws if stuck.
    void phase() {
        queue.clear();
        for (int x = 0; x < (int)alive.size(); ++x) {
            if (!is_top(x)) continue;
            parent_edge[x] = -1;
            label[x] = (mate_edge[x] == -1) ? kEven : kFree;
            if (label[x] == kEven) queue.push_back(x);
        }
        while (true) {
            if (scan()) return;
            // Dual adjustment.
            bool have = false;
            Rat delta(0);
            auto consider = [&](const Rat& d) {
                if (!have || d < delta) {
                    delta = d;
                    have = true;
                }
            };
            for (int e = 0; e < (int)edges.size(); ++e) {
                int tu = top(edges[e].u), tv = top(edges[e].v);
                if (tu == tv) continue;
                int lu = label[tu], lv = label[tv];
                if (lu == kEven && lv == kEven)
                    consider(slack(e) / 2);
                else if ((lu == kEven && lv == kFree) || (lu == kFree && lv == kEven))
                    consider(slack(e));
            }
            for (int x = n; x < (int)alive.size(); ++x)
                if (is_top(x) && label[x] == kOdd) consider(dual[x] / 2);
            if (!have) throw Error("no perfect matching exists");

            for (int x = 0; x < (int)alive.size(); ++x) {
                if (!is_top(x)) continue;
                if (label[x] == kEven) {
                    for (int v : deep(x)) dual[v] += delta;
                    if (is_blossom(x)) dual[x] += 2 * delta;
                } else if (label[x] == kOdd) {
                    for (int v : deep(x)) dual[v] -= delta;
                    if (is_blossom(x)) dual[x] -= 2 * delta;
                }
            }
            // Expand odd blossoms whose dual reached zero.
            bool expanded = true;
            while (expanded) {
                expanded = false;
                for (int x = n; x < (int)alive.size(); ++x)
                    if (is_top(x) && label[x] == kOdd && dual[x] == 0) {
                        expand(x);
                        expanded = true;
                    }
            }
            for (int x = 0; x < (int)alive.size(); ++x)
                if (is_top(x) && label[x] == kEven) queue.push_back(x);
        }
    }

    MatchingResult run() {
        while (true) {
            recompute_mates();
            int exposed = 0;
            for (int x = 0; x < (int)alive.size(); ++x)
                if (is_top(x) && mate_edge[x] == -1) ++exposed;
            if (exposed == 0) break;
            phase();
        }
        MatchingResult res;
        res.weight = 0;
        std::vector<int> deg(n, 0);
        for (int e = 0; e < (int)edges.size(); ++e) {
            if (!matched[e]) continue;
            res.edge_ids.push_back(e);
            res.weight += edges[e].w;
            ++deg[edges[e].u];
            ++deg[edges[e].v];
        }
        for (int v = 0; v < n; ++v)
            if (deg[v] != 1) throw Error("internal: matching is not perfect");
        return res;
    }
};

}  // namespace

MatchingResult min_weight_perfect_matching(int n, const std::vector<WeightedEdge>& edges) {
    if (n % 2 != 0) throw Error("no perfect matching exists");
    for (const auto& e : edges)
        if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n || e.u == e.v)
            throw Error("bad edge endpoints");
    if (n == 0) return {{}, Rat(0)};
    Solver s(n, edges);
    return s.run();
}

}  // namespace tap
