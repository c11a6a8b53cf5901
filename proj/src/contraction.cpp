#include "tap/contraction.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace tap {

bool ContractionState::is_live(int sup) const {
    return std::binary_search(live.begin(), live.end(), sup);
}

bool ContractionState::sup_leaf(int sup) const {
    return sup != root_sup && sup_children[sup].empty() && is_live(sup);
}

bool ContractionState::sup_original(int sup) const {
    return sup < inst->tree.n() && !compound[sup];
}

std::vector<int> ContractionState::members(int sup) const {
    std::vector<int> out;
    for (NodeId v = 0; v < inst->tree.n(); ++v)
        if (sup_of[v] == sup) out.push_back(v);
    return out;
}

namespace {

std::vector<char> r_mask(const TapInstance& inst) {
    std::vector<char> mask(inst.tree.n(), 0);
    for (NodeId v : r_nodes(inst)) mask[v] = 1;
    return mask;
}

void rebuild(ContractionState& st) {
    const auto& inst = *st.inst;
    int n = inst.tree.n();

    st.live = st.sup_of;
    std::sort(st.live.begin(), st.live.end());
    st.live.erase(std::unique(st.live.begin(), st.live.end()), st.live.end());

    st.sup_parent.assign(st.next_super, -2);
    st.sup_children.assign(st.next_super, {});
    st.sup_depth.assign(st.next_super, 0);
    st.root_sup = st.sup_of[inst.tree.root];
    st.sup_parent[st.root_sup] = -1;

    for (NodeId v = 0; v < n; ++v) {
        if (v == inst.tree.root) continue;
        int a = st.sup_of[v], b = st.sup_of[inst.tree.parent[v]];
        if (a == b) continue;
        if (st.sup_parent[a] != -2 && st.sup_parent[a] != b)
            throw Error("internal: contracted node set is not connected");
        st.sup_parent[a] = b;
    }
    for (int s : st.live)
        if (s != st.root_sup) st.sup_children[st.sup_parent[s]].push_back(s);
    for (int s : st.live) std::sort(st.sup_children[s].begin(), st.sup_children[s].end());
    std::vector<int> order{st.root_sup};
    for (size_t i = 0; i < order.size(); ++i)
        for (int c : st.sup_children[order[i]]) {
            st.sup_depth[c] = st.sup_depth[order[i]] + 1;
            order.push_back(c);
        }
    if (order.size() != st.live.size())
        throw Error("internal: contracted tree is disconnected");

    std::map<std::pair<int, int>, int> best;
    for (int id = 0; id < (int)inst.links.size(); ++id) {
        const auto& l = inst.links[id];
        int a = st.sup_of[l.u], b = st.sup_of[l.v];
        if (a == b) continue;
        auto key = std::minmax(a, b);
        auto it = best.find({key.first, key.second});
        if (it == best.end()) best[{key.first, key.second}] = id;
    }
    st.live_links.clear();
    st.sup_adj.assign(st.next_super, {});
    for (auto& [key, id] : best) {
        st.sup_adj[key.first].push_back((int)st.live_links.size());
        st.sup_adj[key.second].push_back((int)st.live_links.size());
        st.live_links.push_back({key.first, key.second, id});
    }

    // Matching invariants: a matching on original leaf supers.
    std::vector<char> seen(st.next_super, 0);
    for (int mid : st.matching) {
        const auto& l = inst.links[mid];
        for (NodeId v : {l.u, l.v}) {
            if (st.sup_of[v] != v || st.compound[v])
                throw Error("internal: matched leaf absorbed without its pair");
            if (!st.sup_leaf(v)) throw Error("internal: matched node is not a leaf");
            if (seen[v]) throw Error("internal: matching is not a matching");
            seen[v] = 1;
        }
    }
}

int find_live(const ContractionState& st, int a, int b) {
    auto key = std::minmax(a, b);
    LiveLink probe{key.first, key.second, 0};
    auto it = std::lower_bound(st.live_links.begin(), st.live_links.end(), probe,
                               [](const LiveLink& x, const LiveLink& y) {
                                   return std::pair{x.a, x.b} < std::pair{y.a, y.b};
                               });
    if (it == st.live_links.end() || it->a != key.first || it->b != key.second) return -1;
    return (int)(it - st.live_links.begin());
}

std::vector<int> sup_path(const ContractionState& st, int a, int b) {
    std::vector<int> up, down;
    int x = a, y = b;
    while (st.sup_depth[x] > st.sup_depth[y]) {
        up.push_back(x);
        x = st.sup_parent[x];
    }
    while (st.sup_depth[y] > st.sup_depth[x]) {
        down.push_back(y);
        y = st.sup_parent[y];
    }
    while (x != y) {
        up.push_back(x);
        down.push_back(y);
        x = st.sup_parent[x];
        y = st.sup_parent[y];
    }
    up.push_back(x);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
}

bool sup_is_ancestor(const ContractionState& st, int anc, int v) {
    while (v != -1 && st.sup_depth[v] >= st.sup_depth[anc]) {
        if (v == anc) return true;
        v = st.sup_parent[v];
    }
    return false;
}

// Merge the given supers into a fresh compound super and refresh the view.
int merge_supers(ContractionState& st, const std::vector<int>& supers) {
    std::vector<char> in(st.next_super, 0);
    for (int s : supers) in[s] = 1;
    int k = st.next_super++;
    st.compound.push_back(1);
    for (NodeId v = 0; v < st.inst->tree.n(); ++v)
        if (in[st.sup_of[v]]) st.sup_of[v] = k;
    return k;
}

// Does contracting the fundamental cycle of live link (a,b) leave a node of
// tree-degree one? Counts contracted-tree edges leaving the cycle's path.
bool contraction_makes_leaf(const ContractionState& st, int a, int b) {
    auto path = sup_path(st, a, b);
    std::vector<char> on(st.next_super, 0);
    for (int s : path) on[s] = 1;
    int boundary = 0;
    for (int s : path) {
        for (int c : st.sup_children[s])
            if (!on[c]) ++boundary;
        if (st.sup_parent[s] >= 0 && !on[st.sup_parent[s]]) ++boundary;
    }
    return boundary == 1;
}

}  // namespace

ContractionState init_state(const TapInstance& inst, const ExactLeafCover& cover) {
    if (!inst.closed) throw Error("init_state requires a closed instance");
    if (auto unc = uncovered_edges(inst); !unc.empty()) {
        std::ostringstream msg;
        msg << "infeasible instance; uncovered tree edges:";
        for (TreeEdge e : unc) msg << " (" << e << "," << inst.tree.parent[e] << ")";
        throw Error(msg.str());
    }
    ContractionState st;
    st.inst = &inst;
    int n = inst.tree.n();
    st.sup_of.resize(n);
    for (NodeId v = 0; v < n; ++v) st.sup_of[v] = v;
    st.next_super = n;
    st.compound.assign(n, 0);
    st.compound[inst.tree.root] = 1;
    for (auto [u, v] : cover.matching_part) {
        int id = inst.link_id(u, v);
        if (id < 0) throw Error("cover matching link missing from instance");
        st.matching.push_back(id);
    }
    rebuild(st);
    return st;
}

std::vector<SuperMatch> super_matching(const ContractionState& st) {
    std::vector<SuperMatch> out;
    for (int mid : st.matching) {
        const auto& l = st.inst->links[mid];
        out.push_back({st.sup_of[l.u], st.sup_of[l.v], mid});
    }
    return out;
}

LiveLink up_link(const ContractionState& st, int leaf_sup) {
    int best = -1;
    for (int idx : st.sup_adj[leaf_sup]) {
        const auto& ll = st.live_links[idx];
        int other = (ll.a == leaf_sup) ? ll.b : ll.a;
        if (best < 0 || st.sup_depth[other] < st.sup_depth[(st.live_links[best].a == leaf_sup)
                                                              ? st.live_links[best].b
                                                              : st.live_links[best].a])
            best = idx;
    }
    if (best < 0) throw Error("up_link: node has no incident live link");
    const auto& ll = st.live_links[best];
    int other = (ll.a == leaf_sup) ? ll.b : ll.a;
    if (!sup_is_ancestor(st, other, leaf_sup))
        throw Error("internal: up-node is not an ancestor (instance not closed?)");
    return ll;
}

void greedy_contract_exhaust(ContractionState& st) {
    const auto& inst = *st.inst;
    auto rmask = r_mask(inst);
    while (true) {
        std::vector<char> matched(st.next_super, 0);
        for (int mid : st.matching) {
            const auto& l = inst.links[mid];
            matched[st.sup_of[l.u]] = 1;
            matched[st.sup_of[l.v]] = 1;
        }
        int pick = -1;
        for (int idx = 0; idx < (int)st.live_links.size(); ++idx) {
            const auto& ll = st.live_links[idx];
            if (!st.sup_leaf(ll.a) || !st.sup_leaf(ll.b)) continue;
            if (matched[ll.a] || matched[ll.b]) continue;
            if (pick < 0 || ll.rep < st.live_links[pick].rep) pick = idx;
        }
        if (pick < 0) return;

        LiveLink ll = st.live_links[pick];
        auto path = sup_path(st, ll.a, ll.b);
        ContractionRecord rec;
        rec.kind = StepKind::Greedy;
        rec.root_sup = -1;
        rec.absorbed = path;
        rec.added_links = {ll.rep};
        rec.u_size = 2;
        rec.u0_size = (st.sup_original(ll.a) ? 1 : 0) + (st.sup_original(ll.b) ? 1 : 0);
        for (int s : path) {
            if (s == ll.a || s == ll.b) continue;
            if (st.compound[s]) ++rec.c_size;
            if (s < inst.tree.n() && rmask[s]) rec.r_live.push_back(s);
        }
        st.partial.push_back(ll.rep);
        rec.new_super = merge_supers(st, path);
        st.trace.steps.push_back(std::move(rec));
        rebuild(st);
    }
}

SubtreeSummary summarize(const ContractionState& st, int root_sup,
                         std::span<const SuperMatch> matching) {
    const auto& inst = *st.inst;
    SubtreeSummary s;
    s.root_sup = root_sup;

    std::vector<char> in(st.next_super, 0);
    std::vector<int> stack{root_sup};
    in[root_sup] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        s.subtree.push_back(u);
        for (int c : st.sup_children[u]) {
            in[c] = 1;
            stack.push_back(c);
        }
    }
    std::sort(s.subtree.begin(), s.subtree.end());

    s.m_compatible = true;
    std::vector<char> matched(st.next_super, 0);
    for (const auto& sm : matching) {
        matched[sm.sup_u] = 1;
        matched[sm.sup_v] = 1;
        bool cu = in[sm.sup_u], cv = in[sm.sup_v];
        if (cu != cv) s.m_compatible = false;
        if (cu && cv) {
            s.m_links.push_back(sm.rep_link);
            if (inst.is_twin(sm.rep_link)) ++s.m_twin;
        }
    }

    bool closed_unmatched = true;
    for (int sup : s.subtree) {
        if (st.sup_leaf(sup)) {
            s.l_leaves.push_back(sup);
            if (!matched[sup]) {
                s.u_leaves.push_back(sup);
                if (st.sup_original(sup)) s.u0_leaves.push_back(sup);
                for (int idx : st.sup_adj[sup]) {
                    const auto& ll = st.live_links[idx];
                    int other = (ll.a == sup) ? ll.b : ll.a;
                    if (!in[other]) closed_unmatched = false;
                }
            }
        } else if (st.compound[sup]) {
            s.c_compound.push_back(sup);
        }
    }
    // Live original R-nodes keep their frozen token share; the root super
    // carries both its compound token and its R share while never contracted.
    auto rmask = r_mask(inst);
    for (int sup : s.subtree)
        if (sup < inst.tree.n() && rmask[sup]) s.r_live.push_back(sup);
    for (int t : inst.twins) {
        NodeId stem = inst.stem_of[t];
        if (st.sup_of[stem] == stem && in[stem]) s.s_stems.push_back(stem);
    }
    s.semi_closed = s.m_compatible && closed_unmatched;
    return s;
}

bool is_semi_closed(const ContractionState& st, int root_sup,
                    std::span<const SuperMatch> matching) {
    return summarize(st, root_sup, matching).semi_closed;
}

std::vector<SubtreeSummary> minimally_semi_closed(const ContractionState& st,
                                                  std::span<const SuperMatch> matching) {
    std::vector<SubtreeSummary> cands;
    for (int sup : st.live) {
        auto s = summarize(st, sup, matching);
        if (s.semi_closed) cands.push_back(std::move(s));
    }
    std::vector<SubtreeSummary> out;
    for (const auto& c : cands) {
        bool minimal = true;
        for (const auto& d : cands) {
            if (d.root_sup == c.root_sup) continue;
            if (std::binary_search(c.subtree.begin(), c.subtree.end(), d.root_sup)) {
                minimal = false;
                break;
            }
        }
        if (minimal) out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [&](const SubtreeSummary& x, const SubtreeSummary& y) {
        if (st.sup_depth[x.root_sup] != st.sup_depth[y.root_sup])
            return st.sup_depth[x.root_sup] > st.sup_depth[y.root_sup];
        return x.root_sup < y.root_sup;
    });
    return out;
}

std::optional<DangerCert> is_dangerous(const ContractionState& st,
                                       const SubtreeSummary& s) {
    const auto& inst = *st.inst;
    if (!s.semi_closed) return std::nullopt;
    if (!s.c_compound.empty() || !s.s_stems.empty() || !s.u0_leaves.empty()) return std::nullopt;
    if (s.m_links.size() != 1 || s.l_leaves.size() != 3) return std::nullopt;
    if (s.u_leaves.size() != 1) return std::nullopt;
    int a = s.u_leaves[0];

    const auto& pair_link = inst.links[s.m_links[0]];
    int p = st.sup_of[pair_link.u], q = st.sup_of[pair_link.v];

    std::vector<char> in(st.next_super, 0);
    for (int sup : s.subtree) in[sup] = 1;

    auto open_at = [&](int b) {
        for (int idx : st.sup_adj[b]) {
            const auto& ll = st.live_links[idx];
            int other = (ll.a == b) ? ll.b : ll.a;
            if (!in[other]) return true;
        }
        return false;
    };
    auto qualifies = [&](int b, int bp) {
        if (find_live(st, a, bp) < 0) return false;
        if (contraction_makes_leaf(st, a, bp)) return false;
        return open_at(b);
    };

    bool pq = qualifies(p, q), qp = qualifies(q, p);
    if (!pq && !qp) return std::nullopt;
    if (pq && qp) {
        // Both orderings work: b's up-node must be an ancestor of b''s.
        int up_p = 0, up_q = 0;
        {
            auto lp = up_link(st, p);
            up_p = (lp.a == p) ? lp.b : lp.a;
            auto lq = up_link(st, q);
            up_q = (lq.a == q) ? lq.b : lq.a;
        }
        if (st.sup_depth[up_p] != st.sup_depth[up_q])
            return st.sup_depth[up_p] < st.sup_depth[up_q] ? DangerCert{a, p, q}
                                                           : DangerCert{a, q, p};
        return p < q ? DangerCert{a, p, q} : DangerCert{a, q, p};
    }
    return pq ? DangerCert{a, p, q} : DangerCert{a, q, p};
}

std::pair<SubtreeSummary, std::vector<int>> find_tree(const ContractionState& st) {
    auto m = super_matching(st);
    auto mins = minimally_semi_closed(st, m);
    if (mins.empty()) throw Error("internal: no minimally semi-closed tree");

    auto rewritten = m;
    for (const auto& s : mins) {
        auto cert = is_dangerous(st, s);
        if (!cert)
            throw Error("find_tree precondition violated: a minimally semi-closed tree "
                        "is not dangerous");
        int live_idx = find_live(st, cert->a, cert->b_prime);
        if (live_idx < 0) throw Error("internal: dangerous certificate lost its link");
        int pair_link = s.m_links[0];
        bool replaced = false;
        for (auto& sm : rewritten)
            if (sm.rep_link == pair_link && !replaced) {
                auto key = std::minmax(cert->a, cert->b_prime);
                sm = {key.first, key.second, st.live_links[live_idx].rep};
                replaced = true;
            }
        if (!replaced) throw Error("internal: dangerous pair missing from matching");
    }

    auto mins_rw = minimally_semi_closed(st, rewritten);
    if (mins_rw.empty()) throw Error("internal: no semi-closed tree under rewrite");
    const auto& pick = mins_rw.front();

    auto summary_m = summarize(st, pick.root_sup, m);
    if (!summary_m.semi_closed)
        throw Error("internal: find-tree result not semi-closed w.r.t. M");
    if (is_dangerous(st, summary_m))
        throw Error("internal: find-tree returned a dangerous tree");

    std::vector<int> cover = pick.m_links;
    for (int u : pick.u_leaves) cover.push_back(up_link(st, u).rep);
    std::sort(cover.begin(), cover.end());
    cover.erase(std::unique(cover.begin(), cover.end()), cover.end());
    if (cover.size() != pick.m_links.size() + pick.u_leaves.size())
        throw Error("internal: find-tree cover size identity violated");
    if (cover.size() != summary_m.m_links.size() + summary_m.u_leaves.size())
        throw Error("internal: matching bijection size identity violated");
    return {summary_m, cover};
}

void contract_subtree(ContractionState& st, const SubtreeSummary& summary,
                      const std::vector<int>& links, StepKind kind) {
    const auto& inst = *st.inst;
    std::vector<char> in(st.next_super, 0);
    for (int sup : summary.subtree) in[sup] = 1;

    // A link covers the parent edge of every node on its contracted-tree
    // path except the shallowest one. The union must hit every subtree edge.
    std::vector<char> covered(st.next_super, 0);
    for (int id : links) {
        const auto& l = inst.links[id];
        int a = st.sup_of[l.u], b = st.sup_of[l.v];
        if (!in[a] || !in[b])
            throw Error("contract_subtree: cover link leaves the subtree");
        auto path = sup_path(st, a, b);
        int top = path[0];
        for (int s : path)
            if (st.sup_depth[s] < st.sup_depth[top]) top = s;
        for (int s : path)
            if (s != top) covered[s] = 1;
    }
    for (int sup : summary.subtree)
        if (sup != summary.root_sup && !covered[sup])
            throw Error("contract_subtree: cover misses a subtree edge");

    ContractionRecord rec;
    rec.kind = kind;
    rec.root_sup = summary.root_sup;
    rec.absorbed = summary.subtree;
    rec.added_links = links;
    rec.m_size = (int)summary.m_links.size();
    rec.m_twin = summary.m_twin;
    rec.u_size = (int)summary.u_leaves.size();
    rec.u0_size = (int)summary.u0_leaves.size();
    rec.c_size = (int)summary.c_compound.size();
    rec.r_live = summary.r_live;
    rec.m_links = summary.m_links;

    for (int id : links) st.partial.push_back(id);
    std::erase_if(st.matching, [&](int mid) {
        return std::find(summary.m_links.begin(), summary.m_links.end(), mid) !=
               summary.m_links.end();
    });
    rec.new_super = merge_supers(st, summary.subtree);
    st.trace.steps.push_back(std::move(rec));
    rebuild(st);
}

SolveResult solve_with_cover(const TapInstance& inst, const ExactLeafCover& cover) {
    ContractionState st = init_state(inst, cover);
    int guard = 2 * inst.tree.n() + 4;
    while (st.live.size() > 1) {
        if (--guard < 0) throw Error("internal: contraction loop failed to make progress");
        greedy_contract_exhaust(st);
        if (st.live.size() <= 1) break;
        auto m = super_matching(st);
        auto mins = minimally_semi_closed(st, m);
        if (mins.empty()) throw Error("internal: no minimally semi-closed tree");
        const SubtreeSummary* choice = nullptr;
        for (const auto& s : mins)
            if (!is_dangerous(st, s)) {
                choice = &s;
                break;
            }
        if (choice) {
            std::vector<int> cover_links = choice->m_links;
            for (int u : choice->u_leaves) cover_links.push_back(up_link(st, u).rep);
            std::sort(cover_links.begin(), cover_links.end());
            cover_links.erase(std::unique(cover_links.begin(), cover_links.end()),
                              cover_links.end());
            if (cover_links.size() != choice->m_links.size() + choice->u_leaves.size())
                throw Error("internal: cover size identity violated");
            contract_subtree(st, *choice, cover_links, StepKind::SemiClosed);
        } else {
            auto [summary, cover_links] = find_tree(st);
            contract_subtree(st, summary, cover_links, StepKind::FindTree);
        }
    }

    SolveResult res;
    res.cover = cover;
    res.trace = std::move(st.trace);
    std::vector<LinkPair> partial_pairs;
    for (int id : st.partial) partial_pairs.push_back(inst.links[id].pair());
    res.solution = map_to_original(inst, partial_pairs);
    if (!validate_solution(inst, res.solution))
        throw Error("internal: produced solution does not cover the tree");
    return res;
}

SolveResult solve(const TapInstance& inst, const LeafWeightConfig& cfg) {
    auto cover = min_weight_exact_cover(cfg, inst);
    return solve_with_cover(inst, cover);
}

AuditReport audit_ledger(const SolveTrace& trace, const TapInstance& inst,
                         const LpSolution& lp, const ExactLeafCover& cover,
                         const LeafWeightConfig& cfg) {
    check_rho(cfg);
    const Rat& rho = cfg.rho;
    if ((int)lp.x.size() != (int)inst.links.size())
        throw Error("audit_ledger: LP solution does not match the instance");

    std::vector<Rat> xdelta(inst.tree.n(), Rat(0));
    for (int id = 0; id < (int)inst.links.size(); ++id) {
        const auto& l = inst.links[id];
        xdelta[l.u] += lp.x[id];
        xdelta[l.v] += lp.x[id];
    }

    AuditReport rep;
    rep.all_legal = true;
    int idx = 0;
    for (const auto& step : trace.steps) {
        StepAudit a;
        a.kind = step.kind;
        a.index = idx++;
        a.sigma = 0;
        for (NodeId v : step.r_live) a.sigma += xdelta[v];
        Rat base = rho * step.m_size + Rat(step.m_twin) / 2 + Rat(step.u_size) +
                   Rat(step.c_size) + a.sigma / 2;
        a.tokens = base + (rho - Rat(3, 2)) * step.u0_size;
        a.tokens_alt = base + (rho - Rat(1, 2)) * step.u0_size;
        a.required = Rat((int)step.added_links.size() + 1);
        a.legal = a.tokens >= a.required;
        if (!a.legal) {
            rep.all_legal = false;
            if (rep.first_failure.empty())
                rep.first_failure = "illegal contraction at step " + std::to_string(a.index);
        }
        rep.steps.push_back(std::move(a));
    }

    rep.w_cover = cover.weight;
    Rat sig(0);
    for (NodeId v : r_nodes(inst)) sig += xdelta[v];
    rep.half_sigma_r = sig / 2;
    rep.bound_rhs = rep.w_cover + rep.half_sigma_r;
    rep.rho_tau = rho * lp.tau;

    std::vector<LinkPair> partial_pairs;
    for (const auto& step : trace.steps)
        for (int id : step.added_links) partial_pairs.push_back(inst.links[id].pair());
    rep.partial_size = (int)partial_pairs.size();
    rep.solution_size = (int)map_to_original(inst, partial_pairs).size();

    rep.ineq6_ok = rep.rho_tau >= rep.bound_rhs;
    rep.size_bound_ok = Rat(rep.partial_size) <= rep.bound_rhs;
    rep.ratio_ok = Rat(rep.solution_size) <= rep.rho_tau;
    rep.ok = rep.all_legal && rep.ineq6_ok && rep.size_bound_ok && rep.ratio_ok;
    if (rep.ok) {
        rep.first_failure.clear();
    } else if (rep.first_failure.empty()) {
        if (!rep.ineq6_ok) rep.first_failure = "leaf-cover bound inequality violated";
        else if (!rep.size_bound_ok) rep.first_failure = "partial solution exceeds the bound";
        else if (!rep.ratio_ok) rep.first_failure = "solution exceeds rho * tau";
    }
    return rep;
}

}  // namespace tap
