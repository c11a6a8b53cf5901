#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "tap/contraction.hpp"
#include "tap/gen.hpp"
#include "tap/instance.hpp"
#include "tap/lpbound.hpp"
#include "tap/oracle.hpp"

using namespace tap;

namespace {

TapInstance closed_fixture(int which) {
    switch (which) {
        case 1:
            return shadow_completion(
                parse_instance("tap 1\nnodes 2\nroot 0\nedge 0 1\nlink 0 1\n"));
        case 2:
            return shadow_completion(parse_instance(
                "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 1 2\nedge 1 3\nlink 2 3\nlink 0 2\n"));
        default:
            return shadow_completion(parse_instance(
                "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 1 2\nedge 2 3\nlink 0 3\n"));
    }
}

// Root 0 - 1; 1 - {2,4,5}; 2 - 3. After the subtree {2,3} contracts, the
// tree rooted at 1 has three leaves: the compound node, 4, and 5 with
// matched pair (4,5), link (2,5) giving the a-b' edge, and (0,4) leaving.
TapInstance danger_instance(bool with_ab_prime) {
    std::string text =
        "tap 1\nnodes 6\nroot 0\nedge 0 1\nedge 1 2\nedge 2 3\nedge 1 4\nedge 1 5\n"
        "link 2 3\nlink 4 5\nlink 0 4\n";
    text += with_ab_prime ? "link 2 5\n" : "link 1 2\n";
    return shadow_completion(parse_instance(text));
}

// Drives the state up to the point where the three-leaf tree under node 1
// is the unique minimally semi-closed tree.
ContractionState danger_state(const TapInstance& closed) {
    auto cover = min_weight_exact_cover({}, closed);
    auto st = init_state(closed, cover);
    greedy_contract_exhaust(st);
    auto mins = minimally_semi_closed(st, super_matching(st));
    REQUIRE(mins.size() == 1);
    REQUIRE(mins[0].root_sup == 2);
    std::vector<int> links = mins[0].m_links;
    for (int u : mins[0].u_leaves) links.push_back(up_link(st, u).rep);
    contract_subtree(st, mins[0], links, StepKind::SemiClosed);
    return st;
}

// 2-edge-connected component partition of the tree plus a set of links,
// computed independently via bridge finding.
std::vector<int> two_ecc_partition(const TapInstance& inst, const std::vector<int>& link_ids) {
    int n = inst.tree.n();
    std::vector<std::pair<int, int>> es;
    for (NodeId v = 0; v < n; ++v)
        if (v != inst.tree.root) es.push_back({v, inst.tree.parent[v]});
    for (int id : link_ids) es.push_back({inst.links[id].u, inst.links[id].v});
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (int i = 0; i < (int)es.size(); ++i) {
        adj[es[i].first].push_back({es[i].second, i});
        adj[es[i].second].push_back({es[i].first, i});
    }
    std::vector<int> tin(n, -1), low(n, 0);
    std::vector<char> is_bridge(es.size(), 0);
    int timer = 0;
    auto dfs = [&](auto&& self, int v, int pe) -> void {
        tin[v] = low[v] = timer++;
        for (auto [to, idx] : adj[v]) {
            if (idx == pe) continue;
            if (tin[to] >= 0) {
                low[v] = std::min(low[v], tin[to]);
            } else {
                self(self, to, idx);
                low[v] = std::min(low[v], low[to]);
                if (low[to] > tin[v]) is_bridge[idx] = 1;
            }
        }
    };
    dfs(dfs, inst.tree.root, -1);
    std::vector<int> comp(n, -1);
    int nc = 0;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = nc;
        std::vector<int> stack{s};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (auto [to, idx] : adj[v])
                if (!is_bridge[idx] && comp[to] < 0) {
                    comp[to] = nc;
                    stack.push_back(to);
                }
        }
        ++nc;
    }
    return comp;
}

}  // namespace

TEST_CASE("init_state on the fixtures") {
    auto f2 = closed_fixture(2);
    auto st2 = init_state(f2, min_weight_exact_cover({}, f2));
    CHECK(st2.live.size() == 4);
    CHECK(st2.matching.size() == 1);
    CHECK(f2.links[st2.matching[0]].pair() == LinkPair{2, 3});
    CHECK(st2.compound[0]);
    CHECK(!st2.compound[1]);

    auto f1 = closed_fixture(1);
    auto st1 = init_state(f1, min_weight_exact_cover({}, f1));
    CHECK(st1.matching.empty());

    auto broken = shadow_completion(parse_instance(
        "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 1 2\nedge 1 3\nlink 2 3\n"));
    ExactLeafCover dummy;
    CHECK_THROWS_AS(init_state(broken, dummy), Error);
}

TEST_CASE("up_link picks the shallowest endpoint") {
    auto f1 = closed_fixture(1);
    auto st1 = init_state(f1, min_weight_exact_cover({}, f1));
    auto l1 = up_link(st1, 1);
    CHECK(f1.links[l1.rep].pair() == LinkPair{0, 1});

    auto f3 = closed_fixture(3);
    auto st3 = init_state(f3, min_weight_exact_cover({}, f3));
    auto l3 = up_link(st3, 3);
    CHECK(f3.links[l3.rep].pair() == LinkPair{0, 3});

    // after contracting the subtree under node 1 in fixture 2, the compound
    // leaf's up-link goes to the root through the shadow of (0,2)
    auto f2 = closed_fixture(2);
    auto st2 = init_state(f2, min_weight_exact_cover({}, f2));
    auto mins = minimally_semi_closed(st2, super_matching(st2));
    REQUIRE(mins.size() == 1);
    contract_subtree(st2, mins[0], mins[0].m_links, StepKind::SemiClosed);
    REQUIRE(st2.live.size() == 2);
    int comp = st2.live[0] == 0 ? st2.live[1] : st2.live[0];
    auto lc = up_link(st2, comp);
    CHECK(f2.links[lc.rep].pair() == LinkPair{0, 1});
    CHECK(f2.links[lc.rep].origin == LinkPair{0, 2});
}

TEST_CASE("greedy contractions") {
    // nothing applies on fixture 2 (both leaves matched) or fixture 1
    auto f2 = closed_fixture(2);
    auto st2 = init_state(f2, min_weight_exact_cover({}, f2));
    greedy_contract_exhaust(st2);
    CHECK(st2.trace.steps.empty());

    auto f1 = closed_fixture(1);
    auto st1 = init_state(f1, min_weight_exact_cover({}, f1));
    greedy_contract_exhaust(st1);
    CHECK(st1.trace.steps.empty());

    // a compound leaf with a live link to an unmatched original leaf
    auto g = shadow_completion(parse_instance(
        "tap 1\nnodes 5\nroot 0\nedge 0 1\nedge 1 2\nedge 2 3\nedge 1 4\n"
        "link 2 3\nlink 2 4\nlink 0 2\n"));
    auto res = solve(g);
    REQUIRE(res.trace.steps.size() == 3);
    CHECK(res.trace.steps[0].kind == StepKind::SemiClosed);
    CHECK(res.trace.steps[1].kind == StepKind::Greedy);
    CHECK(res.trace.steps[2].kind == StepKind::SemiClosed);
    CHECK(res.trace.steps[1].u_size == 2);
    CHECK(res.trace.steps[1].u0_size == 1);  // one endpoint compound, one original
    CHECK((int)res.solution.size() == exact_opt(g).opt_size);
}

TEST_CASE("semi-closed checks on fixture 2") {
    auto f2 = closed_fixture(2);
    auto st = init_state(f2, min_weight_exact_cover({}, f2));
    auto m = super_matching(st);
    CHECK(is_semi_closed(st, 1, m));       // the matched pair sits inside
    CHECK(!is_semi_closed(st, 2, m));      // splits the pair
    CHECK(is_semi_closed(st, 0, m));       // the whole tree, always

    auto mins = minimally_semi_closed(st, m);
    REQUIRE(mins.size() == 1);
    CHECK(mins[0].root_sup == 1);
    CHECK(mins[0].m_links.size() == 1);
    CHECK(mins[0].m_twin == 1);
    CHECK(mins[0].u_leaves.empty());
    CHECK(mins[0].l_leaves == std::vector<int>{2, 3});
    CHECK(mins[0].s_stems == std::vector<NodeId>{1});
    CHECK(mins[0].r_live.empty());
}

TEST_CASE("whole tree is minimal when nothing smaller closes") {
    auto f1 = closed_fixture(1);
    auto st = init_state(f1, min_weight_exact_cover({}, f1));
    auto mins = minimally_semi_closed(st, super_matching(st));
    REQUIRE(mins.size() == 1);
    CHECK(mins[0].root_sup == 0);
    CHECK(mins[0].u_leaves == std::vector<int>{1});
    CHECK(mins[0].c_compound == std::vector<int>{0});
    CHECK(mins[0].r_live == std::vector<NodeId>{0});
}

TEST_CASE("two-leaf trees are never dangerous") {
    auto f2 = closed_fixture(2);
    auto st = init_state(f2, min_weight_exact_cover({}, f2));
    auto mins = minimally_semi_closed(st, super_matching(st));
    REQUIRE(mins.size() == 1);
    CHECK(!is_dangerous(st, mins[0]));
}

TEST_CASE("dangerous tree certificate") {
    auto inst = danger_instance(true);
    auto st = danger_state(inst);
    auto mins = minimally_semi_closed(st, super_matching(st));
    REQUIRE(mins.size() == 1);
    CHECK(mins[0].root_sup == 1);
    CHECK(mins[0].l_leaves.size() == 3);
    auto cert = is_dangerous(st, mins[0]);
    REQUIRE(cert.has_value());
    CHECK(cert->a == 6);        // the compound node from the first contraction
    CHECK(cert->b == 4);        // open toward the root through (0,4)
    CHECK(cert->b_prime == 5);  // reachable from the compound node via (2,5)
}

TEST_CASE("certificate requires the a-b' link") {
    auto inst = danger_instance(false);
    auto st = danger_state(inst);
    auto mins = minimally_semi_closed(st, super_matching(st));
    REQUIRE(mins.size() == 1);
    CHECK(!is_dangerous(st, mins[0]));
}

TEST_CASE("find_tree rewrites the matching and returns a larger tree") {
    auto inst = danger_instance(true);
    auto st = danger_state(inst);
    auto [summary, cover_links] = find_tree(st);
    CHECK(!is_dangerous(st, summary));
    CHECK(summary.root_sup == 0);  // strictly contains the dangerous tree
    CHECK(cover_links.size() == summary.m_links.size() + summary.u_leaves.size());
    std::set<LinkPair> picked;
    for (int id : cover_links) picked.insert(inst.links[id].pair());
    CHECK(picked == std::set<LinkPair>{{2, 5}, {0, 4}});
}

TEST_CASE("find_tree demands an all-dangerous precondition") {
    auto f2 = closed_fixture(2);
    auto st = init_state(f2, min_weight_exact_cover({}, f2));
    CHECK_THROWS_AS(find_tree(st), Error);
}

TEST_CASE("solve on the fixtures") {
    auto res1 = solve(closed_fixture(1));
    CHECK(res1.solution == std::vector<LinkPair>{{0, 1}});
    REQUIRE(res1.trace.steps.size() == 1);
    CHECK(res1.trace.steps[0].kind == StepKind::SemiClosed);

    auto res2 = solve(closed_fixture(2));
    CHECK(res2.solution == std::vector<LinkPair>{{0, 2}, {2, 3}});
    REQUIRE(res2.trace.steps.size() == 2);
    CHECK(res2.trace.steps[0].kind == StepKind::SemiClosed);
    CHECK(res2.trace.steps[1].kind == StepKind::SemiClosed);

    auto res3 = solve(closed_fixture(3));
    CHECK(res3.solution.size() == 1);
}

TEST_CASE("solve routes through find_tree on the dangerous instance") {
    auto inst = danger_instance(true);
    auto res = solve(inst);
    REQUIRE(res.trace.steps.size() == 2);
    CHECK(res.trace.steps[0].kind == StepKind::SemiClosed);
    CHECK(res.trace.steps[1].kind == StepKind::FindTree);
    CHECK((int)res.solution.size() == 3);
    CHECK(exact_opt(inst).opt_size == 3);

    // the cover-size identity of the rewritten step
    CHECK((int)res.trace.steps[1].added_links.size() ==
          res.trace.steps[1].m_size + res.trace.steps[1].u_size);
}

TEST_CASE("contract_subtree rejects a non-covering link set") {
    auto f2 = closed_fixture(2);
    auto st = init_state(f2, min_weight_exact_cover({}, f2));
    auto mins = minimally_semi_closed(st, super_matching(st));
    REQUIRE(mins.size() == 1);
    std::vector<int> bad{f2.link_id(1, 2)};  // covers only one of the two edges
    CHECK_THROWS_AS(contract_subtree(st, mins[0], bad, StepKind::SemiClosed), Error);
}

TEST_CASE("audit on the fixtures") {
    LeafWeightConfig cfg;
    {
        auto f2 = closed_fixture(2);
        auto cover = min_weight_exact_cover(cfg, f2);
        auto res = solve_with_cover(f2, cover);
        auto lp = solve_lp(build_pi_model(f2));
        auto audit = audit_ledger(res.trace, f2, lp, cover, cfg);
        CHECK(audit.ok);
        REQUIRE(audit.steps.size() == 2);
        CHECK(audit.steps[0].tokens == Rat(9, 4));  // rho + 1/2 from the twin pair
        CHECK(audit.steps[0].required == Rat(2));
        CHECK(audit.steps[1].legal);
        CHECK(audit.solution_size == 2);
        CHECK(audit.rho_tau == Rat(7, 2));
    }
    {
        auto f1 = closed_fixture(1);
        auto cover = min_weight_exact_cover(cfg, f1);
        auto res = solve_with_cover(f1, cover);
        auto lp = solve_lp(build_pi_model(f1));
        auto audit = audit_ledger(res.trace, f1, lp, cover, cfg);
        CHECK(audit.ok);
        REQUIRE(audit.steps.size() == 1);
        // unmatched original leaf (5/4) + root compound token (1) + root's
        // frozen half-share (1/2)
        CHECK(audit.steps[0].tokens == Rat(11, 4));
        CHECK(audit.steps[0].tokens_alt == Rat(15, 4));
        CHECK(audit.bound_rhs == Rat(7, 4));
        CHECK(audit.ineq6_ok);
    }
}

TEST_CASE("random sweep: progress, ratio, trace replay, component structure") {
    for (std::uint64_t seed = 1; seed <= 70; ++seed) {
        GenSpec spec;
        spec.n = 4 + (int)(seed % 9);
        spec.seed = seed * 1299721 + 5;
        spec.mode = static_cast<GenMode>(seed % 3);
        auto inst = gen_instance(spec);
        if (inst.links.size() > 30) continue;
        auto closed = shadow_completion(inst);

        auto res = solve(closed);
        CHECK(validate_solution(closed, res.solution));
        CHECK((int)res.trace.steps.size() < closed.tree.n());

        auto opt = exact_opt(inst).opt_size;
        CHECK(Rat((int)res.solution.size()) <= Rat(7, 4) * Rat(opt));
        CHECK((int)res.solution.size() >= opt);

        // replaying the trace reproduces the partial solution and the
        // contracted partition matches an independent 2ecc computation
        std::vector<int> sup(closed.tree.n());
        std::iota(sup.begin(), sup.end(), 0);
        std::vector<int> prefix;
        for (const auto& step : res.trace.steps) {
            for (int id : step.added_links) prefix.push_back(id);
            for (NodeId v = 0; v < closed.tree.n(); ++v)
                if (std::find(step.absorbed.begin(), step.absorbed.end(), sup[v]) !=
                    step.absorbed.end())
                    sup[v] = step.new_super;
            auto comp = two_ecc_partition(closed, prefix);
            for (NodeId u = 0; u < closed.tree.n(); ++u)
                for (NodeId v = u + 1; v < closed.tree.n(); ++v)
                    CHECK((sup[u] == sup[v]) == (comp[u] == comp[v]));
        }
        std::vector<LinkPair> prefix_pairs;
        for (int id : prefix) prefix_pairs.push_back(closed.links[id].pair());
        CHECK(map_to_original(closed, prefix_pairs) == res.solution);
    }
}
