#include <doctest.h>

#include <algorithm>

#include "tap/gen.hpp"
#include "tap/instance.hpp"
#include "tap/oracle.hpp"

using namespace tap;

namespace {

TapInstance fixture(int which) {
    switch (which) {
        case 1:
            return parse_instance("tap 1\nnodes 2\nroot 0\nedge 0 1\nlink 0 1\n");
        case 2:
            return parse_instance(
                "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 1 2\nedge 1 3\nlink 2 3\nlink 0 2\n");
        default:
            return parse_instance(
                "tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 1 2\nedge 2 3\nlink 0 3\n");
    }
}

}  // namespace

TEST_CASE("exact optimum on the fixtures") {
    CHECK(exact_opt(fixture(1)).opt_size == 1);
    auto r2 = exact_opt(fixture(2));
    CHECK(r2.opt_size == 2);
    CHECK(std::find(r2.witnesses.begin(), r2.witnesses.end(),
                    std::vector<LinkPair>{{0, 2}, {2, 3}}) != r2.witnesses.end());
    CHECK(exact_opt(fixture(3)).opt_size == 1);
}

TEST_CASE("exact_opt caps and infeasibility") {
    auto broken =
        parse_instance("tap 1\nnodes 4\nroot 0\nedge 0 1\nedge 1 2\nedge 1 3\nlink 2 3\n");
    CHECK_THROWS_AS(exact_opt(broken), Error);
}

TEST_CASE("every witness is valid and optimal") {
    for (std::uint64_t seed = 2; seed <= 50; ++seed) {
        GenSpec spec;
        spec.n = 4 + (int)(seed % 8);
        spec.seed = seed * 131;
        spec.mode = static_cast<GenMode>(seed % 3);
        auto inst = gen_instance(spec);
        if (inst.links.size() > 30) continue;
        auto closed = shadow_completion(inst);
        auto res = exact_opt(inst);
        for (const auto& w : res.witnesses) {
            CHECK((int)w.size() == res.opt_size);
            CHECK(validate_solution(closed, w));
        }
    }
}

TEST_CASE("exact leaf cover oracle on fixtures") {
    LeafWeightConfig cfg;
    auto f2 = shadow_completion(fixture(2));
    auto r2 = exact_leaf_cover_opt(f2, cfg);
    CHECK(r2.weight == Rat(9, 4));
    CHECK(r2.links == std::vector<LinkPair>{{2, 3}});

    auto f1 = shadow_completion(fixture(1));
    CHECK(exact_leaf_cover_opt(f1, cfg).weight == Rat(5, 4));

    // two leaves with only single-leaf links available
    auto two = shadow_completion(parse_instance(
        "tap 1\nnodes 5\nroot 0\nedge 0 1\nedge 1 2\nedge 1 3\nedge 3 4\nlink 0 2\nlink 0 4\n"));
    auto r = exact_leaf_cover_opt(two, cfg);
    CHECK(r.weight == Rat(5, 2));
}

TEST_CASE("shadow-minimal twin-maximal witness on fixture 2") {
    auto closed = shadow_completion(fixture(2));
    auto w = shadow_minimal_twin_max(closed);
    CHECK(w == std::vector<LinkPair>{{0, 1}, {2, 3}});
}

TEST_CASE("twin-max witness is an exact leaf cover on random instances") {
    int tested = 0;
    for (std::uint64_t seed = 1; seed <= 160; ++seed) {
        GenSpec spec;
        spec.n = 4 + (int)(seed % 6);
        spec.seed = seed * 977 + 3;
        spec.mode = static_cast<GenMode>(seed % 3);
        auto inst = gen_instance(spec);
        auto closed = shadow_completion(inst);
        if (closed.links.size() > 30) continue;
        ++tested;
        auto w = shadow_minimal_twin_max(closed);
        CHECK(validate_solution(closed, w));
        CHECK((int)w.size() == exact_opt(inst).opt_size);
        // exact cover of the leaves (the structural claim the relaxation needs)
        std::vector<int> deg(closed.tree.n(), 0);
        for (auto [u, v] : w) {
            ++deg[u];
            ++deg[v];
        }
        for (NodeId leaf : closed.leaves) CHECK(deg[leaf] == 1);
    }
    CHECK(tested >= 100);
}
