// Deterministic instance generators for testing and stress sweeps.
#pragma once

#include <cstdint>
#include <string>

#include "tap/instance.hpp"
#include "tap/rational.hpp"

namespace tap {

enum class GenMode { RandomTree, Caterpillar, StarOfPaths };

struct GenSpec {
    int n = 8;
    Rat link_density = Rat(1, 4);  // in (0, 1]
    std::uint64_t seed = 0;
    GenMode mode = GenMode::RandomTree;
};

// Portable splitmix64; identical sequences on every platform.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t below(std::uint64_t k) {  // uniform in [0, k)
        std::uint64_t lim = ~std::uint64_t(0) - ~std::uint64_t(0) % k;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= lim);
        return v % k;
    }
};

GenMode parse_gen_mode(const std::string& name);
std::string gen_mode_name(GenMode mode);

// Feasibility is patched by linking the deepest uncovered edge to the root.
TapInstance gen_instance(const GenSpec& spec);
std::string gen_instance_text(const GenSpec& spec);

}  // namespace tap
