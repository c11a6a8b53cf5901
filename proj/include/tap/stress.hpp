// Randomized sweep harness: solve, exact optimum, LP bound and ledger audit
// on every instance, aggregating worst ratios and invariant failures.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tap/gen.hpp"
#include "tap/leafcover.hpp"
#include "tap/rational.hpp"

namespace tap {

struct StressFailure {
    std::uint64_t seed = 0;
    std::string check;
    std::string detail;
};

struct StressReport {
    int instances = 0;
    Rat max_ratio_opt{0};
    Rat max_ratio_tau{0};
    std::vector<StressFailure> failures;
};

struct StressOptions {
    int count = 100;
    int n_min = 4;
    int n_max = 12;
    std::uint64_t seed = 1;
    Rat rho{7, 4};
    int leaf_cap = 8;    // resample instances with more leaves
    int link_cap = 30;   // oracle cap on original links
    int jobs = 1;
};

// Deterministic instance for sweep index i (resamples until caps hold).
TapInstance stress_instance(const StressOptions& opt, int index, std::uint64_t* seed_out);

StressReport run_stress(const StressOptions& opt);

std::string stress_report_json(const StressReport& rep);
StressReport parse_stress_report_json(const std::string& text);

}  // namespace tap
