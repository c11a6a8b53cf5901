#include "tap/stress.hpp"

#include <algorithm>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "tap/contraction.hpp"
#include "tap/lpbound.hpp"
#include "tap/oracle.hpp"

namespace tap {

TapInstance stress_instance(const StressOptions& opt, int index, std::uint64_t* seed_out) {
    Rng mix(opt.seed ^ (0x100000001b3ull * (std::uint64_t)(index + 1)));
    static const Rat densities[] = {Rat(1, 8), Rat(1, 5), Rat(1, 3)};
    for (int attempt = 0;; ++attempt) {
        if (attempt > 200) throw Error("stress: cannot sample an instance within caps");
        GenSpec spec;
        spec.seed = mix.next();
        spec.n = opt.n_min + (int)mix.below((std::uint64_t)(opt.n_max - opt.n_min + 1));
        spec.link_density = densities[mix.below(3)];
        spec.mode = static_cast<GenMode>(mix.below(3));
        auto inst = gen_instance(spec);
        if ((int)inst.leaves.size() > opt.leaf_cap) continue;
        if ((int)inst.links.size() > opt.link_cap) continue;
        if (seed_out) *seed_out = spec.seed;
        return inst;
    }
}

namespace {

struct InstanceOutcome {
    Rat ratio_opt{0}, ratio_tau{0};
    std::vector<StressFailure> failures;
};

InstanceOutcome run_one(const StressOptions& opt, const TapInstance& inst,
                        std::uint64_t seed) {
    InstanceOutcome out;
    auto fail = [&](const std::string& check, const std::string& detail) {
        out.failures.push_back({seed, check, detail});
    };
    try {
        LeafWeightConfig cfg{opt.rho};
        auto closed = shadow_completion(inst);
        auto cover = min_weight_exact_cover(cfg, closed);
        auto result = solve_with_cover(closed, cover);
        if (!validate_solution(closed, result.solution)) {
            fail("validate", "solution does not cover the tree");
            return out;
        }
        int alg = (int)result.solution.size();

        auto oracle = exact_opt(inst);
        if (alg < oracle.opt_size)
            fail("sandwich", "algorithm beat the exact optimum (impossible)");
        out.ratio_opt = Rat(alg) / Rat(oracle.opt_size);
        if (Rat(alg) > opt.rho * Rat(oracle.opt_size))
            fail("ratio_opt", "solution " + std::to_string(alg) + " exceeds rho * OPT, OPT = " +
                                  std::to_string(oracle.opt_size));

        auto lp = solve_lp(build_pi_model(closed));
        auto cut = solve_lp(build_cut_model(closed));
        out.ratio_tau = Rat(alg) / lp.tau;
        if (Rat(alg) > opt.rho * lp.tau)
            fail("ratio_tau", "solution " + std::to_string(alg) + " exceeds rho * tau = " +
                                  rat_str(opt.rho * lp.tau));
        if (!(cut.tau <= lp.tau && lp.tau <= Rat(oracle.opt_size) &&
              Rat(oracle.opt_size) <= Rat(alg)))
            fail("sandwich", "cut=" + rat_str(cut.tau) + " tau=" + rat_str(lp.tau) +
                                 " opt=" + std::to_string(oracle.opt_size) +
                                 " alg=" + std::to_string(alg));

        Rat rhs = coupons_rhs(closed, lp, cover);
        if (opt.rho * lp.tau < rhs)
            fail("ineq6", "rho*tau = " + rat_str(opt.rho * lp.tau) + " < rhs = " + rat_str(rhs));

        auto audit = audit_ledger(result.trace, closed, lp, cover, cfg);
        if (!audit.ok) fail("ledger", audit.first_failure);
    } catch (const Error& e) {
        fail("exception", e.what());
    }
    return out;
}

}  // namespace

StressReport run_stress(const StressOptions& opt) {
    StressReport rep;
    rep.instances = opt.count;
    std::vector<InstanceOutcome> outcomes(opt.count);

    int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        for (int i = 0; i < opt.count; ++i) {
            std::uint64_t seed = 0;
            auto inst = stress_instance(opt, i, &seed);
            outcomes[i] = run_one(opt, inst, seed);
        }
    } else {
        std::mutex mu;
        int next = 0;
        auto worker = [&] {
            while (true) {
                int i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= opt.count) return;
                    i = next++;
                }
                std::uint64_t seed = 0;
                auto inst = stress_instance(opt, i, &seed);
                outcomes[i] = run_one(opt, inst, seed);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (auto& o : outcomes) {
        rep.max_ratio_opt = std::max(rep.max_ratio_opt, o.ratio_opt);
        rep.max_ratio_tau = std::max(rep.max_ratio_tau, o.ratio_tau);
        for (auto& f : o.failures) rep.failures.push_back(f);
    }
    return rep;
}

std::string stress_report_json(const StressReport& rep) {
    nlohmann::json j;
    j["instances"] = rep.instances;
    j["max_ratio_opt"] = rat_str(rep.max_ratio_opt);
    j["max_ratio_tau"] = rat_str(rep.max_ratio_tau);
    j["failures"] = nlohmann::json::array();
    for (const auto& f : rep.failures)
        j["failures"].push_back({{"seed", f.seed}, {"check", f.check}, {"detail", f.detail}});
    return j.dump(2);
}

StressReport parse_stress_report_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    StressReport rep;
    rep.instances = j.at("instances").get<int>();
    rep.max_ratio_opt = parse_rat(j.at("max_ratio_opt").get<std::string>());
    rep.max_ratio_tau = parse_rat(j.at("max_ratio_tau").get<std::string>());
    for (const auto& f : j.at("failures")) {
        rep.failures.push_back({f.at("seed").get<std::uint64_t>(),
                                f.at("check").get<std::string>(),
                                f.at("detail").get<std::string>()});
    }
    return rep;
}

}  // namespace tap
