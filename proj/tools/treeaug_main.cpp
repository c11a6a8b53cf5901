// Command-line front end: generators, solver, LP bounds, exact oracle,
// ledger audits and the stress sweep.
//
// Exit codes: 0 ok, 1 invariant/check failure, 2 bad input.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tap/contraction.hpp"
#include "tap/gen.hpp"
#include "tap/instance.hpp"
#include "tap/leafcover.hpp"
#include "tap/lpbound.hpp"
#include "tap/oracle.hpp"
#include "tap/stress.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw tap::Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

tap::Rat parse_rho(const std::string& s) {
    tap::Rat rho = tap::parse_rat(s);
    if (rho < tap::Rat(3, 2)) throw tap::Error("rho must be at least 3/2, got " + s);
    return rho;
}

json links_json(const std::vector<tap::LinkPair>& links) {
    json arr = json::array();
    for (auto [u, v] : links) arr.push_back({u, v});
    return arr;
}

const char* kind_name(tap::StepKind k) {
    switch (k) {
        case tap::StepKind::Greedy: return "greedy";
        case tap::StepKind::SemiClosed: return "semi-closed";
        case tap::StepKind::FindTree: return "find-tree";
    }
    return "?";
}

json trace_record_json(const tap::TapInstance& inst, const tap::ContractionRecord& rec,
                       const tap::StepAudit* audit) {
    json j;
    j["kind"] = kind_name(rec.kind);
    if (rec.root_sup >= 0) j["root"] = rec.root_sup;
    j["absorbed"] = rec.absorbed;
    j["new_node"] = rec.new_super;
    json links = json::array();
    for (int id : rec.added_links) {
        const auto& l = inst.links[id];
        links.push_back({l.u, l.v});
    }
    j["links"] = links;
    j["m_size"] = rec.m_size;
    j["m_twin"] = rec.m_twin;
    j["u_size"] = rec.u_size;
    j["u0_size"] = rec.u0_size;
    j["c_size"] = rec.c_size;
    if (audit) {
        j["tokens"] = tap::rat_str(audit->tokens);
        j["required"] = tap::rat_str(audit->required);
        j["sigma"] = tap::rat_str(audit->sigma);
        j["legal"] = audit->legal;
    }
    return j;
}

void write_trace(const std::string& path, const tap::TapInstance& inst,
                 const tap::SolveTrace& trace, const tap::AuditReport* audit) {
    std::ofstream out(path);
    if (!out) throw tap::Error("cannot write " + path);
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const tap::StepAudit* a = audit && i < audit->steps.size() ? &audit->steps[i] : nullptr;
        out << trace_record_json(inst, trace.steps[i], a).dump() << "\n";
    }
}

void emit_dot(const std::string& dir, const tap::TapInstance& closed,
              const tap::SolveTrace& trace) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    // Replay the contraction sequence, writing one snapshot per step.
    int n = closed.tree.n();
    std::vector<int> sup(n);
    for (int v = 0; v < n; ++v) sup[v] = v;
    auto snapshot = [&](int idx) {
        std::ofstream out(fs::path(dir) / ("step" + std::to_string(idx) + ".dot"));
        out << "graph contracted_tree {\n";
        std::vector<std::vector<int>> members;
        std::vector<int> ids;
        for (int v = 0; v < n; ++v) {
            auto it = std::find(ids.begin(), ids.end(), sup[v]);
            if (it == ids.end()) {
                ids.push_back(sup[v]);
                members.push_back({v});
            } else {
                members[it - ids.begin()].push_back(v);
            }
        }
        for (size_t i = 0; i < ids.size(); ++i) {
            out << "  n" << ids[i] << " [label=\"";
            for (size_t k = 0; k < members[i].size(); ++k)
                out << (k ? "," : "") << members[i][k];
            out << "\"" << (members[i].size() > 1 ? ",style=filled" : "") << "];\n";
        }
        for (int v = 0; v < n; ++v) {
            if (v == closed.tree.root) continue;
            int a = sup[v], b = sup[closed.tree.parent[v]];
            if (a != b) out << "  n" << a << " -- n" << b << ";\n";
        }
        out << "}\n";
    };
    snapshot(0);
    for (size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& rec = trace.steps[i];
        for (int v = 0; v < n; ++v)
            if (std::find(rec.absorbed.begin(), rec.absorbed.end(), sup[v]) !=
                rec.absorbed.end())
                sup[v] = rec.new_super;
        snapshot((int)i + 1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tree augmentation solver with exact LP certification"};
    app.require_subcommand(1);

    bool as_json = false;
    std::string rho_text = "7/4";
    std::string emit_dot_dir;
    app.add_flag("--json", as_json, "machine-readable output");
    app.add_option("--rho", rho_text, "weight parameter p/q, at least 3/2");
    app.add_option("--emit-dot", emit_dot_dir, "write contracted-tree snapshots to DIR");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random feasible instance");
    int gen_n = 8;
    std::string gen_density = "1/4", gen_mode = "random-tree", gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--n", gen_n, "node count")->required();
    gen->add_option("--density", gen_density, "link density p/q in (0,1]");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--mode", gen_mode, "random-tree | caterpillar | star-of-paths");
    gen->add_option("-o,--output", gen_out, "output file (default stdout)");

    // file-based subcommands
    std::string in_path;
    auto add_input = [&](CLI::App* cmd) {
        cmd->add_option("file", in_path, "instance file")->required();
    };
    auto* solve_cmd = app.add_subcommand("solve", "run the approximation algorithm");
    bool solve_audit = false;
    std::string trace_path;
    add_input(solve_cmd);
    solve_cmd->add_flag("--audit", solve_audit, "verify the token ledger against the LP");
    solve_cmd->add_option("--trace", trace_path, "write the contraction trace as JSON lines");

    auto* cover_cmd = app.add_subcommand("leafcover", "minimum-weight exact leaf cover");
    add_input(cover_cmd);

    auto* bound_cmd = app.add_subcommand("bound", "LP relaxation and cut-LP values");
    std::string lp_format;
    bool lp_float = false;
    int leaf_cap = 16;
    add_input(bound_cmd);
    bound_cmd->add_option("--lp-format", lp_format, "dump rows; only 'text' is supported");
    bound_cmd->add_flag("--float-fallback", lp_float,
                        "solve in floating point (exploration only)");
    bound_cmd->add_option("--leaf-cap", leaf_cap, "odd-set enumeration cap");

    auto* exact_cmd = app.add_subcommand("exact", "brute-force exact optimum");
    add_input(exact_cmd);

    auto* audit_cmd = app.add_subcommand("audit", "solve plus full certificate audit");
    add_input(audit_cmd);

    auto* stress_cmd = app.add_subcommand("stress", "randomized invariant sweep");
    tap::StressOptions sopt;
    std::uint64_t stress_seed = 1;
    stress_cmd->add_option("--count", sopt.count, "number of instances");
    stress_cmd->add_option("--nmin", sopt.n_min, "smallest node count");
    stress_cmd->add_option("--nmax", sopt.n_max, "largest node count");
    stress_cmd->add_option("--seed", stress_seed, "sweep seed");
    stress_cmd->add_option("--jobs", sopt.jobs, "parallel workers");

    CLI11_PARSE(app, argc, argv);

    try {
        tap::LeafWeightConfig cfg{parse_rho(rho_text)};

        if (gen->parsed()) {
            tap::GenSpec spec;
            spec.n = gen_n;
            spec.link_density = tap::parse_rat(gen_density);
            spec.seed = gen_seed;
            spec.mode = tap::parse_gen_mode(gen_mode);
            std::string text = tap::gen_instance_text(spec);
            if (gen_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(gen_out);
                if (!out) throw tap::Error("cannot write " + gen_out);
                out << text;
            }
            return 0;
        }

        if (stress_cmd->parsed()) {
            sopt.seed = stress_seed;
            sopt.rho = cfg.rho;
            auto rep = tap::run_stress(sopt);
            if (as_json) {
                std::cout << tap::stress_report_json(rep) << "\n";
            } else {
                std::cout << "instances:     " << rep.instances << "\n";
                std::cout << "max |ALG|/OPT: " << tap::rat_str(rep.max_ratio_opt) << "\n";
                std::cout << "max |ALG|/tau: " << tap::rat_str(rep.max_ratio_tau) << "\n";
                std::cout << "failures:      " << rep.failures.size() << "\n";
                for (const auto& f : rep.failures)
                    std::cout << "  seed " << f.seed << " [" << f.check << "] " << f.detail
                              << "\n";
            }
            return rep.failures.empty() ? 0 : 1;
        }

        auto inst = tap::parse_instance(read_file(in_path));
        auto closed = tap::shadow_completion(inst);

        if (solve_cmd->parsed() || audit_cmd->parsed()) {
            bool with_audit = solve_audit || audit_cmd->parsed();
            auto cover = tap::min_weight_exact_cover(cfg, closed);
            auto result = tap::solve_with_cover(closed, cover);
            std::optional<tap::AuditReport> audit;
            std::optional<tap::LpSolution> lp;
            if (with_audit) {
                lp = tap::solve_lp(tap::build_pi_model(closed));
                audit = tap::audit_ledger(result.trace, closed, *lp, cover, cfg);
            }
            if (!trace_path.empty())
                write_trace(trace_path, closed, result.trace, audit ? &*audit : nullptr);
            if (!emit_dot_dir.empty()) emit_dot(emit_dot_dir, closed, result.trace);

            if (as_json) {
                json j;
                j["size"] = result.solution.size();
                j["links"] = links_json(result.solution);
                j["steps"] = result.trace.steps.size();
                if (audit) {
                    j["tau"] = tap::rat_str(lp->tau);
                    j["rho_tau"] = tap::rat_str(audit->rho_tau);
                    j["bound_rhs"] = tap::rat_str(audit->bound_rhs);
                    j["audit_ok"] = audit->ok;
                }
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "solution size " << result.solution.size() << "\n";
                for (auto [u, v] : result.solution)
                    std::cout << "  link " << u << " " << v << "\n";
                if (audit) {
                    std::cout << "tau = " << tap::rat_str(lp->tau)
                              << ", rho*tau = " << tap::rat_str(audit->rho_tau)
                              << ", bound rhs = " << tap::rat_str(audit->bound_rhs) << "\n";
                    for (const auto& s : audit->steps)
                        std::cout << "  step " << s.index << " tokens "
                                  << tap::rat_str(s.tokens) << " >= "
                                  << tap::rat_str(s.required)
                                  << (s.legal ? " ok" : " VIOLATED") << "\n";
                    std::cout << (audit->ok ? "audit ok" : "AUDIT FAILED: " +
                                                               audit->first_failure)
                              << "\n";
                }
            }
            return (!audit || audit->ok) ? 0 : 1;
        }

        if (cover_cmd->parsed()) {
            auto cover = tap::min_weight_exact_cover(cfg, closed);
            if (as_json) {
                json j;
                j["weight"] = tap::rat_str(cover.weight);
                j["links"] = links_json(cover.links);
                j["matching"] = links_json(cover.matching_part);
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "weight " << tap::rat_str(cover.weight) << "\n";
                for (auto [u, v] : cover.links) std::cout << "  link " << u << " " << v << "\n";
            }
            return 0;
        }

        if (bound_cmd->parsed()) {
            auto model = tap::build_pi_model(closed, leaf_cap);
            auto cut_model = tap::build_cut_model(closed);
            if (!lp_format.empty()) {
                if (lp_format != "text") throw tap::Error("unsupported --lp-format");
                std::cout << tap::format_rows_text(closed, model);
                return 0;
            }
            if (lp_float) {
                auto lp = tap::solve_lp_float(model);
                auto cut = tap::solve_lp_float(cut_model);
                std::cout << "tau ~= " << lp.tau << "\ncut ~= " << cut.tau << "\n";
                return 0;
            }
            auto lp = tap::solve_lp(model);
            auto cut = tap::solve_lp(cut_model);
            if (as_json) {
                json j;
                j["tau"] = tap::rat_str(lp.tau);
                j["cut"] = tap::rat_str(cut.tau);
                json xs = json::object();
                for (int id = 0; id < (int)closed.links.size(); ++id) {
                    if (lp.x[id] == 0) continue;
                    const auto& l = closed.links[id];
                    xs[std::to_string(l.u) + "-" + std::to_string(l.v)] =
                        tap::rat_str(lp.x[id]);
                }
                j["x"] = xs;
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "tau = " << tap::rat_str(lp.tau) << "\n";
                std::cout << "cut = " << tap::rat_str(cut.tau) << "\n";
                for (int id = 0; id < (int)closed.links.size(); ++id) {
                    if (lp.x[id] == 0) continue;
                    const auto& l = closed.links[id];
                    std::cout << "  x(" << l.u << "," << l.v
                              << ") = " << tap::rat_str(lp.x[id]) << "\n";
                }
            }
            return 0;
        }

        if (exact_cmd->parsed()) {
            auto oracle = tap::exact_opt(inst);
            json j;
            j["opt"] = oracle.opt_size;
            j["witness"] = oracle.witnesses.empty() ? json::array()
                                                    : links_json(oracle.witnesses.front());
            if (as_json) {
                j["witness_count"] = oracle.witnesses.size();
                j["truncated"] = oracle.truncated;
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "opt " << oracle.opt_size << "\n";
                if (!oracle.witnesses.empty())
                    for (auto [u, v] : oracle.witnesses.front())
                        std::cout << "  link " << u << " " << v << "\n";
            }
            return 0;
        }
    } catch (const tap::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
