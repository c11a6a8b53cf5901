// The solver core: maintains the contracted tree with compound nodes,
// exhausts greedy contractions, finds minimally semi-closed subtrees,
// repairs dangerous trees by rewriting the matching, and keeps a trace
// that the token ledger can audit afterwards.
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tap/instance.hpp"
#include "tap/leafcover.hpp"
#include "tap/lpbound.hpp"
#include "tap/rational.hpp"

namespace tap {

// Matching entry over super-nodes; rep_link is a closed link realizing it.
struct SuperMatch {
    int sup_u, sup_v;
    int rep_link;
};

struct LiveLink {
    int a, b;  // super ids, a < b
    int rep;   // smallest closed link id realizing this super pair
};

enum class StepKind { Greedy, SemiClosed, FindTree };

struct ContractionRecord {
    StepKind kind;
    int root_sup;               // subtree root, or -1 for greedy steps
    std::vector<int> absorbed;  // super ids merged by this step
    std::vector<int> added_links;  // closed link ids (the cover I')
    int new_super;
    // Token categories w.r.t. the matching M at contraction time.
    int m_size = 0, m_twin = 0, u_size = 0, u0_size = 0, c_size = 0;
    std::vector<NodeId> r_live;  // live original R-nodes inside (for sigma)
    std::vector<int> m_links;    // the matching links consumed
};

struct SolveTrace {
    std::vector<ContractionRecord> steps;
};

struct ContractionState {
    const TapInstance* inst = nullptr;  // closed
    std::vector<int> sup_of;            // original node -> super id
    int next_super = 0;
    std::vector<char> compound;  // by super id; the root super counts as compound
    std::vector<int> matching;   // closed link ids (M); endpoints are original leaves
    std::vector<int> partial;    // closed link ids (I)
    SolveTrace trace;

    // Derived view of the contracted tree, rebuilt after every contraction.
    std::vector<int> live;  // live super ids, ascending
    std::vector<int> sup_parent;
    std::vector<std::vector<int>> sup_children;
    std::vector<int> sup_depth;
    int root_sup = -1;
    std::vector<LiveLink> live_links;        // sorted by (a,b)
    std::vector<std::vector<int>> sup_adj;   // super id -> indices into live_links

    bool is_live(int sup) const;
    bool sup_leaf(int sup) const;     // leaf of the contracted tree
    bool sup_original(int sup) const; // a never-contracted original node
    std::vector<int> members(int sup) const;  // original nodes inside
};

struct SubtreeSummary {
    int root_sup = -1;
    bool semi_closed = false;
    bool m_compatible = false;
    std::vector<int> subtree;     // super ids of the subtree, ascending
    std::vector<int> m_links;     // matching links fully inside
    int m_twin = 0;               // |M' ∩ W|
    std::vector<int> u_leaves;    // unmatched leaf supers
    std::vector<int> u0_leaves;   // the original ones among u_leaves
    std::vector<int> l_leaves;    // all leaf supers inside
    std::vector<NodeId> s_stems;  // live original stems inside
    std::vector<NodeId> r_live;   // live original R-nodes inside
    std::vector<int> c_compound;  // non-leaf compound supers inside
    std::optional<Rat> sigma;     // filled by audits
};

struct DangerCert {
    int a, b, b_prime;  // super ids per the dangerous-tree ordering
};

ContractionState init_state(const TapInstance& inst, const ExactLeafCover& cover);

// Matching M as super pairs.
std::vector<SuperMatch> super_matching(const ContractionState& st);

// The live link from leaf super `a` whose other endpoint is closest to the
// root; the endpoint is an ancestor of `a` under shadow completion.
LiveLink up_link(const ContractionState& st, int leaf_sup);

void greedy_contract_exhaust(ContractionState& st);

SubtreeSummary summarize(const ContractionState& st, int root_sup,
                         std::span<const SuperMatch> matching);

bool is_semi_closed(const ContractionState& st, int root_sup,
                    std::span<const SuperMatch> matching);

// All minimally semi-closed subtrees, deepest root first (ties: smaller id).
std::vector<SubtreeSummary> minimally_semi_closed(const ContractionState& st,
                                                  std::span<const SuperMatch> matching);

// Certificate (a, b, b') when the summary matches the dangerous shape.
std::optional<DangerCert> is_dangerous(const ContractionState& st,
                                       const SubtreeSummary& summary);

// Requires every minimally semi-closed tree w.r.t. M to be dangerous.
// Rewrites bb' -> ab' in each, picks a minimally semi-closed tree w.r.t. the
// rewritten matching and returns it (summarized w.r.t. M) with its cover.
std::pair<SubtreeSummary, std::vector<int>> find_tree(const ContractionState& st);

// Contracts the subtree with cover `links` (closed link ids); verifies the
// cover hits exactly the subtree's edges.
void contract_subtree(ContractionState& st, const SubtreeSummary& summary,
                      const std::vector<int>& links, StepKind kind);

struct SolveResult {
    std::vector<LinkPair> solution;  // original links
    SolveTrace trace;
    ExactLeafCover cover;
};

SolveResult solve(const TapInstance& closed, const LeafWeightConfig& cfg = {});
SolveResult solve_with_cover(const TapInstance& closed, const ExactLeafCover& cover);

// Ledger audit over a finished trace with an optimal LP point.
struct StepAudit {
    StepKind kind;
    int index;
    Rat sigma;       // sum of x(delta(v)) over the step's live R-nodes
    Rat tokens;      // rho|M'| + |M'∩W|/2 + |U'| + (rho-3/2)|U'0| + |C'| + sigma/2
    Rat tokens_alt;  // variant reading with (rho-1/2)|U'0| on top of |U'|
    Rat required;    // |I'| + 1
    bool legal = false;
};

struct AuditReport {
    std::vector<StepAudit> steps;
    bool all_legal = false;
    Rat w_cover;
    Rat half_sigma_r;   // (1/2) sum over R of x(delta(v))
    Rat bound_rhs;      // w_cover + half_sigma_r
    Rat rho_tau;
    int partial_size = 0;   // |I|
    int solution_size = 0;  // |F|
    bool ineq6_ok = false;      // rho*tau >= bound_rhs
    bool size_bound_ok = false; // |I| <= bound_rhs
    bool ratio_ok = false;      // |F| <= rho*tau
    bool ok = false;
    std::string first_failure;  // empty when ok
};

AuditReport audit_ledger(const SolveTrace& trace, const TapInstance& inst,
                         const LpSolution& lp, const ExactLeafCover& cover,
                         const LeafWeightConfig& cfg = {});

}  // namespace tap
