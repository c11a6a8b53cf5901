// The LP relaxation over the closed link set and the standard cut LP,
// solved exactly in rational arithmetic at desk scale.
#pragma once

#include <string>
#include <vector>

#include "tap/instance.hpp"
#include "tap/leafcover.hpp"
#include "tap/rational.hpp"

namespace tap {

enum class RowKind { Cut, OddLeafSet, LeafEquality, TwinStem };

struct ConstraintRow {
    RowKind kind;
    std::vector<std::pair<int, Rat>> coeffs;  // (link id, coefficient), ascending ids
    bool equality = false;                    // otherwise >=
    Rat rhs;
    std::string tag;  // the generating object, for dumps and failure messages
};

struct LpModel {
    int nvars = 0;  // one variable per closed link
    std::vector<ConstraintRow> rows;
};

struct LpSolution {
    std::vector<Rat> x;
    Rat tau;
    std::vector<int> basis;  // basic variable indices of the final tableau
};

struct LpFloatSolution {
    std::vector<double> x;
    double tau = 0;
};

// Rows: one cut row per tree edge, one row per odd leaf subset, one equality
// per leaf, one row per twin link. Throws when the leaf count exceeds the cap.
LpModel build_pi_model(const TapInstance& inst, int leaf_cap = 16);
LpModel build_cut_model(const TapInstance& inst);

// Exact primal simplex (Bland's rule, two phases). Odd-set rows are activated
// lazily; the returned solution is verified against every row of the model.
LpSolution solve_lp(const LpModel& model);

// Floating-point variant for exploration beyond the exact-cap; never used on
// any certified path.
LpFloatSolution solve_lp_float(const LpModel& model, double tol = 1e-9);

// Right-hand side of the leaf-cover bound: w(F_L) + (1/2) sum over
// non-leaf non-stem nodes v of x(delta(v)).
Rat coupons_rhs(const TapInstance& inst, const LpSolution& lp, const ExactLeafCover& cover);

// Nodes outside leaves and stems (the set R), ascending.
std::vector<NodeId> r_nodes(const TapInstance& inst);

std::string format_rows_text(const TapInstance& inst, const LpModel& model);

}  // namespace tap
