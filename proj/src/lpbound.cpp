#include "tap/lpbound.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

namespace tap {

namespace {

// Dense two-phase primal simplex, minimizing c.x subject to rows of the form
// a.x >= b or a.x = b (b >= 0 after normalization) and x >= 0. Bland's rule
// throughout, so it terminates on degenerate bases.
template <class T, class Num>
struct Simplex {
    int n = 0;                       // structural variables
    std::vector<std::vector<T>> A;   // m x total
    std::vector<T> b;
    std::vector<char> eq;
    int m = 0;

    void add_row(const std::vector<std::pair<int, T>>& coeffs, bool equality, T rhs) {
        std::vector<T> row(n, T(0));
        for (auto& [j, c] : coeffs) row[j] = c;
        if (Num::neg(rhs)) {
            for (auto& c : row) c = -c;
            rhs = -rhs;
            if (!equality) throw Error("internal: negative rhs on inequality row");
        }
        A.push_back(std::move(row));
        b.push_back(rhs);
        eq.push_back(equality);
        ++m;
    }

    // Returns false when infeasible. Fills x (size n), objective, basis.
    bool solve(const std::vector<T>& c, std::vector<T>& x, T& obj, std::vector<int>& basis_out) {
        int nsurplus = 0;
        for (char e : eq)
            if (!e) ++nsurplus;
        int total = n + nsurplus + m;  // structural + surplus + artificial
        std::vector<std::vector<T>> tab(m, std::vector<T>(total + 1, T(0)));
        std::vector<int> basis(m);
        int s = n;
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) tab[i][j] = A[i][j];
            if (!eq[i]) tab[i][s++] = T(-1);
            tab[i][n + nsurplus + i] = T(1);
            tab[i][total] = b[i];
            basis[i] = n + nsurplus + i;
        }

        auto pivot = [&](int pr, int pc) {
            T inv = tab[pr][pc];
            for (auto& v : tab[pr]) v = v / inv;
            for (int i = 0; i < m; ++i) {
                if (i == pr) continue;
                if (Num::zero(tab[i][pc])) continue;
                T f = tab[i][pc];
                for (int j = 0; j <= total; ++j) tab[i][j] = tab[i][j] - f * tab[pr][j];
            }
            basis[pr] = pc;
        };

        // Objective row as reduced costs; rebuilt for each phase.
        auto run = [&](const std::vector<T>& cost, int width) -> bool {
            // returns false on unbounded
            std::vector<T> z(width + 1, T(0));
            auto rebuild = [&] {
                std::fill(z.begin(), z.end(), T(0));
                for (int j = 0; j < width; ++j) z[j] = (j < (int)cost.size()) ? cost[j] : T(0);
                for (int i = 0; i < m; ++i) {
                    T cb = (basis[i] < (int)cost.size()) ? cost[basis[i]] : T(0);
                    if (Num::zero(cb)) continue;
                    for (int j = 0; j <= width; ++j) {
                        int col = (j == width) ? total : j;
                        z[j] = z[j] - cb * tab[i][col];
                    }
                }
            };
            rebuild();
            while (true) {
                int pc = -1;
                for (int j = 0; j < width; ++j)
                    if (Num::neg(z[j])) {
                        pc = j;
                        break;
                    }
                if (pc < 0) return true;
                int pr = -1;
                for (int i = 0; i < m; ++i) {
                    if (!Num::pos(tab[i][pc])) continue;
                    if (pr < 0) {
                        pr = i;
                        continue;
                    }
                    T lhs = tab[i][total] * tab[pr][pc];
                    T rhs2 = tab[pr][total] * tab[i][pc];
                    if (lhs < rhs2 || (lhs == rhs2 && basis[i] < basis[pr])) pr = i;
                }
                if (pr < 0) return false;  // unbounded
                pivot(pr, pc);
                rebuild();  // simple and exact; fine at desk scale
            }
        };

        // Phase 1: minimize the sum of artificials.
        std::vector<T> c1(total, T(0));
        for (int i = 0; i < m; ++i) c1[n + nsurplus + i] = T(1);
        if (!run(c1, total)) throw Error("internal: phase-1 unbounded");
        T art(0);
        for (int i = 0; i < m; ++i)
            if (basis[i] >= n + nsurplus) art = art + tab[i][total];
        if (Num::pos(art)) return false;  // infeasible

        // Drive remaining artificials out of the basis.
        for (int i = 0; i < m; ++i) {
            if (basis[i] < n + nsurplus) continue;
            int pc = -1;
            for (int j = 0; j < n + nsurplus; ++j)
                if (!Num::zero(tab[i][j])) {
                    pc = j;
                    break;
                }
            if (pc >= 0) pivot(i, pc);
            // else: redundant row, harmless to leave (its artificial stays 0)
        }

        // Phase 2 over structural + surplus columns only.
        std::vector<T> c2(n + nsurplus, T(0));
        for (int j = 0; j < n; ++j) c2[j] = c[j];
        if (!run(c2, n + nsurplus)) throw Error("LP is unbounded");

        x.assign(n, T(0));
        for (int i = 0; i < m; ++i)
            if (basis[i] < n) x[basis[i]] = tab[i][total];
        obj = T(0);
        for (int j = 0; j < n; ++j) obj = obj + c[j] * x[j];
        basis_out = basis;
        return true;
    }
};

struct ExactNum {
    static bool neg(const Rat& x) { return x < 0; }
    static bool pos(const Rat& x) { return x > 0; }
    static bool zero(const Rat& x) { return x == 0; }
};

struct FloatNum {
    static inline double tol = 1e-9;
    static bool neg(double x) { return x < -tol; }
    static bool pos(double x) { return x > tol; }
    static bool zero(double x) { return std::abs(x) <= tol; }
};

std::vector<char> subtree_mask(const TapInstance& inst, NodeId r) {
    std::vector<char> in(inst.tree.n(), 0);
    std::vector<NodeId> stack{r};
    in[r] = 1;
    while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (NodeId c : inst.tree.children[u]) {
            in[c] = 1;
            stack.push_back(c);
        }
    }
    return in;
}

void add_cut_rows(const TapInstance& inst, LpModel& model) {
    for (NodeId c = 0; c < inst.tree.n(); ++c) {
        if (c == inst.tree.root) continue;
        auto in = subtree_mask(inst, c);
        ConstraintRow row;
        row.kind = RowKind::Cut;
        row.rhs = 1;
        row.tag = "cut edge (" + std::to_string(c) + "," +
                  std::to_string(inst.tree.parent[c]) + ")";
        for (int id = 0; id < (int)inst.links.size(); ++id) {
            const auto& l = inst.links[id];
            if (in[l.u] != in[l.v]) row.coeffs.push_back({id, Rat(1)});
        }
        model.rows.push_back(std::move(row));
    }
}

template <class Num, class T>
std::vector<T> lp_costs(const LpModel& model) {
    return std::vector<T>(model.nvars, T(1));
}

// Solve with a given active row subset; exact variant.
bool solve_active(const LpModel& model, const std::vector<int>& active, LpSolution& out) {
    Simplex<Rat, ExactNum> sx;
    sx.n = model.nvars;
    for (int i : active) {
        const auto& r = model.rows[i];
        sx.add_row(r.coeffs, r.equality, r.rhs);
    }
    std::vector<Rat> c(model.nvars, Rat(1));
    return sx.solve(c, out.x, out.tau, out.basis);
}

Rat row_lhs(const ConstraintRow& row, const std::vector<Rat>& x) {
    Rat s(0);
    for (auto& [j, c] : row.coeffs) s += c * x[j];
    return s;
}

}  // namespace

std::vector<NodeId> r_nodes(const TapInstance& inst) {
    std::vector<char> excl(inst.tree.n(), 0);
    for (NodeId v : inst.leaves) excl[v] = 1;
    for (int t : inst.twins) excl[inst.stem_of[t]] = 1;
    std::vector<NodeId> out;
    for (NodeId v = 0; v < inst.tree.n(); ++v)
        if (!excl[v]) out.push_back(v);
    return out;
}

LpModel build_pi_model(const TapInstance& inst, int leaf_cap) {
    if (!inst.closed) throw Error("build_pi_model requires a closed instance");
    int k = static_cast<int>(inst.leaves.size());
    if (k > leaf_cap)
        throw Error("leaf count " + std::to_string(k) + " exceeds cap " +
                    std::to_string(leaf_cap));
    LpModel model;
    model.nvars = static_cast<int>(inst.links.size());

    add_cut_rows(inst, model);

    // Odd leaf subsets: coefficient 1 on links with at least one endpoint in A.
    std::vector<std::vector<int>> leaf_links(k);  // per leaf index, incident link ids
    std::vector<int> leaf_index(inst.tree.n(), -1);
    for (int i = 0; i < k; ++i) leaf_index[inst.leaves[i]] = i;
    for (int id = 0; id < (int)inst.links.size(); ++id) {
        const auto& l = inst.links[id];
        if (inst.is_leaf(l.u)) leaf_links[leaf_index[l.u]].push_back(id);
        if (inst.is_leaf(l.v)) leaf_links[leaf_index[l.v]].push_back(id);
    }
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        int sz = std::popcount(mask);
        if (sz % 2 == 0) continue;
        ConstraintRow row;
        row.kind = RowKind::OddLeafSet;
        row.rhs = Rat((sz + 1) / 2);
        std::ostringstream tag;
        tag << "odd {";
        std::vector<char> seen(inst.links.size(), 0);
        bool first = true;
        for (int i = 0; i < k; ++i) {
            if (!(mask >> i & 1)) continue;
            tag << (first ? "" : ",") << inst.leaves[i];
            first = false;
            for (int id : leaf_links[i]) seen[id] = 1;
        }
        tag << "}";
        row.tag = tag.str();
        for (int id = 0; id < (int)inst.links.size(); ++id)
            if (seen[id]) row.coeffs.push_back({id, Rat(1)});
        model.rows.push_back(std::move(row));
    }

    for (int i = 0; i < k; ++i) {
        ConstraintRow row;
        row.kind = RowKind::LeafEquality;
        row.equality = true;
        row.rhs = 1;
        row.tag = "leaf " + std::to_string(inst.leaves[i]);
        for (int id : leaf_links[i]) row.coeffs.push_back({id, Rat(1)});
        model.rows.push_back(std::move(row));
    }

    for (int t : inst.twins) {
        NodeId s = inst.stem_of[t];
        ConstraintRow row;
        row.kind = RowKind::TwinStem;
        row.equality = true;
        row.rhs = 0;
        const auto& e = inst.links[t];
        row.tag = "twin (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") stem " +
                  std::to_string(s);
        std::vector<Rat> coef(inst.links.size(), Rat(0));
        coef[t] += 1;
        for (int id = 0; id < (int)inst.links.size(); ++id) {
            const auto& l = inst.links[id];
            if (l.u == s || l.v == s) coef[id] -= 1;
        }
        for (int id = 0; id < (int)inst.links.size(); ++id)
            if (coef[id] != 0) row.coeffs.push_back({id, coef[id]});
        model.rows.push_back(std::move(row));
    }
    return model;
}

LpModel build_cut_model(const TapInstance& inst) {
    if (!inst.closed) throw Error("build_cut_model requires a closed instance");
    LpModel model;
    model.nvars = static_cast<int>(inst.links.size());
    add_cut_rows(inst, model);
    return model;
}

LpSolution solve_lp(const LpModel& model) {
    // Activate all rows except the odd-set family with |A| >= 3; add violated
    // members until the solution satisfies the whole model.
    std::vector<int> active;
    std::vector<int> lazy;
    for (int i = 0; i < (int)model.rows.size(); ++i) {
        const auto& r = model.rows[i];
        if (r.kind == RowKind::OddLeafSet && r.rhs > 1)
            lazy.push_back(i);
        else
            active.push_back(i);
    }
    LpSolution sol;
    while (true) {
        if (!solve_active(model, active, sol)) throw Error("LP is infeasible");
        bool added = false;
        for (auto it = lazy.begin(); it != lazy.end();) {
            const auto& r = model.rows[*it];
            if (row_lhs(r, sol.x) < r.rhs) {
                active.push_back(*it);
                it = lazy.erase(it);
                added = true;
            } else {
                ++it;
            }
        }
        if (!added) break;
    }
    for (const auto& r : model.rows) {
        Rat lhs = row_lhs(r, sol.x);
        bool ok = r.equality ? lhs == r.rhs : lhs >= r.rhs;
        if (!ok) throw Error("internal: solved point violates row " + r.tag);
    }
    return sol;
}

LpFloatSolution solve_lp_float(const LpModel& model, double tol) {
    FloatNum::tol = tol;
    Simplex<double, FloatNum> sx;
    sx.n = model.nvars;
    for (const auto& r : model.rows) {
        std::vector<std::pair<int, double>> coeffs;
        for (auto& [j, c] : r.coeffs) coeffs.push_back({j, c.convert_to<double>()});
        sx.add_row(coeffs, r.equality, r.rhs.convert_to<double>());
    }
    std::vector<double> c(model.nvars, 1.0), x;
    double obj = 0;
    std::vector<int> basis;
    if (!sx.solve(c, x, obj, basis)) throw Error("LP is infeasible");
    LpFloatSolution out;
    out.x = std::move(x);
    out.tau = obj;
    return out;
}

Rat coupons_rhs(const TapInstance& inst, const LpSolution& lp, const ExactLeafCover& cover) {
    Rat sum(0);
    for (NodeId v : r_nodes(inst)) {
        for (int id = 0; id < (int)inst.links.size(); ++id) {
            const auto& l = inst.links[id];
            if (l.u == v || l.v == v) sum += lp.x[id];
        }
    }
    return cover.weight + sum / 2;
}

std::string format_rows_text(const TapInstance& inst, const LpModel& model) {
    std::ostringstream out;
    for (const auto& r : model.rows) {
        bool first = true;
        for (auto& [j, c] : r.coeffs) {
            const auto& l = inst.links[j];
            if (c == 1)
                out << (first ? "" : " + ");
            else if (c == -1)
                out << (first ? "-" : " - ");
            else
                out << (first ? "" : " + ") << rat_str(c) << "*";
            out << "x(" << l.u << "," << l.v << ")";
            first = false;
        }
        out << (r.equality ? " = " : " >= ") << rat_str(r.rhs) << "   # " << r.tag << "\n";
    }
    return out.str();
}

}  // namespace tap
