#pragma once

// Exact linear feasibility: Fourier–Motzkin over the rationals, an integer
// lattice test via column Hermite reduction, and branch-and-bound for
// nonnegative integer programs.

#include "skolem/natural.hpp"

#include <map>
#include <vector>

namespace skolem::lp {

using Integer = Natural;  // signed at this layer

/** coef · x  (= or >=)  rhs */
struct Constraint {
    std::vector<Rational> coef;
    Rational rhs;
    bool equality = false;
};

inline Constraint geq(std::vector<Rational> coef, Rational rhs) { return {std::move(coef), std::move(rhs), false}; }
inline Constraint eq(std::vector<Rational> coef, Rational rhs) { return {std::move(coef), std::move(rhs), true}; }

inline Rational dot(const std::vector<Rational>& a, const std::vector<Rational>& x)
{
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) s += a[i] * x[i];
    return s;
}

inline bool satisfies(const Constraint& c, const std::vector<Rational>& x)
{
    Rational lhs = dot(c.coef, x);
    return c.equality ? lhs == c.rhs : lhs >= c.rhs;
}

inline Integer floor_q(const Rational& q)
{
    Integer n = numerator(q), d = denominator(q);
    Integer f = n / d;
    if (n % d != 0 && n < 0) f -= 1;
    return f;
}

inline Integer ceil_q(const Rational& q)
{
    Integer n = numerator(q), d = denominator(q);
    Integer c = n / d;
    if (n % d != 0 && n > 0) c += 1;
    return c;
}

struct FmStats {
    std::size_t peak_constraints = 0;
};

/**
 * Exact feasibility of a mixed system of equalities and inequalities. Returns
 * a satisfying rational point, preferring integer coordinates during
 * back-substitution, or nullopt when the system is infeasible.
 */
inline std::optional<std::vector<Rational>> fm_feasible(std::size_t n, std::vector<Constraint> cons,
                                                        FmStats* stats = nullptr)
{
    const std::vector<Constraint> original = cons;
    for (auto& c : cons) c.coef.resize(n, 0);

    // Gauss–Jordan on the equalities.
    std::vector<std::pair<std::size_t, Constraint>> pivots;
    for (;;) {
        auto it = std::find_if(cons.begin(), cons.end(), [](const Constraint& c) { return c.equality; });
        if (it == cons.end()) break;
        Constraint e = *it;
        cons.erase(it);
        std::size_t p = n;
        for (std::size_t j = 0; j < n; ++j)
            if (e.coef[j] != 0) {
                p = j;
                break;
            }
        if (p == n) {
            if (e.rhs != 0) return std::nullopt;
            continue;
        }
        Rational lead = e.coef[p];
        for (auto& a : e.coef) a /= lead;
        e.rhs /= lead;
        auto eliminate = [&](Constraint& c) {
            Rational a = c.coef[p];
            if (a == 0) return;
            for (std::size_t j = 0; j < n; ++j) c.coef[j] -= a * e.coef[j];
            c.rhs -= a * e.rhs;
        };
        for (auto& c : cons) eliminate(c);
        for (auto& [q, row] : pivots) eliminate(row);
        pivots.emplace_back(p, e);
    }

    // Normalised inequality store: coefficient vector -> tightest rhs.
    using Store = std::map<std::vector<Rational>, Rational>;
    auto add = [](Store& s, Constraint c) -> bool {
        std::size_t first = c.coef.size();
        for (std::size_t j = 0; j < c.coef.size(); ++j)
            if (c.coef[j] != 0) {
                first = j;
                break;
            }
        if (first == c.coef.size()) return c.rhs <= 0;  // 0 >= rhs
        Rational scale = abs(c.coef[first]);
        for (auto& a : c.coef) a /= scale;
        c.rhs /= scale;
        auto [it, inserted] = s.emplace(c.coef, c.rhs);
        if (!inserted && c.rhs > it->second) it->second = c.rhs;
        return true;
    };
    Store cur;
    for (auto& c : cons)
        if (!add(cur, c)) return std::nullopt;

    std::vector<bool> is_pivot(n, false);
    for (auto& [p, row] : pivots) is_pivot[p] = true;
    std::vector<std::pair<std::size_t, std::vector<Constraint>>> levels;
    std::vector<bool> eliminated(n, false);
    for (;;) {
        if (stats) stats->peak_constraints = std::max(stats->peak_constraints, cur.size());
        std::size_t best = n;
        std::size_t best_cost = SIZE_MAX;
        for (std::size_t j = 0; j < n; ++j) {
            if (eliminated[j] || is_pivot[j]) continue;
            std::size_t pos = 0, neg = 0;
            for (const auto& [coef, rhs] : cur) {
                if (coef[j] > 0) ++pos;
                else if (coef[j] < 0) ++neg;
            }
            if (pos + neg == 0) continue;
            std::size_t cost = pos * neg;
            if (cost < best_cost) {
                best_cost = cost;
                best = j;
            }
        }
        if (best == n) break;
        std::vector<Constraint> involved, pos, neg;
        Store next;
        for (const auto& [coef, rhs] : cur) {
            Constraint c{coef, rhs, false};
            if (coef[best] == 0) {
                add(next, c);
                continue;
            }
            involved.push_back(c);
            (coef[best] > 0 ? pos : neg).push_back(c);
        }
        for (const auto& p : pos)
            for (const auto& q : neg) {
                Rational a = p.coef[best], b = -q.coef[best];
                Constraint c{std::vector<Rational>(n), p.rhs * b + q.rhs * a, false};
                for (std::size_t j = 0; j < n; ++j) c.coef[j] = p.coef[j] * b + q.coef[j] * a;
                c.coef[best] = 0;
                if (!add(next, c)) return std::nullopt;
            }
        eliminated[best] = true;
        levels.emplace_back(best, std::move(involved));
        cur = std::move(next);
    }
    for (const auto& [coef, rhs] : cur)
        if (rhs > 0) return std::nullopt;  // remaining rows are 0 >= rhs

    std::vector<Rational> x(n, 0);
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
        std::size_t j = it->first;
        std::optional<Rational> lo, hi;
        for (const auto& c : it->second) {
            Rational rest = c.rhs;
            for (std::size_t k = 0; k < n; ++k)
                if (k != j && c.coef[k] != 0) rest -= c.coef[k] * x[k];
            Rational bound = rest / c.coef[j];
            if (c.coef[j] > 0) {
                if (!lo || bound > *lo) lo = bound;
            } else {
                if (!hi || bound < *hi) hi = bound;
            }
        }
        Rational v;
        if (lo && hi) {
            v = Rational(ceil_q(*lo));
            if (v > *hi) v = *lo;
        } else if (lo) {
            v = Rational(ceil_q(*lo));
        } else if (hi) {
            v = *hi >= 0 ? Rational(0) : Rational(floor_q(*hi));
        } else {
            v = 0;
        }
        x[j] = v;
    }
    for (const auto& [p, row] : pivots) {
        Rational v = row.rhs;
        for (std::size_t k = 0; k < n; ++k)
            if (k != p && row.coef[k] != 0) v -= row.coef[k] * x[k];
        x[p] = v;
    }
    for (const auto& c : original)
        if (!satisfies(c, x)) throw InternalInvariant("fm_feasible: back-substituted point violates a constraint");
    return x;
}

/**
 * Integer solution of A x = b with x ∈ ℤ^n (signs unrestricted), or nullopt.
 * Column operations bring A to lower echelon form; U tracks them so x = U y.
 */
inline std::optional<std::vector<Integer>> integer_lattice_solution(std::vector<std::vector<Integer>> A,
                                                                    const std::vector<Integer>& b)
{
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    std::vector<std::vector<Integer>> U(n, std::vector<Integer>(n, 0));
    for (std::size_t i = 0; i < n; ++i) U[i][i] = 1;
    auto col_combine = [&](std::size_t c1, std::size_t c2, const Integer& a, const Integer& bb, const Integer& c,
                           const Integer& d) {
        // (col c1, col c2) <- (a*c1 + bb*c2, c*c1 + d*c2) with ad - bc = ±1
        for (auto* M : {&A, &U}) {
            for (auto& row : *M) {
                Integer x = row[c1], y = row[c2];
                row[c1] = a * x + bb * y;
                row[c2] = c * x + d * y;
            }
        }
    };
    std::vector<std::ptrdiff_t> pivot_col(m, -1);
    std::size_t next = 0;
    for (std::size_t i = 0; i < m && next < n; ++i) {
        for (std::size_t j = next + 1; j < n; ++j) {
            if (A[i][j] == 0) continue;
            if (A[i][next] == 0) {
                col_combine(next, j, 0, 1, 1, 0);
                continue;
            }
            // Extended gcd of A[i][next], A[i][j].
            Integer p = A[i][next], q = A[i][j];
            Integer old_r = p, r = q, old_s = 1, s = 0, old_t = 0, t = 1;
            while (r != 0) {
                Integer quo = old_r / r;
                Integer tmp = old_r - quo * r;
                old_r = r;
                r = tmp;
                tmp = old_s - quo * s;
                old_s = s;
                s = tmp;
                tmp = old_t - quo * t;
                old_t = t;
                t = tmp;
            }
            Integer g = old_r;  // = old_s*p + old_t*q
            col_combine(next, j, old_s, old_t, -q / g, p / g);
        }
        if (A[i][next] != 0) {
            pivot_col[i] = static_cast<std::ptrdiff_t>(next);
            ++next;
        }
    }
    std::vector<Integer> y(n, 0);
    for (std::size_t i = 0; i < m; ++i) {
        Integer residual = b[i];
        for (std::size_t j = 0; j < n; ++j)
            if (static_cast<std::ptrdiff_t>(j) != pivot_col[i] && A[i][j] != 0) residual -= A[i][j] * y[j];
        if (pivot_col[i] < 0) {
            if (residual != 0) return std::nullopt;
            continue;
        }
        const Integer& piv = A[i][static_cast<std::size_t>(pivot_col[i])];
        if (residual % piv != 0) return std::nullopt;
        y[static_cast<std::size_t>(pivot_col[i])] = residual / piv;
    }
    std::vector<Integer> x(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) x[i] += U[i][j] * y[j];
    return x;
}

/**
 * If A x = b has a solution in ℕ^n then it has one with every entry at most
 * n·(m·a)^(2m+1), where a bounds |A_ij| and |b_i| (Papadimitriou 1981).
 */
inline Integer small_solution_bound(const std::vector<std::vector<Integer>>& A, const std::vector<Integer>& b)
{
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    Integer a = 1;
    for (const auto& row : A)
        for (const auto& v : row) a = std::max(a, Integer(abs(v)));
    for (const auto& v : b) a = std::max(a, Integer(abs(v)));
    return Integer(n) * pow_natural(Integer(m) * a, 2 * m + 1);
}

enum class IlpStatus { Feasible, Infeasible, BudgetExceeded };

struct IlpResult {
    IlpStatus status = IlpStatus::Infeasible;
    std::vector<Integer> x;
    std::size_t nodes = 0;
    Integer cutoff = 0;
};

/**
 * Nonnegative integer solution of A x = b by branch-and-bound over the
 * rational relaxation, with every variable capped at the small-solution bound
 * so that the search space is finite.
 */
inline IlpResult solve_nonneg_ilp(const std::vector<std::vector<Integer>>& A, const std::vector<Integer>& b,
                                  std::size_t node_budget = 200000)
{
    const std::size_t m = A.size();
    const std::size_t n = m ? A[0].size() : 0;
    IlpResult res;
    res.cutoff = small_solution_bound(A, b);
    if (n == 0) {
        bool ok = std::all_of(b.begin(), b.end(), [](const Integer& v) { return v == 0; });
        res.status = ok ? IlpStatus::Feasible : IlpStatus::Infeasible;
        return res;
    }
    if (!integer_lattice_solution(A, b)) return res;

    std::vector<Constraint> base;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<Rational> coef(A[i].begin(), A[i].end());
        base.push_back(eq(std::move(coef), Rational(b[i])));
    }
    struct Node {
        std::vector<Integer> lo, hi;
    };
    std::vector<Node> stack{{std::vector<Integer>(n, 0), std::vector<Integer>(n, res.cutoff)}};
    while (!stack.empty()) {
        if (res.nodes >= node_budget) {
            res.status = IlpStatus::BudgetExceeded;
            return res;
        }
        ++res.nodes;
        Node node = std::move(stack.back());
        stack.pop_back();
        std::vector<Constraint> cons = base;
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<Rational> e(n, 0);
            e[j] = 1;
            cons.push_back(geq(e, Rational(node.lo[j])));
            e[j] = -1;
            cons.push_back(geq(e, Rational(-node.hi[j])));
        }
        auto pt = fm_feasible(n, std::move(cons));
        if (!pt) continue;
        std::size_t frac = n;
        for (std::size_t j = 0; j < n; ++j)
            if (denominator((*pt)[j]) != 1) {
                frac = j;
                break;
            }
        if (frac == n) {
            res.status = IlpStatus::Feasible;
            for (const auto& v : *pt) res.x.push_back(numerator(v));
            return res;
        }
        Integer f = floor_q((*pt)[frac]);
        Node up = node, down = std::move(node);
        up.lo[frac] = f + 1;
        down.hi[frac] = f;
        stack.push_back(std::move(up));
        stack.push_back(std::move(down));
    }
    return res;
}

} // namespace skolem::lp
