#pragma once

// Checkers and solvers for functional CSPs: conjunctions of term equalities
// (and disequalities) over singleton-valued variables.

#include "skolem/lp.hpp"
#include "skolem/set_engine.hpp"

#include <functional>

namespace skolem {

enum class Status { Sat, Unsat, Unknown, NoWitnessUpTo };

inline std::string_view to_string(Status s)
{
    switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::NoWitnessUpTo: return "no_witness_up_to";
    default: return "unknown";
    }
}

struct SolveResult {
    Status status = Status::Unknown;
    std::optional<Assignment> witness;
    std::size_t branches_explored = 0;
    std::optional<Natural> bound;  // search bound for NoWitnessUpTo
    std::string method;
    std::string note;
};

// ---------------------------------------------------------------------------
// Checking

inline Natural max_value(const Assignment& a)
{
    Natural m = 0;
    for (const auto& [k, v] : a) m = std::max(m, v);
    return m;
}

inline Natural max_constant(const Term& t)
{
    std::set<Natural> cs;
    term_constants(t, cs);
    return cs.empty() ? Natural(0) : *cs.rbegin();
}

inline Term substitute(const Term& t, const Assignment& a)
{
    switch (t.op()) {
    case Op::Constant: return t;
    case Op::Variable: return Term::constant(detail::lookup(a, t.name()));
    case Op::Complement: return Term::complement(substitute(t.child(0), a));
    default: return Term::binary(t.op(), substitute(t.child(0), a), substitute(t.child(1), a));
    }
}

/**
 * Equality of two term values: syntactic identity after substitution, else
 * the set engine, escalating the window while undecided.
 */
inline TriBool terms_equal(const Term& l, const Term& r, const Assignment& a)
{
    if (substitute(l, a) == substitute(r, a)) return TriBool::True;
    Circuit cl = term_to_circuit(l), cr = term_to_circuit(r);
    Natural base = std::max({max_constant(l), max_constant(r), max_value(a)}) * 2 + 16;
    if (base > kMaxWindow) base = kMaxWindow;
    std::uint64_t B = base.convert_to<std::uint64_t>();
    for (int attempt = 0;; ++attempt) {
        TriBool res = equiv(cl, cr, a, B);
        if (res != TriBool::Unknown || attempt == 2 || 4 * B > kMaxWindow) return res;
        B *= 4;
    }
}

inline TriBool check_atom(const Atom& atom, const Assignment& a, const std::optional<USpec>& u)
{
    return std::visit(
        [&](const auto& at) -> TriBool {
            using T = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<T, EqAtom>) return terms_equal(at.lhs, at.rhs, a);
            else if constexpr (std::is_same_v<T, NeqAtom>) return tri_not(terms_equal(at.lhs, at.rhs, a));
            else if constexpr (std::is_same_v<T, UAtom>) {
                if (!u) throw InvalidInput("U atom without a uspec");
                return tri(u->contains(detail::lookup(a, at.var)));
            } else {
                return tri(detail::lookup(a, at.x) * detail::lookup(a, at.y) == detail::lookup(a, at.z));
            }
        },
        atom);
}

/** Conjunction of all atoms under set-engine semantics; Unknown only from an undecided equality. */
inline TriBool check_assignment(const CspInstance& inst, const Assignment& a)
{
    require_valid(inst);
    for (const auto& v : inst.variables) detail::lookup(a, v);
    TriBool all = TriBool::True;
    for (const auto& atom : inst.atoms) {
        all = tri_and(all, check_atom(atom, a, inst.uspec));
        if (all == TriBool::False) return all;
    }
    return all;
}

// ---------------------------------------------------------------------------
// Bounded search

inline SolveResult solve_bounded(const CspInstance& inst, std::uint64_t bound)
{
    require_valid(inst);
    SolveResult res;
    res.method = "bounded";
    res.bound = Natural(bound);
    const std::size_t n = inst.variables.size();
    std::vector<std::uint64_t> v(n, 0);
    std::size_t unknown = 0;
    for (;;) {
        Assignment a;
        for (std::size_t i = 0; i < n; ++i) a[inst.variables[i]] = v[i];
        ++res.branches_explored;
        TriBool r = check_assignment(inst, a);
        if (r == TriBool::True) {
            res.status = Status::Sat;
            res.witness = a;
            return res;
        }
        if (r == TriBool::Unknown) ++unknown;
        std::size_t i = n;
        while (i > 0 && v[i - 1] == bound) v[--i] = 0;
        if (i == 0) break;
        ++v[i - 1];
    }
    if (unknown) {
        res.status = Status::Unknown;
        res.note = std::to_string(unknown) + " assignments could not be decided";
    } else {
        res.status = Status::NoWitnessUpTo;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Small-model search for {−,∪,∩}

/**
 * Complete decision for instances over {−,∪,∩} (with = and ≠). Membership of a
 * point in a term's value depends only on which variables and constants equal
 * that point, so any injective relabelling of the non-constant values
 * preserves every atom. Hence it suffices to search
 * S = K ∪ {first n naturals outside K}, K the instance's constants, and
 * symmetric relabellings of the fresh values are skipped.
 */
inline SolveResult solve_small_model(const CspInstance& inst)
{
    require_valid(inst);
    if (!inst.signature.ops.subset_of(OpSet{Op::Complement, Op::Union, Op::Intersect}) || inst.signature.upred ||
        inst.signature.times_rel)
        throw SignatureViolation("solve_small_model: signature must be within {−,∪,∩} with = and ≠, got '" +
                                 inst.signature.tag() + "'");
    std::set<Natural> K;
    for (const auto& atom : inst.atoms) {
        if (auto* e = std::get_if<EqAtom>(&atom)) {
            term_constants(e->lhs, K);
            term_constants(e->rhs, K);
        } else if (auto* e = std::get_if<NeqAtom>(&atom)) {
            term_constants(e->lhs, K);
            term_constants(e->rhs, K);
        }
    }
    const std::size_t n = inst.variables.size();
    std::vector<Natural> fresh;
    for (Natural c = 0; fresh.size() < n; ++c)
        if (!K.count(c)) fresh.push_back(c);
    std::vector<Natural> consts(K.begin(), K.end());

    // Atom i is checked once its last variable (in declaration order) is set.
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) pos[inst.variables[i]] = i;
    std::vector<std::vector<std::size_t>> due(n + 1);
    for (std::size_t i = 0; i < inst.atoms.size(); ++i) {
        std::size_t last = 0;
        for (const auto& v : atom_variables(inst.atoms[i])) last = std::max(last, pos[v] + 1);
        due[last].push_back(i);
    }
    auto holds = [&](std::size_t i, const Assignment& a) {
        auto side = [&](const Term& t) { return normalize(*eval_term_exact(t, a)); };
        if (auto* e = std::get_if<EqAtom>(&inst.atoms[i])) return side(e->lhs) == side(e->rhs);
        const auto& ne = std::get<NeqAtom>(inst.atoms[i]);
        return !(side(ne.lhs) == side(ne.rhs));
    };

    SolveResult res;
    res.method = "small_model";
    Assignment a;
    for (std::size_t i : due[0])
        if (!holds(i, a)) {
            res.status = Status::Unsat;
            return res;
        }
    std::function<bool(std::size_t, std::size_t)> extend = [&](std::size_t i, std::size_t used_fresh) -> bool {
        if (i == n) return true;
        auto try_value = [&](const Natural& v, std::size_t nf) {
            ++res.branches_explored;
            a[inst.variables[i]] = v;
            for (std::size_t k : due[i + 1])
                if (!holds(k, a)) return false;
            return extend(i + 1, nf);
        };
        for (const auto& c : consts)
            if (try_value(c, used_fresh)) return true;
        for (std::size_t f = 0; f <= used_fresh && f < n; ++f)
            if (try_value(fresh[f], std::max(used_fresh, f + 1))) return true;
        a.erase(inst.variables[i]);
        return false;
    };
    if (!extend(0, 0)) {
        res.status = Status::Unsat;
        return res;
    }
    if (check_assignment(inst, a) != TriBool::True)
        throw InternalInvariant("solve_small_model: witness failed verification");
    res.status = Status::Sat;
    res.witness = a;
    return res;
}

// ---------------------------------------------------------------------------
// Linear instances over {+}

struct LinearForm {
    std::map<std::string, lp::Integer> coef;
    lp::Integer constant = 0;
};

/** Linear form of a term built from variables, constants and +. */
inline LinearForm linearize(const Term& t)
{
    LinearForm f;
    std::function<void(const Term&)> walk = [&](const Term& s) {
        switch (s.op()) {
        case Op::Constant: f.constant += s.value(); break;
        case Op::Variable: f.coef[s.name()] += 1; break;
        case Op::Plus:
            walk(s.child(0));
            walk(s.child(1));
            break;
        default: throw SignatureViolation("linearize: only + terms are linear");
        }
    };
    walk(t);
    return f;
}

/** lhs − rhs as a linear form. */
inline LinearForm difference(const Term& lhs, const Term& rhs)
{
    LinearForm d = linearize(lhs);
    LinearForm r = linearize(rhs);
    for (const auto& [v, c] : r.coef) d.coef[v] -= c;
    d.constant -= r.constant;
    return d;
}

struct LinearSystem {
    std::vector<LinearForm> equal_zero;   // form = 0
    std::vector<LinearForm> nonzero;      // form ≠ 0
};

/**
 * Nonnegative integer solution of a system of linear equalities and
 * disequalities. Each disequality L ≠ 0 is split into L ≤ −1 or L ≥ 1 with a
 * fresh slack variable, and every branch is an integer program decided by
 * solve_nonneg_ilp.
 */
inline SolveResult solve_linear_system(const std::vector<std::string>& variables, const LinearSystem& sys,
                                       std::size_t node_budget = 200000)
{
    SolveResult res;
    res.method = "ilp";
    const std::size_t n = variables.size();
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) idx[variables[i]] = i;
    auto row_of = [&](const LinearForm& f, std::size_t width) {
        std::vector<lp::Integer> row(width, 0);
        for (const auto& [v, c] : f.coef) {
            auto it = idx.find(v);
            if (it == idx.end()) throw InvalidInput("linear system mentions undeclared variable '" + v + "'");
            row[it->second] += c;
        }
        return row;
    };
    const std::size_t k = sys.nonzero.size();
    bool budget_hit = false;
    for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
        ++res.branches_explored;
        const std::size_t width = n + k;
        std::vector<std::vector<lp::Integer>> A;
        std::vector<lp::Integer> b;
        for (const auto& f : sys.equal_zero) {
            A.push_back(row_of(f, width));
            b.push_back(-f.constant);
        }
        for (std::size_t i = 0; i < k; ++i) {
            const auto& f = sys.nonzero[i];
            auto row = row_of(f, width);
            // L + s = -1  (L <= -1)   or   L - s = 1  (L >= 1), with L = row·x + constant
            bool below = ((mask >> i) & 1U) != 0;
            row[n + i] = below ? 1 : -1;
            A.push_back(std::move(row));
            b.push_back((below ? lp::Integer(-1) : lp::Integer(1)) - f.constant);
        }
        if (A.empty()) {
            A.push_back(std::vector<lp::Integer>(width, 0));
            b.push_back(0);
        }
        auto r = lp::solve_nonneg_ilp(A, b, node_budget);
        if (r.status == lp::IlpStatus::BudgetExceeded) {
            budget_hit = true;
            continue;
        }
        if (r.status == lp::IlpStatus::Feasible) {
            Assignment a;
            for (std::size_t i = 0; i < n; ++i) a[variables[i]] = r.x[i];
            res.status = Status::Sat;
            res.witness = a;
            return res;
        }
    }
    res.status = budget_hit ? Status::Unknown : Status::Unsat;
    if (budget_hit) res.note = "branch-and-bound node budget exhausted";
    return res;
}

inline void require_plus_terms(const CspInstance& inst, bool allow_neq)
{
    require_valid(inst);
    if (!inst.signature.ops.subset_of(OpSet{Op::Plus}) || inst.signature.upred || inst.signature.times_rel ||
        (!allow_neq && inst.signature.neq))
        throw SignatureViolation("expected a {+} instance, got signature '" + inst.signature.tag() + "'");
}

inline SolveResult verified(const CspInstance& inst, SolveResult r, const char* who)
{
    if (r.status == Status::Sat && check_assignment(inst, *r.witness) != TriBool::True)
        throw InternalInvariant(std::string(who) + ": witness failed verification");
    return r;
}

/** {+} instances with equality atoms. */
inline SolveResult solve_plus(const CspInstance& inst)
{
    require_plus_terms(inst, false);
    LinearSystem sys;
    for (const auto& atom : inst.atoms) {
        const auto& e = std::get<EqAtom>(atom);
        sys.equal_zero.push_back(difference(e.lhs, e.rhs));
    }
    return verified(inst, solve_linear_system(inst.variables, sys), "solve_plus");
}

/** {+} instances with = and ≠ atoms. */
inline SolveResult solve_plus_neq(const CspInstance& inst)
{
    require_plus_terms(inst, true);
    LinearSystem sys;
    for (const auto& atom : inst.atoms) {
        if (auto* e = std::get_if<EqAtom>(&atom)) sys.equal_zero.push_back(difference(e->lhs, e->rhs));
        else {
            const auto& ne = std::get<NeqAtom>(atom);
            sys.nonzero.push_back(difference(ne.lhs, ne.rhs));
        }
    }
    return verified(inst, solve_linear_system(inst.variables, sys), "solve_plus_neq");
}

// ---------------------------------------------------------------------------
// {∩,+}: guess each side singleton or empty

/** t with every s1 ∩ s2 replaced by s1'. */
inline Term prime(const Term& t)
{
    switch (t.op()) {
    case Op::Constant:
    case Op::Variable: return t;
    case Op::Intersect: return prime(t.child(0));
    case Op::Plus: return Term::plus(prime(t.child(0)), prime(t.child(1)));
    default: throw SignatureViolation("prime: only ∩ and + are allowed");
    }
}

inline void intersections(const Term& t, std::vector<Term>& out)
{
    if (t.op() == Op::Intersect) out.push_back(t);
    for (const auto& c : t.children()) intersections(c, out);
}

inline constexpr std::size_t kDefaultBranchLimit = 1U << 14;

/**
 * Per atom t = s, either both sides are singletons (then t' = s' and
 * u1' = u2' for every u1 ∩ u2 in t or s) or both are empty (then some
 * u1 ∩ u2 in t has u1' ≠ u2', and likewise in s). Every branch is a linear
 * {=,≠} system. A side without ∩ is always a singleton, so its empty guess is
 * pruned.
 */
inline SolveResult solve_cap_plus(const CspInstance& inst, std::size_t branch_limit = kDefaultBranchLimit)
{
    require_valid(inst);
    if (!inst.signature.ops.subset_of(OpSet{Op::Intersect, Op::Plus}) || inst.signature.neq ||
        inst.signature.upred || inst.signature.times_rel)
        throw SignatureViolation("solve_cap_plus: expected a {∩,+} instance, got '" + inst.signature.tag() + "'");

    struct Choice {
        bool empty = false;
        std::size_t left = 0, right = 0;  // chosen ∩-subterms for the empty guess
    };
    struct AtomInfo {
        Term lhs, rhs;
        std::vector<Term> caps_l, caps_r;
    };
    std::vector<AtomInfo> atoms;
    for (const auto& atom : inst.atoms) {
        const auto& e = std::get<EqAtom>(atom);
        AtomInfo info{e.lhs, e.rhs, {}, {}};
        intersections(e.lhs, info.caps_l);
        intersections(e.rhs, info.caps_r);
        atoms.push_back(std::move(info));
    }
    bool overflow = false;

    SolveResult res;
    res.method = "cap_plus_guess";
    bool any_unknown = false;
    std::vector<Choice> choice(atoms.size());
    std::function<bool(std::size_t)> enumerate = [&](std::size_t i) -> bool {
        if (i == atoms.size()) {
            if (res.branches_explored >= branch_limit) {
                overflow = true;
                return false;
            }
            ++res.branches_explored;
            LinearSystem sys;
            for (std::size_t k = 0; k < atoms.size(); ++k) {
                const auto& info = atoms[k];
                if (!choice[k].empty) {
                    sys.equal_zero.push_back(difference(prime(info.lhs), prime(info.rhs)));
                    for (const auto* caps : {&info.caps_l, &info.caps_r})
                        for (const auto& u : *caps)
                            sys.equal_zero.push_back(difference(prime(u.child(0)), prime(u.child(1))));
                } else {
                    const Term& ul = info.caps_l[choice[k].left];
                    const Term& ur = info.caps_r[choice[k].right];
                    sys.nonzero.push_back(difference(prime(ul.child(0)), prime(ul.child(1))));
                    sys.nonzero.push_back(difference(prime(ur.child(0)), prime(ur.child(1))));
                }
            }
            SolveResult br = solve_linear_system(inst.variables, sys);
            if (br.status == Status::Unknown) any_unknown = true;
            if (br.status == Status::Sat) {
                res.witness = br.witness;
                return true;
            }
            return false;
        }
        choice[i] = Choice{};
        if (enumerate(i + 1)) return true;
        if (overflow) return false;
        for (std::size_t l = 0; l < atoms[i].caps_l.size(); ++l)
            for (std::size_t r = 0; r < atoms[i].caps_r.size(); ++r) {
                choice[i] = Choice{true, l, r};
                if (enumerate(i + 1)) return true;
                if (overflow) return false;
            }
        return false;
    };
    if (enumerate(0)) {
        res.status = Status::Sat;
        return verified(inst, res, "solve_cap_plus");
    }
    if (overflow) {
        res.status = Status::Unknown;
        res.note = "guess enumeration exceeded the branch limit of " + std::to_string(branch_limit);
    } else if (any_unknown) {
        res.status = Status::Unknown;
        res.note = "a branch exhausted the integer-program budget";
    } else {
        res.status = Status::Unsat;
    }
    return res;
}

/** Picks the complete procedure matching the signature, else bounded search. */
inline SolveResult solve_csp(const CspInstance& inst, std::uint64_t bound = 8)
{
    require_valid(inst);
    const Signature& s = inst.signature;
    if (!s.upred && !s.times_rel) {
        if (s.ops.subset_of(OpSet{Op::Complement, Op::Union, Op::Intersect})) return solve_small_model(inst);
        if (s.ops.subset_of(OpSet{Op::Plus})) return s.neq ? solve_plus_neq(inst) : solve_plus(inst);
        if (s.ops.subset_of(OpSet{Op::Intersect, Op::Plus}) && !s.neq) return solve_cap_plus(inst);
    }
    return solve_bounded(inst, bound);
}

} // namespace skolem
