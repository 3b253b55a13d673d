#pragma once

// CSP(ℕ; ×, U): the zero-preprocessing, the exponent LP for U ⊇ {m, m², ...},
// hardness gadgets and the ξ construction for explicit U.

#include "skolem/lp.hpp"
#include "skolem/numtheory.hpp"
#include "skolem/reductions.hpp"

#include <functional>

namespace skolem {

struct MulTimes {
    std::string x, y, z;
    bool operator==(const MulTimes&) const = default;
};
struct MulU {
    std::string v;
    bool operator==(const MulU&) const = default;
};
struct MulNeq {
    std::string x, y;
    bool operator==(const MulNeq&) const = default;
};
struct MulConst {
    std::string v;
    Natural n;
    bool operator==(const MulConst&) const = default;
};

using MulAtom = std::variant<MulTimes, MulU, MulNeq, MulConst>;

struct MulInstance {
    std::vector<std::string> variables;
    std::vector<MulAtom> atoms;
    std::optional<USpec> uspec;

    bool operator==(const MulInstance&) const = default;
};

namespace detail {
template <class F> void for_each_var(const MulAtom& a, F&& f)
{
    std::visit(
        [&](const auto& at) {
            using T = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<T, MulTimes>) {
                f(at.x);
                f(at.y);
                f(at.z);
            } else if constexpr (std::is_same_v<T, MulU>) f(at.v);
            else if constexpr (std::is_same_v<T, MulNeq>) {
                f(at.x);
                f(at.y);
            } else f(at.v);
        },
        a);
}
} // namespace detail

inline void require_valid(const MulInstance& inst)
{
    std::set<std::string> vars(inst.variables.begin(), inst.variables.end());
    if (vars.size() != inst.variables.size()) throw InvalidInput("mul instance: duplicate variable");
    for (const auto& a : inst.atoms) {
        detail::for_each_var(a, [&](const std::string& v) {
            if (!vars.count(v)) throw InvalidInput("mul instance: undeclared variable '" + v + "'");
        });
        if (std::holds_alternative<MulU>(a) && !inst.uspec) throw InvalidInput("mul instance: U atom without uspec");
    }
}

inline bool has_only_times_and_u(const MulInstance& inst)
{
    return std::all_of(inst.atoms.begin(), inst.atoms.end(), [](const MulAtom& a) {
        return std::holds_alternative<MulTimes>(a) || std::holds_alternative<MulU>(a);
    });
}

inline bool check_mul(const MulInstance& inst, const Assignment& s)
{
    for (const auto& a : inst.atoms) {
        bool ok = std::visit(
            [&](const auto& at) {
                using T = std::decay_t<decltype(at)>;
                if constexpr (std::is_same_v<T, MulTimes>)
                    return detail::lookup(s, at.x) * detail::lookup(s, at.y) == detail::lookup(s, at.z);
                else if constexpr (std::is_same_v<T, MulU>) return inst.uspec->contains(detail::lookup(s, at.v));
                else if constexpr (std::is_same_v<T, MulNeq>) return detail::lookup(s, at.x) != detail::lookup(s, at.y);
                else return detail::lookup(s, at.v) == at.n;
            },
            a);
        if (!ok) return false;
    }
    return true;
}

/** From the relational part of the CSP text format: times x y z, U(x), x != y, x = n. */
inline MulInstance to_mul_instance(const CspInstance& inst)
{
    MulInstance m;
    m.variables = inst.variables;
    m.uspec = inst.uspec;
    auto plain = [](const Term& t) { return t.op() == Op::Variable || t.op() == Op::Constant; };
    for (const auto& atom : inst.atoms) {
        if (auto* t = std::get_if<TimesRelAtom>(&atom)) m.atoms.push_back(MulTimes{t->x, t->y, t->z});
        else if (auto* u = std::get_if<UAtom>(&atom)) m.atoms.push_back(MulU{u->var});
        else if (auto* e = std::get_if<NeqAtom>(&atom)) {
            if (e->lhs.op() != Op::Variable || e->rhs.op() != Op::Variable)
                throw SignatureViolation("mul instance: != must relate two variables");
            m.atoms.push_back(MulNeq{e->lhs.name(), e->rhs.name()});
        } else {
            const auto& q = std::get<EqAtom>(atom);
            if (!plain(q.lhs) || !plain(q.rhs) || (q.lhs.op() == Op::Constant) == (q.rhs.op() == Op::Constant))
                throw SignatureViolation("mul instance: = must bind a variable to a constant");
            const Term& v = q.lhs.op() == Op::Variable ? q.lhs : q.rhs;
            const Term& c = q.lhs.op() == Op::Variable ? q.rhs : q.lhs;
            m.atoms.push_back(MulConst{v.name(), c.value()});
        }
    }
    require_valid(m);
    return m;
}

inline CspInstance to_csp_instance(const MulInstance& m)
{
    CspInstance inst;
    inst.variables = m.variables;
    inst.uspec = m.uspec;
    for (const auto& a : m.atoms) {
        if (auto* t = std::get_if<MulTimes>(&a)) inst.atoms.push_back(TimesRelAtom{t->x, t->y, t->z});
        else if (auto* u = std::get_if<MulU>(&a)) inst.atoms.push_back(UAtom{u->v});
        else if (auto* n = std::get_if<MulNeq>(&a)) inst.atoms.push_back(NeqAtom{Term::var(n->x), Term::var(n->y)});
        else {
            const auto& c = std::get<MulConst>(a);
            inst.atoms.push_back(EqAtom{Term::var(c.v), Term::constant(c.n)});
        }
    }
    inst.signature = infer_signature(inst.atoms);
    return inst;
}

// ---------------------------------------------------------------------------
// Zero preprocessing

struct ZeroPreprocessed {
    MulInstance positive;           // over the variables that cannot be 0
    std::set<std::string> forced;   // variables set to 0
};

/**
 * V' is the least set containing every U-variable and closed under
 * z ∈ V' ⇒ x, y ∈ V' and x, y ∈ V' ⇒ z ∈ V' for each x × y = z. Outside V'
 * everything is 0; the atoms left behind read 0 × _ = 0 and are dropped.
 */
inline ZeroPreprocessed preprocess_zero(const MulInstance& inst)
{
    require_valid(inst);
    if (!has_only_times_and_u(inst)) throw InvalidInput("preprocess_zero: only × and U atoms are allowed");
    if (inst.uspec && (inst.uspec->contains(0) || inst.uspec->contains(1)))
        throw InvalidInput("preprocess_zero: U must avoid 0 and 1");
    std::set<std::string> vp;
    for (const auto& a : inst.atoms)
        if (auto* u = std::get_if<MulU>(&a)) vp.insert(u->v);
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& a : inst.atoms) {
            auto* t = std::get_if<MulTimes>(&a);
            if (!t) continue;
            if (vp.count(t->z)) {
                changed |= vp.insert(t->x).second;
                changed |= vp.insert(t->y).second;
            }
            if (vp.count(t->x) && vp.count(t->y)) changed |= vp.insert(t->z).second;
        }
    }
    ZeroPreprocessed r;
    r.positive.uspec = inst.uspec;
    for (const auto& v : inst.variables) {
        if (vp.count(v)) r.positive.variables.push_back(v);
        else r.forced.insert(v);
    }
    for (const auto& a : inst.atoms) {
        if (auto* u = std::get_if<MulU>(&a)) {
            r.positive.atoms.push_back(a);
            if (!vp.count(u->v)) throw InternalInvariant("preprocess_zero: U variable outside V'");
            continue;
        }
        const auto& t = std::get<MulTimes>(a);
        int in = static_cast<int>(vp.count(t.x)) + static_cast<int>(vp.count(t.y));
        if (vp.count(t.z)) {
            if (in != 2) throw InternalInvariant("preprocess_zero: z in V' with a factor outside");
            r.positive.atoms.push_back(a);
        } else if (in == 2) {
            throw InternalInvariant("preprocess_zero: both factors in V' but z outside");
        }
    }
    return r;
}

inline Assignment preprocess_transport(const ZeroPreprocessed& p, const Assignment& positive)
{
    Assignment s = positive;
    for (const auto& v : p.forced) s[v] = 0;
    return s;
}

// ---------------------------------------------------------------------------
// Exponent system

/** Ω(n): prime factors counted with multiplicity; Ω(1) = 0. */
inline std::uint64_t big_omega(const Natural& n)
{
    std::uint64_t k = 0;
    for (const auto& [p, e] : factorize(n)) k += e;
    return k;
}

/** h(1) = 1, h(x) = m^Ω(x): multiplicative, and maps every x ≥ 2 into {m, m², ...}. */
inline Natural exponent_homomorphism(const Natural& m, const Natural& x)
{
    return pow_natural(m, big_omega(x));
}

struct AdditiveInstance {
    std::vector<std::string> variables;
    std::vector<std::array<std::size_t, 3>> equations;  // e_x + e_y = e_z
    std::vector<bool> at_least_one;

    bool satisfied_by(const std::vector<Natural>& e) const
    {
        for (const auto& [x, y, z] : equations)
            if (e[x] + e[y] != e[z]) return false;
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (e[i] < 0 || (at_least_one[i] && e[i] < 1)) return false;
        return true;
    }
};

inline AdditiveInstance to_additive(const MulInstance& inst, const Natural& m)
{
    require_valid(inst);
    if (!has_only_times_and_u(inst))
        throw SignatureViolation("to_additive: != and constants are not expressible in the exponent system");
    if (m < 2) throw InvalidInput("to_additive: m must be >= 2");
    if (inst.uspec) {
        auto b = inst.uspec->powers_base();
        if (!b || *b != m) throw InvalidInput("to_additive: uspec must contain powers of " + m.str());
    }
    AdditiveInstance add;
    add.variables = inst.variables;
    add.at_least_one.assign(inst.variables.size(), false);
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < inst.variables.size(); ++i) idx[inst.variables[i]] = i;
    for (const auto& a : inst.atoms) {
        if (auto* t = std::get_if<MulTimes>(&a)) add.equations.push_back({idx.at(t->x), idx.at(t->y), idx.at(t->z)});
        else add.at_least_one[idx.at(std::get<MulU>(a).v)] = true;
    }
    return add;
}

inline std::vector<lp::Constraint> additive_constraints(const AdditiveInstance& add)
{
    const std::size_t n = add.variables.size();
    std::vector<lp::Constraint> cons;
    for (const auto& [x, y, z] : add.equations) {
        std::vector<Rational> c(n, 0);
        c[x] += 1;
        c[y] += 1;
        c[z] -= 1;
        cons.push_back(lp::eq(std::move(c), 0));
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Rational> c(n, 0);
        c[i] = 1;
        cons.push_back(lp::geq(std::move(c), add.at_least_one[i] ? 1 : 0));
    }
    return cons;
}

/** Exact rational feasibility of the exponent system, by Fourier–Motzkin elimination. */
inline std::optional<std::vector<Rational>> rational_feasible(const AdditiveInstance& add)
{
    if (add.variables.empty()) return std::vector<Rational>{};
    return lp::fm_feasible(add.variables.size(), additive_constraints(add));
}

/** Multiplies by the lcm of the denominators; homogeneous equations and ≥ 0 / ≥ 1 bounds survive. */
inline std::vector<Natural> scale_to_integer(const std::vector<Rational>& point, Natural* factor = nullptr)
{
    Natural a = 1;
    for (const auto& q : point) {
        Natural d = boost::multiprecision::denominator(q);
        a = a / boost::multiprecision::gcd(a, d) * d;
    }
    std::vector<Natural> out;
    for (const auto& q : point) {
        Rational s = q * Rational(a);
        if (s < 0) throw InvalidInput("scale_to_integer: negative coordinate");
        out.push_back(boost::multiprecision::numerator(s));
    }
    if (factor) *factor = a;
    return out;
}

// ---------------------------------------------------------------------------
// Solving

struct MulTrace {
    std::set<std::string> forced;
    std::optional<AdditiveInstance> additive;
    std::optional<std::vector<Rational>> point;
    Natural scale = 1;
    std::size_t candidates = 0;
};

struct MulResult {
    Status status = Status::Unknown;
    std::optional<Assignment> witness;
    std::string method;
    std::string note;
    MulTrace trace;
};

struct MulSearchOptions {
    Natural product_bound = 100000;
    std::size_t max_candidates = 4000;
    std::size_t node_budget = 2000000;
};

namespace detail {

// Backtracking over a candidate list; × atoms with two known sides fix the third.
class MulSearch {
public:
    MulSearch(const MulInstance& inst, std::vector<Natural> cands, std::size_t budget)
        : inst_(inst), cands_(std::move(cands)), budget_(budget)
    {
    }

    std::optional<Assignment> run(bool& exhausted)
    {
        Assignment s;
        bool ok = go(s);
        exhausted = !ok && nodes_ <= budget_;
        if (ok) return s;
        return std::nullopt;
    }

    std::size_t nodes() const { return nodes_; }

private:
    bool consistent(const Assignment& s) const
    {
        auto known = [&](const std::string& v) { return s.count(v) > 0; };
        for (const auto& a : inst_.atoms) {
            bool ok = std::visit(
                [&](const auto& at) {
                    using T = std::decay_t<decltype(at)>;
                    if constexpr (std::is_same_v<T, MulTimes>) {
                        if (known(at.x) && known(at.y) && known(at.z)) return s.at(at.x) * s.at(at.y) == s.at(at.z);
                        return true;
                    } else if constexpr (std::is_same_v<T, MulU>) {
                        return !known(at.v) || inst_.uspec->contains(s.at(at.v));
                    } else if constexpr (std::is_same_v<T, MulNeq>) {
                        return !known(at.x) || !known(at.y) || s.at(at.x) != s.at(at.y);
                    } else {
                        return !known(at.v) || s.at(at.v) == at.n;
                    }
                },
                a);
            if (!ok) return false;
        }
        return true;
    }

    // Values forced for v by the atoms, or nullopt when v is unconstrained so far.
    std::optional<std::vector<Natural>> forced(const Assignment& s, const std::string& v) const
    {
        auto known = [&](const std::string& w) { return s.count(w) > 0; };
        for (const auto& a : inst_.atoms) {
            if (auto* c = std::get_if<MulConst>(&a); c && c->v == v) return std::vector<Natural>{c->n};
            auto* t = std::get_if<MulTimes>(&a);
            if (!t) continue;
            if (t->z == v && known(t->x) && known(t->y)) return std::vector<Natural>{s.at(t->x) * s.at(t->y)};
            const std::string* other = nullptr;
            if (t->x == v && t->y != v) other = &t->y;
            if (t->y == v && t->x != v) other = &t->x;
            if (other && known(*other) && known(t->z) && s.at(*other) != 0) {
                const Natural& o = s.at(*other);
                const Natural& z = s.at(t->z);
                if (z % o != 0) return std::vector<Natural>{};
                return std::vector<Natural>{z / o};
            }
        }
        return std::nullopt;
    }

    bool go(Assignment& s)
    {
        if (++nodes_ > budget_) return false;
        if (!consistent(s)) return false;
        if (s.size() == inst_.variables.size()) return true;
        // Prefer a variable with forced values.
        std::string pick;
        std::optional<std::vector<Natural>> vals;
        for (const auto& v : inst_.variables) {
            if (s.count(v)) continue;
            auto f = forced(s, v);
            if (f) {
                pick = v;
                vals = f;
                break;
            }
            if (pick.empty()) pick = v;
        }
        const std::vector<Natural>& values = vals ? *vals : cands_;
        for (const auto& x : values) {
            s[pick] = x;
            if (go(s)) return true;
            if (nodes_ > budget_) break;
        }
        s.erase(pick);
        return false;
    }

    const MulInstance& inst_;
    std::vector<Natural> cands_;
    std::size_t budget_;
    std::size_t nodes_ = 0;
};

} // namespace detail

/**
 * 0, 1, divisors of explicit U elements and constants, the first powers of a
 * powers base, then closed under pairwise products up to the bound.
 */
inline std::vector<Natural> mul_candidates(const MulInstance& inst, const MulSearchOptions& opt = {})
{
    std::set<Natural> seeds{0, 1};
    std::set<Natural> ex;
    if (inst.uspec) {
        inst.uspec->explicit_elements(ex);
        if (auto b = inst.uspec->powers_base())
            for (Natural p = *b; p <= opt.product_bound; p *= *b) ex.insert(p);
    }
    for (const auto& a : inst.atoms)
        if (auto* c = std::get_if<MulConst>(&a)) ex.insert(c->n);
    for (const auto& e : ex) {
        if (e == 0) continue;
        if (fits_u64(e)) {
            for (const auto& d : divisors(e)) seeds.insert(d);
        } else {
            seeds.insert(e);
        }
    }
    std::set<Natural> all = seeds;
    for (bool changed = true; changed && all.size() < opt.max_candidates;) {
        changed = false;
        std::vector<Natural> cur(all.begin(), all.end());
        for (std::size_t i = 0; i < cur.size() && all.size() < opt.max_candidates; ++i)
            for (std::size_t j = i; j < cur.size() && all.size() < opt.max_candidates; ++j) {
                Natural p = cur[i] * cur[j];
                if (p > opt.product_bound) break;
                changed |= all.insert(p).second;
            }
    }
    return {all.begin(), all.end()};
}

/** Complete search with every variable drawn from `values` (forced values may lie outside). */
inline MulResult solve_mul_over(const MulInstance& inst, std::vector<Natural> values)
{
    require_valid(inst);
    MulResult r;
    r.method = "bounded";
    r.trace.candidates = values.size();
    detail::MulSearch search(inst, std::move(values), SIZE_MAX);
    bool exhausted = false;
    if (auto w = search.run(exhausted)) {
        r.status = Status::Sat;
        r.witness = w;
    } else {
        r.status = Status::NoWitnessUpTo;
    }
    return r;
}

/** Every variable in [0..bound]; NoWitnessUpTo when nothing is found. */
inline MulResult solve_mul_bounded(const MulInstance& inst, std::uint64_t bound)
{
    std::vector<Natural> cands;
    for (std::uint64_t x = 0; x <= bound; ++x) cands.emplace_back(x);
    MulResult r = solve_mul_over(inst, std::move(cands));
    if (r.status == Status::NoWitnessUpTo) r.note = "no solution with values <= " + std::to_string(bound);
    return r;
}

/**
 * With U ⊇ {m, m², ...} and only × / U atoms: zero preprocessing, the exponent
 * system over ℚ, scaling to ℕ and the lift v ↦ m^{e_v}. This path is complete.
 * Anything else goes to candidate search, which is sound for Sat only.
 */
inline MulResult solve_mul(const MulInstance& inst, const MulSearchOptions& opt = {})
{
    require_valid(inst);
    MulResult r;
    std::optional<Natural> m = inst.uspec ? inst.uspec->powers_base() : std::nullopt;
    bool no_u = std::none_of(inst.atoms.begin(), inst.atoms.end(),
                             [](const MulAtom& a) { return std::holds_alternative<MulU>(a); });
    if (has_only_times_and_u(inst) && no_u) {
        // Without U everything may be 0.
        r.method = "zero";
        r.status = Status::Sat;
        Assignment s;
        for (const auto& v : inst.variables) s[v] = 0;
        r.witness = s;
        return r;
    }
    if (m && has_only_times_and_u(inst)) {
        r.method = "lp";
        auto pre = preprocess_zero(inst);
        r.trace.forced = pre.forced;
        auto add = to_additive(pre.positive, *m);
        r.trace.additive = add;
        auto point = rational_feasible(add);
        if (!point) {
            r.status = Status::Unsat;
            r.note = "exponent system infeasible over the rationals";
            return r;
        }
        r.trace.point = point;
        auto e = scale_to_integer(*point, &r.trace.scale);
        if (!add.satisfied_by(e)) throw InternalInvariant("solve_mul: scaled point violates the exponent system");
        Assignment pos;
        for (std::size_t i = 0; i < e.size(); ++i) {
            if (e[i] > 4096) throw InvalidInput("solve_mul: exponent too large to materialise");
            pos[add.variables[i]] = pow_natural(*m, e[i].convert_to<std::uint64_t>());
        }
        Assignment s = preprocess_transport(pre, pos);
        if (!check_mul(inst, s)) throw InternalInvariant("solve_mul: lifted witness fails verification");
        r.status = Status::Sat;
        r.witness = s;
        return r;
    }
    r.method = "candidates";
    auto cands = mul_candidates(inst, opt);
    r.trace.candidates = cands.size();
    detail::MulSearch search(inst, cands, opt.node_budget);
    bool exhausted = false;
    auto w = search.run(exhausted);
    if (w) {
        if (!check_mul(inst, *w)) throw InternalInvariant("solve_mul: candidate witness fails verification");
        r.status = Status::Sat;
        r.witness = w;
    } else {
        r.status = Status::Unknown;
        r.note = exhausted ? "no witness among " + std::to_string(cands.size()) + " candidate values"
                           : "search budget exhausted";
    }
    return r;
}

// ---------------------------------------------------------------------------
// 3SAT with ≠ and ×

struct NeqGadget {
    MulInstance instance;
    std::string zero;  // forced to 0
    std::string zero_witness;
};

inline std::string gadget_pos(std::size_t i) { return "p" + std::to_string(i + 1); }
inline std::string gadget_neg(std::size_t i) { return "n" + std::to_string(i + 1); }

/**
 * p_i, n_i ∈ {0,1} via v × v = v, with p_i ≠ n_i. z is 0 because z × z = z and
 * z × y = z for some y ≠ z. A clause holds iff the product of its complemented
 * literals is 0: l̄1 × l̄2 = w, w × l̄3 = z.
 */
inline NeqGadget gadget_3sat_to_neq_times(const Cnf& f)
{
    NeqGadget g;
    MulInstance& m = g.instance;
    g.zero = "z";
    g.zero_witness = "zy";
    for (std::size_t i = 0; i < f.num_vars; ++i) {
        std::string p = gadget_pos(i), n = gadget_neg(i);
        m.variables.push_back(p);
        m.variables.push_back(n);
        m.atoms.push_back(MulTimes{p, p, p});
        m.atoms.push_back(MulTimes{n, n, n});
        m.atoms.push_back(MulNeq{p, n});
    }
    m.variables.push_back(g.zero);
    m.variables.push_back(g.zero_witness);
    m.atoms.push_back(MulTimes{g.zero, g.zero, g.zero});
    m.atoms.push_back(MulNeq{g.zero_witness, g.zero});
    m.atoms.push_back(MulTimes{g.zero, g.zero_witness, g.zero});
    auto complement = [](int lit) {
        auto i = static_cast<std::size_t>(std::abs(lit)) - 1;
        return lit > 0 ? gadget_neg(i) : gadget_pos(i);
    };
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
        const auto& cl = f.clauses[c];
        if (cl.size() > 3) throw InvalidInput("gadget_3sat_to_neq_times: clause with more than 3 literals");
        switch (cl.size()) {
        case 0: m.atoms.push_back(MulNeq{g.zero, g.zero}); break;
        case 1: m.atoms.push_back(MulTimes{complement(cl[0]), complement(cl[0]), g.zero}); break;
        case 2: m.atoms.push_back(MulTimes{complement(cl[0]), complement(cl[1]), g.zero}); break;
        default: {
            std::string w = "w" + std::to_string(c + 1);
            m.variables.push_back(w);
            m.atoms.push_back(MulTimes{complement(cl[0]), complement(cl[1]), w});
            m.atoms.push_back(MulTimes{w, complement(cl[2]), g.zero});
        }
        }
    }
    return g;
}

inline Assignment neq_gadget_witness(const NeqGadget& g, const Cnf& f, const std::vector<bool>& values)
{
    Assignment s;
    for (std::size_t i = 0; i < f.num_vars; ++i) {
        s[gadget_pos(i)] = values[i] ? 1 : 0;
        s[gadget_neg(i)] = values[i] ? 0 : 1;
    }
    s[g.zero] = 0;
    s[g.zero_witness] = 1;
    for (std::size_t c = 0; c < f.clauses.size(); ++c) {
        const auto& cl = f.clauses[c];
        if (cl.size() != 3) continue;
        auto lit_false = [&](int lit) { return values[static_cast<std::size_t>(std::abs(lit)) - 1] != (lit > 0); };
        s["w" + std::to_string(c + 1)] = (lit_false(cl[0]) && lit_false(cl[1])) ? 1 : 0;
    }
    return s;
}

inline std::vector<bool> neq_gadget_to_sat(const Cnf& f, const Assignment& s)
{
    std::vector<bool> v(f.num_vars);
    for (std::size_t i = 0; i < f.num_vars; ++i) v[i] = detail::lookup(s, gadget_pos(i)) == 1;
    return v;
}

// ---------------------------------------------------------------------------
// The constant m as a U-variable

struct ConstGadget {
    MulInstance instance;
    std::string vm;
    Natural m;
    std::map<std::string, std::string> cofactor;  // x ↦ y_x with x × y_x = v_m
};

/**
 * Input: an instance over (Div_m; ×, m) with constants written as Const(v, m).
 * Every such v becomes the fresh v_m with U(v_m), and each variable x keeps its
 * divisor domain through x × y_x = v_m.
 */
inline ConstGadget gadget_constant(const MulInstance& inst, const USpec& u, const Natural& m)
{
    require_valid(inst);
    if (u.kind() != USpec::Kind::Explicit || u.elements().empty())
        throw InvalidInput("gadget_constant: U must be a nonempty explicit set");
    for (const auto& x : u.elements())
        if (!has_degree_one_factor(x))
            throw InvalidInput("gadget_constant: " + x.str() + " in U has no degree-one prime factor");
    if (!u.contains(m)) throw InvalidInput("gadget_constant: m must be an element of U");
    ConstGadget g;
    g.m = m;
    std::set<std::string> taken(inst.variables.begin(), inst.variables.end());
    g.vm = detail::fresh_name(taken, "v_m");
    taken.insert(g.vm);
    std::set<std::string> bound;
    for (const auto& a : inst.atoms) {
        if (auto* c = std::get_if<MulConst>(&a)) {
            if (c->n != m) throw InvalidInput("gadget_constant: constant other than m");
            bound.insert(c->v);
        } else if (!std::holds_alternative<MulTimes>(a)) {
            throw InvalidInput("gadget_constant: only × atoms and the constant m are allowed");
        }
    }
    auto rename = [&](const std::string& v) { return bound.count(v) ? g.vm : v; };
    MulInstance& out = g.instance;
    out.uspec = u;
    out.variables.push_back(g.vm);
    out.atoms.push_back(MulU{g.vm});
    for (const auto& v : inst.variables) {
        if (bound.count(v)) continue;
        out.variables.push_back(v);
        std::string y = detail::fresh_name(taken, "y_" + v);
        taken.insert(y);
        g.cofactor[v] = y;
        out.variables.push_back(y);
        out.atoms.push_back(MulTimes{v, y, g.vm});
    }
    for (const auto& a : inst.atoms)
        if (auto* t = std::get_if<MulTimes>(&a)) out.atoms.push_back(MulTimes{rename(t->x), rename(t->y), rename(t->z)});
    return g;
}

/** A Div_m solution with m ∈ U carries over with v_m = m and y_x = m / x. */
inline Assignment const_gadget_forward(const ConstGadget& g, const Assignment& s)
{
    Assignment out;
    out[g.vm] = g.m;
    for (const auto& [x, y] : g.cofactor) {
        const Natural& v = detail::lookup(s, x);
        if (v == 0 || g.m % v != 0) throw InvalidInput("const_gadget_forward: value outside Div_m");
        out[x] = v;
        out[y] = g.m / v;
    }
    return out;
}

/**
 * An output solution with v_m = u ∈ U lives in Div_u; the two-element core map
 * of Div_u followed by u ↦ m gives a Div_m solution with values in {1, m}.
 */
inline Assignment const_gadget_backward(const ConstGadget& g, const MulInstance& original, const Assignment& t)
{
    const Natural& u = detail::lookup(t, g.vm);
    auto e = core_endomorphism(u);
    Assignment s;
    for (const auto& v : original.variables) {
        if (!g.cofactor.count(v)) {
            s[v] = g.m;
            continue;
        }
        auto it = e.find(detail::lookup(t, v));
        if (it == e.end()) throw InvalidInput("const_gadget_backward: value does not divide v_m");
        s[v] = it->second == u ? g.m : Natural(1);
    }
    return s;
}

// ---------------------------------------------------------------------------
// ξ(y) = ∃z, x_1..x_k  U(z) ∧ y^r · x_1^{a_1} ⋯ x_k^{a_k} = z

struct XiConstruction {
    std::uint64_t r = 0;
    std::vector<std::uint64_t> exponents;  // a_1..a_k, each > r
    Natural witness;                        // q^r · p_1^{a_1} ⋯ p_k^{a_k} ∈ U
    Natural q;                              // square-free part carrying exponent r
    std::vector<Natural> universe;          // explicit U

    /** Whether n is a sum of the exponents with repetition. */
    bool representable(std::uint64_t n) const
    {
        std::vector<bool> ok(n + 1, false);
        ok[0] = true;
        for (std::uint64_t i = 1; i <= n; ++i)
            for (auto a : exponents)
                if (a <= i && ok[i - a]) {
                    ok[i] = true;
                    break;
                }
        return ok[n];
    }

    /** y ∈ X: some z ∈ U is y^r times a product of a_i-th powers. */
    bool contains(const Natural& y) const
    {
        if (y == 0) return false;
        Natural yr = pow_natural(y, r);
        for (const auto& z : universe) {
            if (z % yr != 0) continue;
            bool ok = true;
            for (const auto& [p, e] : factorize(z / yr))
                if (!representable(e)) {
                    ok = false;
                    break;
                }
            if (ok) return true;
        }
        return false;
    }

    /** All of X; finite since every member's r-th power divides an element of U. */
    std::vector<Natural> members() const
    {
        std::set<Natural> out;
        for (const auto& z : universe) {
            // y^r | z ⇔ y | ∏ p^{⌊e/r⌋}
            Natural root = 1;
            for (const auto& [p, e] : factorize(z)) root *= pow_natural(p, e / r);
            for (const auto& y : divisors(root))
                if (contains(y)) out.insert(y);
        }
        return {out.begin(), out.end()};
    }
};

inline XiConstruction xi_construct(const USpec& u)
{
    if (u.kind() != USpec::Kind::Explicit || u.elements().empty())
        throw InvalidInput("xi_construct: U must be a nonempty explicit set");
    Basis b = basis(u);
    if (b.values == std::set<std::uint64_t>{1}) throw InvalidInput("xi_construct: basis(U) is already {1}");
    XiConstruction xi;
    xi.r = *b.values.rbegin();
    xi.universe = u.elements();
    for (const auto& z : u.elements()) {
        Natural q = 1;
        std::vector<std::uint64_t> rest;
        bool shape = true;
        for (const auto& [p, e] : factorize(z)) {
            if (e == xi.r) q *= p;
            else if (e > xi.r) rest.push_back(e);
            else shape = false;
        }
        if (!shape || q == 1 || rest.empty()) continue;
        xi.q = q;
        xi.witness = z;
        xi.exponents = rest;
        return xi;
    }
    throw InvalidInput("xi_construct: no element of U has the shape q^r · p_1^{a_1} ⋯ p_k^{a_k} with a_i > r");
}

} // namespace skolem
