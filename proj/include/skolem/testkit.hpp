#pragma once

// Seeded generators and brute-force oracles. The oracles here deliberately
// share no evaluation code with the set engine.

#include "skolem/instance.hpp"

#include <functional>
#include <set>

namespace skolem::testkit {

/** splitmix64; the bounded draw is part of the reproducibility contract. */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30U)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27U)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31U);
    }

    /** Uniform in [0, n), by rejection. */
    std::uint64_t below(std::uint64_t n)
    {
        if (n == 0) throw InvalidInput("Rng::below(0)");
        std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        for (;;) {
            std::uint64_t x = next();
            if (x < limit) return x % n;
        }
    }

    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

    template <class T>
    const T& pick(const std::vector<T>& xs)
    {
        return xs.at(below(xs.size()));
    }

private:
    std::uint64_t state_;
};

inline std::vector<Op> operators_of(OpSet ops)
{
    std::vector<Op> out;
    for (Op op : {Op::Complement, Op::Union, Op::Intersect, Op::Plus, Op::Times})
        if (ops.contains(op)) out.push_back(op);
    return out;
}

// ---------------------------------------------------------------------------
// Generators

struct CircuitProfile {
    std::size_t gates = 5;
    OpSet ops = kAllOperators;
    std::uint64_t max_constant = 5;
    std::vector<std::string> variables = {"x", "y"};
    std::uint64_t leaf_percent = 35;  // chance that a non-first gate is a leaf
};

/**
 * Gate 1 is a leaf; later gates are leaves with probability leaf_percent,
 * otherwise an operator from the profile with uniformly drawn predecessors.
 * Leaves are variables half of the time when variables are available.
 */
inline Circuit gen_circuit(Rng& rng, const CircuitProfile& p)
{
    auto ops = operators_of(p.ops);
    CircuitBuilder b;
    for (std::size_t k = 1; k <= p.gates; ++k) {
        bool leaf = k == 1 || ops.empty() || rng.chance(p.leaf_percent, 100);
        if (leaf) {
            if (!p.variables.empty() && rng.chance(1, 2)) b.variable(rng.pick(p.variables));
            else b.constant(rng.range(0, p.max_constant));
            continue;
        }
        Op op = rng.pick(ops);
        std::size_t x = rng.range(1, k - 1);
        if (op == Op::Complement) b.complement(x);
        else b.binary(op, x, rng.range(1, k - 1));
    }
    return b.build(p.gates);
}

inline Term gen_term(Rng& rng, const std::vector<std::string>& vars, OpSet ops, std::size_t depth,
                     std::uint64_t max_constant)
{
    auto list = operators_of(ops);
    if (depth <= 1 || list.empty() || rng.chance(1, 4)) {
        if (!vars.empty() && rng.chance(3, 5)) return Term::var(rng.pick(vars));
        return Term::constant(rng.range(0, max_constant));
    }
    Op op = rng.pick(list);
    if (op == Op::Complement) return Term::complement(gen_term(rng, vars, ops, depth - 1, max_constant));
    Term a = gen_term(rng, vars, ops, depth - 1, max_constant);
    Term c = gen_term(rng, vars, ops, depth - 1, max_constant);
    return Term::binary(op, a, c);
}

struct CspProfile {
    std::size_t variables = 3;
    std::size_t atoms = 3;
    OpSet ops = kAllOperators;
    std::size_t depth = 3;
    std::uint64_t max_constant = 3;
    bool allow_neq = false;
};

inline std::vector<std::string> variable_names(std::size_t n, const std::string& prefix = "y")
{
    std::vector<std::string> v;
    for (std::size_t i = 1; i <= n; ++i) v.push_back(prefix + std::to_string(i));
    return v;
}

inline CspInstance gen_csp(Rng& rng, const CspProfile& p)
{
    CspInstance inst;
    inst.variables = variable_names(p.variables);
    for (std::size_t i = 0; i < p.atoms; ++i) {
        Term l = gen_term(rng, inst.variables, p.ops, p.depth, p.max_constant);
        Term r = gen_term(rng, inst.variables, p.ops, p.depth, p.max_constant);
        if (p.allow_neq && rng.chance(1, 4)) inst.atoms.push_back(NeqAtom{l, r});
        else inst.atoms.push_back(EqAtom{l, r});
    }
    inst.signature.ops = p.ops;
    inst.signature.neq = p.allow_neq;
    return inst;
}

struct MulProfile {
    std::size_t variables = 4;
    std::size_t times_atoms = 3;
    std::size_t u_atoms = 1;
    USpec uspec = USpec::powers(2);
};

/** x × y = z triples and U atoms over uniformly drawn variables. */
inline CspInstance gen_mul_csp(Rng& rng, const MulProfile& p)
{
    CspInstance inst;
    inst.variables = variable_names(p.variables, "v");
    auto pick = [&] { return inst.variables[rng.range(0, p.variables - 1)]; };
    for (std::size_t i = 0; i < p.times_atoms; ++i) {
        std::string x = pick(), y = pick(), z = pick();
        inst.atoms.push_back(TimesRelAtom{x, y, z});
    }
    for (std::size_t i = 0; i < p.u_atoms; ++i) inst.atoms.push_back(UAtom{pick()});
    inst.uspec = p.uspec;
    inst.signature = infer_signature(inst.atoms);
    return inst;
}

struct CnfProfile {
    std::size_t variables = 6;
    std::size_t clauses = 20;
    std::size_t width = 3;
};

/** Clauses of exactly `width` literals over distinct variables. */
inline Cnf gen_cnf(Rng& rng, const CnfProfile& p)
{
    Cnf f;
    f.num_vars = p.variables;
    for (std::size_t c = 0; c < p.clauses; ++c) {
        std::vector<int> clause;
        while (clause.size() < std::min(p.width, p.variables)) {
            int v = static_cast<int>(rng.range(1, p.variables));
            bool dup = std::any_of(clause.begin(), clause.end(), [&](int l) { return std::abs(l) == v; });
            if (dup) continue;
            clause.push_back(rng.chance(1, 2) ? v : -v);
        }
        f.clauses.push_back(std::move(clause));
    }
    return f;
}

// ---------------------------------------------------------------------------
// Oracles

/** Literal evaluation of a complement-free circuit on explicit sets. */
inline std::set<Natural> naive_eval(const Circuit& c, const Assignment& a)
{
    if (validate_circuit(c).size()) throw InvalidInput("naive_eval: invalid circuit");
    std::vector<std::set<Natural>> val(c.size() + 1);
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        std::set<Natural>& out = val[k];
        switch (g.op) {
        case Op::Constant: out.insert(g.value); break;
        case Op::Variable: {
            auto it = a.find(g.name);
            if (it == a.end()) throw InvalidInput("naive_eval: unassigned input " + g.name);
            out.insert(it->second);
            break;
        }
        case Op::Complement: throw InvalidInput("naive_eval: complement gates are outside the oracle's domain");
        case Op::Union:
            out = val[g.preds[0]];
            out.insert(val[g.preds[1]].begin(), val[g.preds[1]].end());
            break;
        case Op::Intersect:
            for (const auto& x : val[g.preds[0]])
                if (val[g.preds[1]].count(x)) out.insert(x);
            break;
        case Op::Plus:
            for (const auto& x : val[g.preds[0]])
                for (const auto& y : val[g.preds[1]]) out.insert(x + y);
            break;
        case Op::Times:
            for (const auto& x : val[g.preds[0]])
                for (const auto& y : val[g.preds[1]]) out.insert(x * y);
            break;
        }
    }
    return val[c.output()];
}

inline std::set<Natural> naive_eval_term(const Term& t, const Assignment& a)
{
    std::set<Natural> out;
    switch (t.op()) {
    case Op::Constant: out.insert(t.value()); return out;
    case Op::Variable: out.insert(a.at(t.name())); return out;
    case Op::Complement: throw InvalidInput("naive_eval: complement outside the oracle's domain");
    default: break;
    }
    auto x = naive_eval_term(t.child(0), a);
    auto y = naive_eval_term(t.child(1), a);
    if (t.op() == Op::Union) {
        out = x;
        out.insert(y.begin(), y.end());
    } else if (t.op() == Op::Intersect) {
        for (const auto& e : x)
            if (y.count(e)) out.insert(e);
    } else {
        for (const auto& e : x)
            for (const auto& f : y) out.insert(t.op() == Op::Plus ? e + f : e * f);
    }
    return out;
}

/**
 * Bound beyond which a ×-free term's value is constant: every such value is
 * finite with all elements <= beta or cofinite with all gaps <= beta, where
 * beta(leaf) = value, beta(s+t) = beta(s) + beta(t) + 1, else the max.
 */
inline std::uint64_t stabilization_bound(const Term& t, const Assignment& a)
{
    switch (t.op()) {
    case Op::Constant: return to_u64(t.value());
    case Op::Variable: return to_u64(a.at(t.name()));
    case Op::Complement: return stabilization_bound(t.child(0), a);
    case Op::Plus: return stabilization_bound(t.child(0), a) + stabilization_bound(t.child(1), a) + 1;
    case Op::Times: throw InvalidInput("stabilization_bound: × is outside the pointwise oracle's domain");
    default: return std::max(stabilization_bound(t.child(0), a), stabilization_bound(t.child(1), a));
    }
}

/** Characteristic vector of a ×-free term on [0..n), computed position by position. */
inline std::vector<bool> pointwise_prefix(const Term& t, const Assignment& a, std::uint64_t n)
{
    std::vector<bool> out(n, false);
    switch (t.op()) {
    case Op::Constant:
    case Op::Variable: {
        Natural v = t.op() == Op::Constant ? t.value() : a.at(t.name());
        if (v < n) out[v.convert_to<std::size_t>()] = true;
        return out;
    }
    case Op::Complement: {
        auto x = pointwise_prefix(t.child(0), a, n);
        for (std::size_t i = 0; i < n; ++i) out[i] = !x[i];
        return out;
    }
    case Op::Times: throw InvalidInput("pointwise oracle does not handle ×");
    default: break;
    }
    auto x = pointwise_prefix(t.child(0), a, n);
    auto y = pointwise_prefix(t.child(1), a, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (t.op() == Op::Union) out[i] = x[i] || y[i];
        else if (t.op() == Op::Intersect) out[i] = x[i] && y[i];
        else
            for (std::size_t j = 0; j <= i && !out[i]; ++j) out[i] = x[j] && y[i - j];
    }
    return out;
}

/** Oracle verdict for one atom; nullopt when the atom is outside every oracle's domain. */
inline std::optional<bool> oracle_atom(const Atom& atom, const Assignment& a, const std::optional<USpec>& u)
{
    auto terms_equal = [&](const Term& l, const Term& r) -> std::optional<bool> {
        OpSet ops = term_ops(l) | term_ops(r);
        if (!ops.contains(Op::Complement)) return naive_eval_term(l, a) == naive_eval_term(r, a);
        if (!ops.contains(Op::Times)) {
            std::uint64_t n = std::max(stabilization_bound(l, a), stabilization_bound(r, a)) + 2;
            return pointwise_prefix(l, a, n) == pointwise_prefix(r, a, n);
        }
        return std::nullopt;
    };
    if (auto* e = std::get_if<EqAtom>(&atom)) return terms_equal(e->lhs, e->rhs);
    if (auto* e = std::get_if<NeqAtom>(&atom)) {
        auto r = terms_equal(e->lhs, e->rhs);
        if (!r) return std::nullopt;
        return !*r;
    }
    if (auto* e = std::get_if<UAtom>(&atom)) {
        if (!u) throw InvalidInput("U atom without uspec");
        return u->contains(a.at(e->var));
    }
    const auto& t = std::get<TimesRelAtom>(atom);
    return a.at(t.x) * a.at(t.y) == a.at(t.z);
}

inline std::optional<bool> oracle_check(const CspInstance& inst, const Assignment& a)
{
    bool all = true;
    for (const auto& atom : inst.atoms) {
        auto r = oracle_atom(atom, a, inst.uspec);
        if (!r) return std::nullopt;
        if (!*r) all = false;
    }
    return all;
}

using Checker = std::function<std::optional<bool>(const CspInstance&, const Assignment&)>;

/** All satisfying assignments in [0..bound]^n, in lexicographic order. */
inline std::vector<Assignment> exhaustive_csp(const CspInstance& inst, std::uint64_t bound,
                                              const Checker& check = oracle_check, std::size_t limit = SIZE_MAX)
{
    std::vector<Assignment> out;
    const std::size_t n = inst.variables.size();
    std::vector<std::uint64_t> v(n, 0);
    for (;;) {
        Assignment a;
        for (std::size_t i = 0; i < n; ++i) a[inst.variables[i]] = v[i];
        auto r = check(inst, a);
        if (!r) throw InvalidInput("exhaustive_csp: instance outside the oracle's domain");
        if (*r) {
            out.push_back(a);
            if (out.size() >= limit) return out;
        }
        std::size_t i = n;
        while (i > 0 && v[i - 1] == bound) v[--i] = 0;
        if (i == 0) return out;
        ++v[i - 1];
    }
}

/** First satisfying assignment with every variable drawn from `values`. */
inline std::optional<Assignment> exhaustive_over(const CspInstance& inst, const std::vector<Natural>& values,
                                                 const Checker& check = oracle_check)
{
    const std::size_t n = inst.variables.size();
    std::vector<std::size_t> v(n, 0);
    for (;;) {
        Assignment a;
        for (std::size_t i = 0; i < n; ++i) a[inst.variables[i]] = values[v[i]];
        auto r = check(inst, a);
        if (!r) throw InvalidInput("exhaustive_over: instance outside the oracle's domain");
        if (*r) return a;
        std::size_t i = n;
        while (i > 0 && v[i - 1] + 1 == values.size()) v[--i] = 0;
        if (i == 0) return std::nullopt;
        ++v[i - 1];
    }
}

/** 0 and m^0..m^k: the candidates for an exponent search. */
inline std::vector<Natural> exponent_values(const Natural& m, unsigned k)
{
    std::vector<Natural> out{0};
    for (unsigned e = 0; e <= k; ++e) out.push_back(pow_natural(m, e));
    return out;
}

/** Satisfying Boolean assignment by enumeration of all 2^n. */
inline std::optional<std::vector<bool>> brute_force_sat(const Cnf& f)
{
    if (f.num_vars > 24) throw InvalidInput("brute_force_sat: too many variables");
    for (std::uint64_t m = 0; m < (1ULL << f.num_vars); ++m) {
        std::vector<bool> vals(f.num_vars);
        for (std::size_t i = 0; i < f.num_vars; ++i) vals[i] = ((m >> i) & 1U) != 0;
        if (f.satisfied_by(vals)) return vals;
    }
    return std::nullopt;
}

} // namespace skolem::testkit
