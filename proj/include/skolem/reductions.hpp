#pragma once

// Instance-to-instance reductions with witness transport in both directions.

#include "skolem/func_csp.hpp"

namespace skolem {

// ---------------------------------------------------------------------------
// Formula equivalence to CSP

/** F1 = F2 as a single-atom instance; both circuits must be formulas. */
inline CspInstance ef_to_csp(const Circuit& f1, const Circuit& f2)
{
    require_valid(f1);
    require_valid(f2);
    if (!is_formula(f1) || !is_formula(f2)) throw InvalidInput("ef_to_csp: inputs must be formulas (outdegree <= 1)");
    CspInstance inst;
    inst.variables = input_names(f1);
    for (const auto& v : input_names(f2))
        if (std::find(inst.variables.begin(), inst.variables.end(), v) == inst.variables.end())
            inst.variables.push_back(v);
    inst.atoms.push_back(EqAtom{circuit_to_term(f1), circuit_to_term(f2)});
    inst.signature = infer_signature(inst.atoms);
    return inst;
}

// ---------------------------------------------------------------------------
// CSP(−,∪,∩,×) to SC: 0 ∈ ¬(0 · ⋃ symmetric differences) iff all atoms hold

struct ScInstance {
    Circuit circuit;
    Natural target = 0;
};

inline ScInstance csp_to_sc(const CspInstance& inst)
{
    require_valid(inst);
    if (!inst.signature.ops.subset_of(OpSet{Op::Complement, Op::Union, Op::Intersect, Op::Times}) || inst.signature.upred ||
        inst.signature.times_rel)
        throw SignatureViolation("csp_to_sc: unsupported signature '" + inst.signature.tag() + "'");
    std::optional<Term> all;
    for (const auto& atom : inst.atoms) {
        auto* e = std::get_if<EqAtom>(&atom);
        if (!e) throw InvalidInput("csp_to_sc: only equality atoms are allowed");
        Term diff = Term::unite(Term::intersect(e->lhs, Term::complement(e->rhs)),
                                Term::intersect(Term::complement(e->lhs), e->rhs));
        all = all ? Term::unite(*all, diff) : diff;
    }
    if (!all) all = Term::intersect(Term::constant(0), Term::constant(1));  // ∅
    Term c = Term::complement(Term::times(Term::constant(0), *all));
    return {term_to_circuit(c), 0};
}

/** Inputs of the SC circuit are the instance's variables, so witnesses carry over unchanged. */
inline Assignment csp_witness_to_sc(const CspInstance& inst, const Assignment& a)
{
    Assignment out;
    for (const auto& v : inst.variables) out[v] = detail::lookup(a, v);
    return out;
}

// ---------------------------------------------------------------------------
// CSP(−,∪,∩,+) to CSP(−,∪,∩,×) via exponents

/** A term whose value is {2^i : i ∈ ℕ}. */
inline Term q_term()
{
    auto c = [](unsigned n) { return Term::constant(n); };
    Term zero_one = Term::unite(c(0), c(1));
    Term not01 = Term::complement(zero_one);
    Term composites = Term::times(not01, Term::complement(Term::unite(c(0), c(1))));
    Term non_composites = Term::complement(composites);
    Term odd_primes = Term::intersect(non_composites, Term::complement(Term::unite(Term::unite(c(0), c(1)), c(2))));
    Term naturals = Term::complement(Term::intersect(c(0), c(1)));
    return Term::complement(Term::times(odd_primes, naturals));
}

struct PlusToTimes {
    CspInstance intermediate;  // constants eliminated, still over +
    CspInstance output;        // over {−,∪,∩,×}
    std::vector<std::string> chain;                    // w0..wl
    std::vector<std::pair<std::string, Natural>> consts;  // fresh variable per eliminated constant
};

namespace detail {
inline std::string fresh_name(const std::set<std::string>& taken, const std::string& base)
{
    std::string n = base;
    while (taken.count(n)) n = "_" + n;
    return n;
}

inline Term replace_constants(const Term& t, const std::map<Natural, std::string>& names)
{
    switch (t.op()) {
    case Op::Constant: {
        auto it = names.find(t.value());
        return it == names.end() ? t : Term::var(it->second);
    }
    case Op::Variable: return t;
    case Op::Complement: return Term::complement(replace_constants(t.child(0), names));
    default:
        return Term::binary(t.op(), replace_constants(t.child(0), names), replace_constants(t.child(1), names));
    }
}

inline Term exponentiate(const Term& t, const Term& q)
{
    switch (t.op()) {
    case Op::Constant: return Term::constant(Natural(1) << t.value().convert_to<unsigned>());
    case Op::Variable: return t;
    case Op::Complement: return Term::intersect(Term::complement(exponentiate(t.child(0), q)), q);
    case Op::Plus: return Term::times(exponentiate(t.child(0), q), exponentiate(t.child(1), q));
    case Op::Times: throw SignatureViolation("plus_to_times: × is not allowed in the input");
    default: return Term::binary(t.op(), exponentiate(t.child(0), q), exponentiate(t.child(1), q));
    }
}
} // namespace detail

/**
 * Constants c > 1 are replaced by a fresh z_c with a shared doubling chain
 * w0 = 1, w_{i+1} = w_i + w_i and z_c = Σ_{i ∈ bits(c)} w_i. Terms are then
 * mapped by c ↦ 2^c, + ↦ ×, ¬s ↦ ¬s ∩ q, and every variable y gets the guard
 * y ∪ q = q. One q term is shared by all occurrences.
 */
inline PlusToTimes plus_to_times(const CspInstance& inst)
{
    require_valid(inst);
    if (!inst.signature.ops.subset_of(OpSet{Op::Complement, Op::Union, Op::Intersect, Op::Plus}) ||
        inst.signature.upred || inst.signature.times_rel)
        throw SignatureViolation("plus_to_times: expected a {−,∪,∩,+} instance, got '" + inst.signature.tag() + "'");
    PlusToTimes r;
    std::set<std::string> taken(inst.variables.begin(), inst.variables.end());
    std::set<Natural> constants;
    for (const auto& atom : inst.atoms) {
        if (auto* e = std::get_if<EqAtom>(&atom)) {
            term_constants(e->lhs, constants);
            term_constants(e->rhs, constants);
        } else if (auto* e = std::get_if<NeqAtom>(&atom)) {
            term_constants(e->lhs, constants);
            term_constants(e->rhs, constants);
        }
    }
    CspInstance& mid = r.intermediate;
    mid.variables = inst.variables;
    std::map<Natural, std::string> names;
    Natural top = constants.empty() ? Natural(0) : *constants.rbegin();
    if (top > 1) {
        std::size_t l = bit_length(top) - 1;
        for (std::size_t i = 0; i <= l; ++i) {
            std::string w = detail::fresh_name(taken, "w" + std::to_string(i));
            taken.insert(w);
            r.chain.push_back(w);
            mid.variables.push_back(w);
        }
        mid.atoms.push_back(EqAtom{Term::var(r.chain[0]), Term::constant(1)});
        for (std::size_t i = 0; i < l; ++i)
            mid.atoms.push_back(
                EqAtom{Term::var(r.chain[i + 1]), Term::plus(Term::var(r.chain[i]), Term::var(r.chain[i]))});
        for (const auto& c : constants) {
            if (c <= 1) continue;
            std::string z = detail::fresh_name(taken, "z" + c.str());
            taken.insert(z);
            names[c] = z;
            r.consts.emplace_back(z, c);
            mid.variables.push_back(z);
            std::optional<Term> sum;
            for (std::size_t i = 0; i <= l; ++i)
                if (boost::multiprecision::bit_test(c, static_cast<unsigned>(i))) {
                    Term w = Term::var(r.chain[i]);
                    sum = sum ? Term::plus(*sum, w) : w;
                }
            mid.atoms.push_back(EqAtom{Term::var(z), *sum});
        }
    }
    for (const auto& atom : inst.atoms) {
        if (auto* e = std::get_if<EqAtom>(&atom))
            mid.atoms.push_back(
                EqAtom{detail::replace_constants(e->lhs, names), detail::replace_constants(e->rhs, names)});
        else {
            const auto& ne = std::get<NeqAtom>(atom);
            mid.atoms.push_back(
                NeqAtom{detail::replace_constants(ne.lhs, names), detail::replace_constants(ne.rhs, names)});
        }
    }
    mid.signature = inst.signature;
    if (!r.chain.empty()) mid.signature.ops = mid.signature.ops.with(Op::Plus);

    const Term q = q_term();
    CspInstance& out = r.output;
    out.variables = mid.variables;
    for (const auto& atom : mid.atoms) {
        if (auto* e = std::get_if<EqAtom>(&atom))
            out.atoms.push_back(EqAtom{detail::exponentiate(e->lhs, q), detail::exponentiate(e->rhs, q)});
        else {
            const auto& ne = std::get<NeqAtom>(atom);
            out.atoms.push_back(NeqAtom{detail::exponentiate(ne.lhs, q), detail::exponentiate(ne.rhs, q)});
        }
    }
    for (const auto& v : out.variables) out.atoms.push_back(EqAtom{Term::unite(Term::var(v), q), q});
    out.signature.ops = OpSet{Op::Complement, Op::Union, Op::Intersect, Op::Times};
    out.signature.neq = inst.signature.neq;
    return r;
}

/** Input witness e extended with the chain values 2^i and the eliminated constants. */
inline Assignment plus_to_times_intermediate_witness(const PlusToTimes& r, const Assignment& e)
{
    Assignment a = e;
    for (std::size_t i = 0; i < r.chain.size(); ++i) a[r.chain[i]] = Natural(1) << i;
    for (const auto& [z, c] : r.consts) a[z] = c;
    return a;
}

/** e ↦ 2^e on every variable of the output instance. */
inline Assignment plus_to_times_forward(const PlusToTimes& r, const Assignment& e)
{
    Assignment mid = plus_to_times_intermediate_witness(r, e);
    Assignment out;
    for (const auto& [k, v] : mid) {
        if (v > 1U << 16) throw InvalidInput("plus_to_times_forward: exponent too large");
        out[k] = Natural(1) << v.convert_to<unsigned>();
    }
    return out;
}

/** log2 on the original variables; nullopt if some value is not a power of two. */
inline std::optional<Assignment> plus_to_times_backward(const PlusToTimes& r, const Assignment& w,
                                                        const std::vector<std::string>& original)
{
    (void)r;
    Assignment e;
    for (const auto& v : original) {
        auto k = log2_exact(detail::lookup(w, v));
        if (!k) return std::nullopt;
        e[v] = *k;
    }
    return e;
}

// ---------------------------------------------------------------------------
// 3SAT to CSP(−,∪,∩): value 1 means true

inline Term literal_term(int lit)
{
    Term v = Term::var(cnf_var_name(static_cast<std::size_t>(std::abs(lit)) - 1));
    return lit > 0 ? v : Term::complement(v);
}

/** ∃x [t' ∩ 1 = 1] where t' is the intersection of the clause unions. */
inline CspInstance sat3_to_capcup(const Cnf& f)
{
    CspInstance inst;
    for (std::size_t i = 0; i < f.num_vars; ++i) inst.variables.push_back(cnf_var_name(i));
    std::optional<Term> conj;
    for (const auto& clause : f.clauses) {
        if (clause.size() > 3) throw InvalidInput("sat3_to_capcup: clause with more than 3 literals");
        if (clause.empty()) {
            conj = conj ? Term::intersect(*conj, Term::constant(0)) : Term::constant(0);
            continue;
        }
        Term d = literal_term(clause[0]);
        for (std::size_t k = 1; k < clause.size(); ++k) d = Term::unite(d, literal_term(clause[k]));
        conj = conj ? Term::intersect(*conj, d) : d;
    }
    Term lhs = conj ? Term::intersect(*conj, Term::constant(1)) : Term::constant(1);
    inst.atoms.push_back(EqAtom{lhs, Term::constant(1)});
    inst.signature.ops = OpSet{Op::Complement, Op::Union, Op::Intersect};
    return inst;
}

inline Assignment sat_to_capcup_witness(const std::vector<bool>& values)
{
    Assignment a;
    for (std::size_t i = 0; i < values.size(); ++i) a[cnf_var_name(i)] = values[i] ? 1 : 0;
    return a;
}

/** Values other than 1 (including those above 1) read as false. */
inline std::vector<bool> capcup_to_sat_witness(const Cnf& f, const Assignment& a)
{
    std::vector<bool> v(f.num_vars);
    for (std::size_t i = 0; i < f.num_vars; ++i) v[i] = detail::lookup(a, cnf_var_name(i)) == 1;
    return v;
}

// ---------------------------------------------------------------------------
// SC over {∩,×} or {+} to CSP: one variable per gate

inline std::string gate_var(std::size_t k) { return "g" + std::to_string(k); }

namespace detail {
inline CspInstance gates_to_csp(const Circuit& c, const Natural& b, OpSet allowed)
{
    require_valid(c);
    if (!ops_used(c).subset_of(allowed)) throw SignatureViolation("circuit uses operators outside the reduction's signature");
    CspInstance inst;
    std::map<std::string, std::size_t> first_gate;
    for (std::size_t k = 1; k <= c.size(); ++k) {
        inst.variables.push_back(gate_var(k));
        const Gate& g = c.gate(k);
        Term self = Term::var(gate_var(k));
        switch (g.op) {
        case Op::Constant: inst.atoms.push_back(EqAtom{self, Term::constant(g.value)}); break;
        case Op::Variable: {
            auto [it, inserted] = first_gate.emplace(g.name, k);
            if (!inserted) inst.atoms.push_back(EqAtom{self, Term::var(gate_var(it->second))});
            break;
        }
        case Op::Intersect:
            inst.atoms.push_back(EqAtom{self, Term::var(gate_var(g.preds[0]))});
            inst.atoms.push_back(EqAtom{self, Term::var(gate_var(g.preds[1]))});
            break;
        default:
            inst.atoms.push_back(
                EqAtom{self, Term::binary(g.op, Term::var(gate_var(g.preds[0])), Term::var(gate_var(g.preds[1])))});
            break;
        }
    }
    inst.atoms.push_back(EqAtom{Term::var(gate_var(c.output())), Term::constant(b)});
    inst.signature = infer_signature(inst.atoms);
    return inst;
}
} // namespace detail

/** Requires every gate to reach the output, so that no gate can be empty in a yes-instance. */
inline CspInstance sc_times_to_csp(const Circuit& c, const Natural& b)
{
    require_valid(c);
    if (!is_connected_to_output(c)) throw InvalidInput("sc_times_to_csp: some gate has no path to the output");
    return detail::gates_to_csp(c, b, OpSet{Op::Intersect, Op::Times});
}

inline CspInstance sc_plus_to_csp(const Circuit& c, const Natural& b)
{
    return detail::gates_to_csp(c, b, OpSet{Op::Plus});
}

/** Gate valuation of an SC witness; nullopt if some gate is not a singleton. */
inline std::optional<Assignment> sc_witness_to_gate_csp(const Circuit& c, const Assignment& inputs)
{
    auto vals = eval_exact_gates(c, inputs);
    Assignment out;
    for (std::size_t k = 1; k <= c.size(); ++k) {
        auto* f = vals[k - 1] ? std::get_if<FiniteSet>(&*vals[k - 1]) : nullptr;
        if (!f || f->elements.size() != 1) return std::nullopt;
        out[gate_var(k)] = f->elements[0];
    }
    return out;
}

/** Input values read off the variable gates of a gate-CSP witness. */
inline Assignment gate_csp_witness_to_sc(const Circuit& c, const Assignment& gates)
{
    Assignment in;
    for (std::size_t k : free_inputs(c)) in.emplace(c.gate(k).name, detail::lookup(gates, gate_var(k)));
    return in;
}

// ---------------------------------------------------------------------------
// SC by bounded input search

struct ScResult {
    Status status = Status::Unknown;
    std::optional<Assignment> inputs;
    std::size_t explored = 0;
    std::size_t unknown = 0;
};

/** Searches input values in [0..bound]; Sat is sound, NoWitnessUpTo only means none below the bound. */
inline ScResult solve_sc_bounded(const Circuit& c, const Natural& b, std::uint64_t bound)
{
    require_valid(c);
    auto names = input_names(c);
    ScResult res;
    std::vector<std::uint64_t> v(names.size(), 0);
    for (;;) {
        Assignment a;
        for (std::size_t i = 0; i < names.size(); ++i) a[names[i]] = v[i];
        ++res.explored;
        TriBool m = member(c, a, b);
        if (m == TriBool::True) {
            res.status = Status::Sat;
            res.inputs = a;
            return res;
        }
        if (m == TriBool::Unknown) ++res.unknown;
        std::size_t i = names.size();
        while (i > 0 && v[i - 1] == bound) v[--i] = 0;
        if (i == 0) break;
        ++v[i - 1];
    }
    res.status = res.unknown ? Status::Unknown : Status::NoWitnessUpTo;
    return res;
}

} // namespace skolem
