#pragma once

// Circuit satisfiability as a sentence of Skolem arithmetic.
//
// φ_k(a, i_k, v_k, b_k) says: if i_k names a gate j ≤ k and b_k ∈ {0,1},
// then (v_k ∈ I(g_j)) ⇔ (b_k = 1). Gate k either handles i_k = k itself,
// delegating to a predecessor through φ_{k-1}, or copies (i, v, b) down.

#include "skolem/fo_formula.hpp"
#include "skolem/reductions.hpp"

namespace skolem {

/** Every ∩ gate replaced by ¬(¬a ∪ ¬b). */
inline Circuit eliminate_cap(const Circuit& c)
{
    require_valid(c);
    CircuitBuilder b;
    std::vector<std::size_t> map(c.size() + 1, 0);
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        switch (g.op) {
        case Op::Constant: map[k] = b.constant(g.value); break;
        case Op::Variable: map[k] = b.variable(g.name); break;
        case Op::Complement: map[k] = b.complement(map[g.preds[0]]); break;
        case Op::Intersect: {
            std::size_t na = b.complement(map[g.preds[0]]);
            std::size_t nb = b.complement(map[g.preds[1]]);
            map[k] = b.complement(b.binary(Op::Union, na, nb));
            break;
        }
        default: map[k] = b.binary(g.op, map[g.preds[0]], map[g.preds[1]]); break;
        }
    }
    return b.build(map[c.output()]);
}

/** Quantified variable for the value of the input named `name`. */
inline std::string input_var(const std::string& name) { return "a_" + name; }

namespace detail {

inline std::string idx(const char* base, std::size_t k) { return base + std::to_string(k); }

inline Fo gate_formula(const Circuit& c, std::size_t k, const Fo& prev)
{
    using namespace fo;
    const Gate& g = c.gate(k);
    const std::string ik = idx("i", k), vk = idx("v", k), bk = idx("b", k);
    const std::string ip = idx("i", k - 1), vp = idx("v", k - 1), bp = idx("b", k - 1);
    const Natural K = k;
    Fo here = eq_var(ik, K);
    Fo copy = Fo::implies(neq(var(ik), num(K)), Fo::conj({eq_vars(ip, ik), eq_vars(vp, vk), eq_vars(bp, bk)}));
    auto route = [&](std::size_t p, const std::string& value, Fo bit) {
        return std::vector<Fo>{eq_var(ip, p), eq_vars(vp, value), bit};
    };
    std::vector<std::string> ivb{ip, vp, bp};

    switch (g.op) {
    case Op::Constant:
    case Op::Variable: {
        Factor x = g.op == Op::Constant ? num(g.value) : var(input_var(g.name));
        Fo body = Fo::conj({
            Fo::implies(Fo::conj({here, eq_var(bk, 0)}), Fo::conj({neq(x, var(vk)), eq_var(ip, 0)})),
            Fo::implies(Fo::conj({here, eq_var(bk, 1)}), Fo::conj({eq(x, var(vk)), eq_var(ip, 0)})),
            copy,
            prev,
        });
        return Fo::exists(ivb, body);
    }
    case Op::Complement: {
        std::size_t p = g.preds[0];
        Fo body = Fo::conj({
            Fo::implies(here, Fo::conj({eq_var(ip, p), eq_vars(vp, vk),
                                        Fo::implies(eq_var(bk, 1), eq_var(bp, 0)),
                                        Fo::implies(eq_var(bk, 0), eq_var(bp, 1))})),
            copy,
            prev,
        });
        return Fo::exists(ivb, body);
    }
    case Op::Union: {
        std::size_t p = g.preds[0], q = g.preds[1];
        const std::string fk = idx("f", k), hk = idx("h", k), ek = idx("e", k);
        Fo body = Fo::conj({
            Fo::implies(Fo::conj({here, eq_var(ek, 0)}), Fo::conj(route(p, vk, eq_vars(bp, fk)))),
            Fo::implies(Fo::conj({here, neq(var(ek), num(0))}), Fo::conj(route(q, vk, eq_vars(bp, hk)))),
            Fo::implies(Fo::conj({here, eq_var(bk, 1)}), Fo::disj({eq_var(fk, 1), eq_var(hk, 1)})),
            Fo::implies(Fo::conj({here, eq_var(bk, 0)}), Fo::conj({eq_var(fk, 0), eq_var(hk, 0)})),
            copy,
            prev,
        });
        return Fo::exists({fk, hk}, Fo::forall({ek}, Fo::exists(ivb, body)));
    }
    case Op::Times: {
        std::size_t p = g.preds[0], q = g.preds[1];
        const std::string fk = idx("f", k), fpk = idx("fp", k), ek = idx("e", k);
        const std::string hk = idx("h", k), hpk = idx("hp", k), dk = idx("d", k);
        Fo ff = Fo::eq({var(fk), var(fpk)}, {var(vk)});
        Fo hh = Fo::eq({var(hk), var(hpk)}, {var(vk)});
        std::vector<Fo> p1 = route(p, fk, eq_var(bp, 1)), q1 = route(q, fpk, eq_var(bp, 1));
        p1.insert(p1.begin(), ff);
        q1.insert(q1.begin(), ff);
        Fo body = Fo::conj({
            Fo::implies(Fo::conj({here, eq_var(bk, 1), eq_var(ek, 0)}), Fo::conj(p1)),
            Fo::implies(Fo::conj({here, eq_var(bk, 1), neq(var(ek), num(0))}), Fo::conj(q1)),
            Fo::implies(Fo::conj({here, eq_var(bk, 0), hh, eq_var(dk, 0)}), Fo::conj(route(p, hk, eq_var(bp, 0)))),
            Fo::implies(Fo::conj({here, eq_var(bk, 0), hh, neq(var(dk), num(0))}),
                        Fo::conj(route(q, hpk, eq_var(bp, 0)))),
            copy,
            prev,
        });
        return Fo::exists({fk, fpk},
                          Fo::forall({ek}, Fo::forall({hk, hpk}, Fo::exists({dk}, Fo::exists(ivb, body)))));
    }
    case Op::Intersect: throw InvalidInput("compile_circuit: ∩ gate " + std::to_string(k) + " (run eliminate_cap first)");
    case Op::Plus: throw SignatureViolation("compile_circuit: + is not expressible in Skolem arithmetic");
    }
    throw InternalInvariant("gate_formula: unhandled operator");
}

} // namespace detail

/** φ_r with free variables a_*, i_r, v_r, b_r. */
inline Fo gate_formulas(const Circuit& c)
{
    using namespace fo;
    require_valid(c);
    // φ_0: true, but mentioning every input so that all of them are free.
    Product all;
    for (const auto& n : input_names(c)) all.push_back(var(input_var(n)));
    all.push_back(var("i0"));
    all.push_back(var("v0"));
    Fo phi = Fo::disj({eq_var("b0", 1), Fo::negate(eq_var("b0", 1)), Fo::eq(all, {num(0)})});
    for (std::size_t k = 1; k <= c.size(); ++k) phi = detail::gate_formula(c, k, phi);
    return phi;
}

/** ∃a φ_r(a, r, v, 1): true iff some input assignment puts v into the output. */
inline Fo compile_circuit(const Circuit& c, const Natural& v)
{
    require_valid(c);
    if (c.output() != c.size()) {
        // Gates after the output are irrelevant; φ_r must start at the output.
        CircuitBuilder b;
        for (std::size_t k = 1; k <= c.output(); ++k) {
            const Gate& g = c.gate(k);
            if (g.op == Op::Constant) b.constant(g.value);
            else if (g.op == Op::Variable) b.variable(g.name);
            else if (g.op == Op::Complement) b.complement(g.preds[0]);
            else b.binary(g.op, g.preds[0], g.preds[1]);
        }
        return compile_circuit(b.build(c.output()), v);
    }
    const std::size_t r = c.size();
    Fo phi = substitute(gate_formulas(c),
                        {{detail::idx("i", r), Natural(r)}, {detail::idx("v", r), v}, {detail::idx("b", r), Natural(1)}});
    std::vector<std::string> inputs;
    for (const auto& n : input_names(c)) inputs.push_back(input_var(n));
    return inputs.empty() ? phi : Fo::exists(inputs, phi);
}

/** Through the CSP-to-SC reduction with target 0. */
inline Fo csp_to_sentence(const CspInstance& inst)
{
    ScInstance sc = csp_to_sc(inst);
    return compile_circuit(eliminate_cap(sc.circuit), sc.target);
}

/** Quantifier bound for agreement checks: max(4, v, gate count) + 2. */
inline std::uint64_t agreement_bound(const Circuit& c, const Natural& v)
{
    Natural q = std::max({Natural(4), v, Natural(c.size())}) + 2;
    return q.convert_to<std::uint64_t>();
}

} // namespace skolem
