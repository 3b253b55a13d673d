#pragma once

// Constraint instances: signatures, atoms, assignments, unary-predicate
// specifications and 3CNF formulas.

#include "skolem/circuit.hpp"

#include <map>
#include <sstream>
#include <variant>

namespace skolem {

using Assignment = std::map<std::string, Natural>;

/**
 * Which operators and relations an instance may use. Tags are dash-joined
 * tokens in alphabetical order: cap, cup, neq, not, plus, times, u, xrel
 * (xrel is the ternary relation x·y=z).
 */
struct Signature {
    OpSet ops;
    bool neq = false;
    bool upred = false;
    bool times_rel = false;

    bool operator==(const Signature&) const = default;

    bool subset_of(const Signature& o) const
    {
        return ops.subset_of(o.ops) && (!neq || o.neq) && (!upred || o.upred) && (!times_rel || o.times_rel);
    }

    std::string tag() const
    {
        std::vector<std::string> toks;
        if (ops.contains(Op::Intersect)) toks.push_back("cap");
        if (ops.contains(Op::Union)) toks.push_back("cup");
        if (neq) toks.push_back("neq");
        if (ops.contains(Op::Complement)) toks.push_back("not");
        if (ops.contains(Op::Plus)) toks.push_back("plus");
        if (ops.contains(Op::Times)) toks.push_back("times");
        if (upred) toks.push_back("u");
        if (times_rel) toks.push_back("xrel");
        if (toks.empty()) return "eq";
        std::string s;
        for (std::size_t i = 0; i < toks.size(); ++i) s += (i ? "-" : "") + toks[i];
        return s;
    }

    static Signature parse(std::string_view tag)
    {
        Signature s;
        std::size_t pos = 0;
        while (pos <= tag.size()) {
            std::size_t end = tag.find('-', pos);
            if (end == std::string_view::npos) end = tag.size();
            std::string_view tok = tag.substr(pos, end - pos);
            if (tok == "cap") s.ops = s.ops.with(Op::Intersect);
            else if (tok == "cup") s.ops = s.ops.with(Op::Union);
            else if (tok == "not") s.ops = s.ops.with(Op::Complement);
            else if (tok == "plus") s.ops = s.ops.with(Op::Plus);
            else if (tok == "times") s.ops = s.ops.with(Op::Times);
            else if (tok == "neq") s.neq = true;
            else if (tok == "u") s.upred = true;
            else if (tok == "xrel") s.times_rel = true;
            else if (tok == "eq" || tok.empty()) {
            } else
                throw InvalidInput("unknown signature token '" + std::string(tok) + "'");
            pos = end + 1;
        }
        return s;
    }
};

/**
 * Unary predicate U: an explicit finite set, the powers {m, m², ...} of a
 * base m >= 2, or a union of those.
 */
class USpec {
public:
    enum class Kind { Explicit, Powers, UnionOf };

    static USpec explicit_set(std::vector<Natural> elems)
    {
        std::sort(elems.begin(), elems.end());
        elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
        for (const auto& e : elems)
            if (e < 2) throw InvalidInput("USpec: explicit elements must be >= 2, got " + e.str());
        USpec u;
        u.kind_ = Kind::Explicit;
        u.elements_ = std::move(elems);
        return u;
    }
    static USpec powers(Natural m)
    {
        if (m < 2) throw InvalidInput("USpec: powers base must be >= 2");
        USpec u;
        u.kind_ = Kind::Powers;
        u.base_ = std::move(m);
        return u;
    }
    static USpec union_of(std::vector<USpec> parts)
    {
        USpec u;
        u.kind_ = Kind::UnionOf;
        u.parts_ = std::move(parts);
        return u;
    }

    Kind kind() const { return kind_; }
    const std::vector<Natural>& elements() const { return elements_; }
    const Natural& base() const { return base_; }
    const std::vector<USpec>& parts() const { return parts_; }

    bool contains(const Natural& n) const
    {
        switch (kind_) {
        case Kind::Explicit: return std::binary_search(elements_.begin(), elements_.end(), n);
        case Kind::Powers: {
            if (n < base_) return false;
            Natural x = n;
            while (x % base_ == 0) x /= base_;
            return x == 1;
        }
        case Kind::UnionOf:
            return std::any_of(parts_.begin(), parts_.end(), [&](const USpec& p) { return p.contains(n); });
        }
        return false;
    }

    /** A base m with {m, m², ...} ⊆ U, if the spec contains a Powers component. */
    std::optional<Natural> powers_base() const
    {
        if (kind_ == Kind::Powers) return base_;
        if (kind_ == Kind::UnionOf)
            for (const auto& p : parts_)
                if (auto b = p.powers_base()) return b;
        return std::nullopt;
    }

    /** Every element of every Explicit component. */
    void explicit_elements(std::set<Natural>& out) const
    {
        if (kind_ == Kind::Explicit) out.insert(elements_.begin(), elements_.end());
        for (const auto& p : parts_) p.explicit_elements(out);
    }

    /** Text form: powers:<m> | set:<n,n,...> | parts joined by '|'. */
    std::string str() const
    {
        switch (kind_) {
        case Kind::Powers: return "powers:" + base_.str();
        case Kind::Explicit: {
            std::string s = "set:";
            for (std::size_t i = 0; i < elements_.size(); ++i) s += (i ? "," : "") + elements_[i].str();
            return s;
        }
        case Kind::UnionOf: {
            std::string s;
            for (std::size_t i = 0; i < parts_.size(); ++i) s += (i ? "|" : "") + parts_[i].str();
            return s;
        }
        }
        return {};
    }

    static USpec parse(std::string_view text)
    {
        if (text.find('|') != std::string_view::npos) {
            std::vector<USpec> parts;
            std::size_t pos = 0;
            while (pos <= text.size()) {
                std::size_t end = text.find('|', pos);
                if (end == std::string_view::npos) end = text.size();
                parts.push_back(parse(text.substr(pos, end - pos)));
                pos = end + 1;
            }
            return union_of(std::move(parts));
        }
        auto colon = text.find(':');
        if (colon == std::string_view::npos) throw InvalidInput("USpec: expected powers:<m> or set:<list>");
        std::string_view kind = text.substr(0, colon);
        std::string_view rest = text.substr(colon + 1);
        if (kind == "powers") {
            auto m = parse_natural(rest);
            if (!m) throw InvalidInput("USpec: bad powers base '" + std::string(rest) + "'");
            return powers(*m);
        }
        if (kind == "set") {
            std::vector<Natural> elems;
            std::size_t pos = 0;
            while (pos < rest.size()) {
                std::size_t end = rest.find(',', pos);
                if (end == std::string_view::npos) end = rest.size();
                auto n = parse_natural(rest.substr(pos, end - pos));
                if (!n) throw InvalidInput("USpec: bad set element '" + std::string(rest.substr(pos, end - pos)) + "'");
                elems.push_back(*n);
                pos = end + 1;
            }
            return explicit_set(std::move(elems));
        }
        throw InvalidInput("USpec: unknown kind '" + std::string(kind) + "'");
    }

    bool operator==(const USpec&) const = default;

private:
    Kind kind_ = Kind::Explicit;
    std::vector<Natural> elements_;
    Natural base_ = 0;
    std::vector<USpec> parts_;
};

struct EqAtom {
    Term lhs, rhs;
    bool operator==(const EqAtom&) const = default;
};
struct NeqAtom {
    Term lhs, rhs;
    bool operator==(const NeqAtom&) const = default;
};
struct UAtom {
    std::string var;
    bool operator==(const UAtom&) const = default;
};
struct TimesRelAtom {
    std::string x, y, z;
    bool operator==(const TimesRelAtom&) const = default;
};

using Atom = std::variant<EqAtom, NeqAtom, UAtom, TimesRelAtom>;

struct CspInstance {
    std::vector<std::string> variables;
    std::vector<Atom> atoms;
    Signature signature;
    std::optional<USpec> uspec;

    bool operator==(const CspInstance&) const = default;
};

/** Smallest signature that admits every atom of the instance. */
inline Signature infer_signature(const std::vector<Atom>& atoms)
{
    Signature s;
    for (const Atom& a : atoms) {
        std::visit(
            [&](const auto& at) {
                using T = std::decay_t<decltype(at)>;
                if constexpr (std::is_same_v<T, EqAtom>) {
                    s.ops = s.ops | term_ops(at.lhs) | term_ops(at.rhs);
                } else if constexpr (std::is_same_v<T, NeqAtom>) {
                    s.neq = true;
                    s.ops = s.ops | term_ops(at.lhs) | term_ops(at.rhs);
                } else if constexpr (std::is_same_v<T, UAtom>) {
                    s.upred = true;
                } else {
                    s.times_rel = true;
                }
            },
            a);
    }
    return s;
}

inline std::vector<std::string> atom_variables(const Atom& a)
{
    return std::visit(
        [](const auto& at) -> std::vector<std::string> {
            using T = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<T, EqAtom> || std::is_same_v<T, NeqAtom>) {
                auto v = term_variables(at.lhs);
                for (auto& n : term_variables(at.rhs))
                    if (std::find(v.begin(), v.end(), n) == v.end()) v.push_back(n);
                return v;
            } else if constexpr (std::is_same_v<T, UAtom>) {
                return {at.var};
            } else {
                return {at.x, at.y, at.z};
            }
        },
        a);
}

/** Problems with the instance; empty when every invariant holds. */
inline std::vector<std::string> validate_instance(const CspInstance& inst)
{
    std::vector<std::string> out;
    std::set<std::string> declared(inst.variables.begin(), inst.variables.end());
    if (declared.size() != inst.variables.size()) out.push_back("duplicate variable declaration");
    for (std::size_t i = 0; i < inst.atoms.size(); ++i) {
        for (const auto& v : atom_variables(inst.atoms[i]))
            if (!declared.count(v)) out.push_back("atom " + std::to_string(i + 1) + " uses undeclared variable '" + v + "'");
    }
    Signature used = infer_signature(inst.atoms);
    if (!used.subset_of(inst.signature))
        out.push_back("atoms need signature '" + used.tag() + "' but instance declares '" + inst.signature.tag() + "'");
    if (used.upred && !inst.uspec) out.push_back("U atoms present but no uspec given");
    return out;
}

inline void require_valid(const CspInstance& inst)
{
    auto v = validate_instance(inst);
    if (!v.empty()) {
        if (v.front().find("signature") != std::string::npos) throw SignatureViolation(v.front());
        throw InvalidInput(v.front());
    }
}

inline std::size_t instance_size(const CspInstance& inst)
{
    std::size_t n = inst.variables.size();
    for (const Atom& a : inst.atoms) {
        std::visit(
            [&](const auto& at) {
                using T = std::decay_t<decltype(at)>;
                if constexpr (std::is_same_v<T, EqAtom> || std::is_same_v<T, NeqAtom>) {
                    std::set<const Term::Node*> seen;
                    n += 1 + term_dag_size(at.lhs, seen) + term_dag_size(at.rhs, seen);
                } else {
                    n += 1;
                }
            },
            a);
    }
    return n;
}

/** A CNF with literals in DIMACS convention: ±(i+1) for variable i. */
struct Cnf {
    std::size_t num_vars = 0;
    std::vector<std::vector<int>> clauses;

    bool satisfied_by(const std::vector<bool>& values) const
    {
        for (const auto& cl : clauses) {
            bool sat = false;
            for (int lit : cl) {
                bool v = values.at(static_cast<std::size_t>(std::abs(lit)) - 1);
                if ((lit > 0) == v) {
                    sat = true;
                    break;
                }
            }
            if (!sat) return false;
        }
        return true;
    }

    bool operator==(const Cnf&) const = default;
};

inline std::string cnf_var_name(std::size_t i) { return "x" + std::to_string(i + 1); }

} // namespace skolem
