#pragma once

// Circuits and terms over {constant, variable, -, ∪, ∩, +, ×}. Gates are
// numbered 1..r and every predecessor index is strictly smaller than the
// gate that uses it.

#include "skolem/natural.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace skolem {

enum class Op : std::uint8_t { Constant, Variable, Complement, Union, Intersect, Plus, Times };

/** Set of operators, used for signatures and "which operators does this use". */
class OpSet {
public:
    constexpr OpSet() = default;
    constexpr OpSet(std::initializer_list<Op> ops)
    {
        for (Op op : ops) bits_ |= bit(op);
    }

    constexpr bool contains(Op op) const { return (bits_ & bit(op)) != 0; }
    constexpr OpSet with(Op op) const
    {
        OpSet r = *this;
        r.bits_ |= bit(op);
        return r;
    }
    constexpr bool subset_of(OpSet other) const { return (bits_ & ~other.bits_) == 0; }
    constexpr OpSet operator|(OpSet o) const
    {
        OpSet r;
        r.bits_ = bits_ | o.bits_;
        return r;
    }
    constexpr bool operator==(const OpSet&) const = default;

private:
    static constexpr std::uint8_t bit(Op op) { return static_cast<std::uint8_t>(1U << static_cast<unsigned>(op)); }
    std::uint8_t bits_ = 0;
};

/** The five set operators; constants and variables are always allowed. */
inline constexpr OpSet kAllOperators{Op::Complement, Op::Union, Op::Intersect, Op::Plus, Op::Times};

constexpr int arity(Op op)
{
    switch (op) {
    case Op::Constant:
    case Op::Variable: return 0;
    case Op::Complement: return 1;
    default: return 2;
    }
}

inline std::string_view op_keyword(Op op)
{
    switch (op) {
    case Op::Constant: return "const";
    case Op::Variable: return "var";
    case Op::Complement: return "not";
    case Op::Union: return "union";
    case Op::Intersect: return "inter";
    case Op::Plus: return "plus";
    case Op::Times: return "times";
    }
    return "?";
}

inline std::optional<Op> op_from_keyword(std::string_view kw)
{
    for (Op op : {Op::Constant, Op::Variable, Op::Complement, Op::Union, Op::Intersect, Op::Plus, Op::Times})
        if (op_keyword(op) == kw) return op;
    return std::nullopt;
}

struct Gate {
    Op op = Op::Constant;
    Natural value;                   // Constant payload
    std::string name;                // Variable name
    std::vector<std::size_t> preds;  // 1-based predecessor indices

    bool operator==(const Gate&) const = default;
};

class Circuit {
public:
    Circuit() = default;
    Circuit(std::vector<Gate> gates, std::size_t output) : gates_(std::move(gates)), output_(output) {}

    std::size_t size() const { return gates_.size(); }
    std::size_t output() const { return output_; }
    const Gate& gate(std::size_t index) const { return gates_.at(index - 1); }
    std::span<const Gate> gates() const { return gates_; }

    bool operator==(const Circuit&) const = default;

private:
    std::vector<Gate> gates_;
    std::size_t output_ = 0;
};

class CircuitBuilder {
public:
    std::size_t constant(Natural n)
    {
        Gate g;
        g.op = Op::Constant;
        g.value = std::move(n);
        return push(std::move(g));
    }
    std::size_t variable(std::string name)
    {
        Gate g;
        g.op = Op::Variable;
        g.name = std::move(name);
        return push(std::move(g));
    }
    std::size_t complement(std::size_t p) { return push(Gate{Op::Complement, 0, {}, {p}}); }
    std::size_t binary(Op op, std::size_t p, std::size_t q) { return push(Gate{op, 0, {}, {p, q}}); }
    std::size_t size() const { return gates_.size(); }

    Circuit build(std::size_t output) const { return Circuit(gates_, output); }

private:
    std::size_t push(Gate g)
    {
        gates_.push_back(std::move(g));
        return gates_.size();
    }
    std::vector<Gate> gates_;
};

struct Violation {
    std::size_t gate = 0;  // 0 when the violation concerns the circuit as a whole
    std::string what;
};

inline std::vector<Violation> validate_circuit(const Circuit& c)
{
    std::vector<Violation> out;
    if (c.size() == 0) out.push_back({0, "circuit has no gates"});
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        if (static_cast<int>(g.preds.size()) != arity(g.op))
            out.push_back({k, "arity violation: " + std::string(op_keyword(g.op)) + " expects " +
                                  std::to_string(arity(g.op)) + " predecessors, has " +
                                  std::to_string(g.preds.size())});
        for (std::size_t p : g.preds)
            if (p == 0 || p >= k)
                out.push_back({k, "topology violation: predecessor " + std::to_string(p) +
                                      " is not a smaller gate index"});
        if (g.op == Op::Constant && g.value < 0) out.push_back({k, "negative constant"});
        if (g.op == Op::Variable && g.name.empty()) out.push_back({k, "variable without a name"});
    }
    if (c.output() == 0 || c.output() > c.size())
        out.push_back({0, "output index " + std::to_string(c.output()) + " is not a gate"});
    return out;
}

inline void require_valid(const Circuit& c)
{
    auto v = validate_circuit(c);
    if (!v.empty()) {
        std::string msg = "invalid circuit";
        if (v.front().gate != 0) msg += " at gate " + std::to_string(v.front().gate);
        throw InvalidInput(msg + ": " + v.front().what);
    }
}

/** Variable gates in ascending index order. */
inline std::vector<std::size_t> free_inputs(const Circuit& c)
{
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= c.size(); ++k)
        if (c.gate(k).op == Op::Variable) out.push_back(k);
    return out;
}

/** Distinct variable names in order of first occurrence. */
inline std::vector<std::string> input_names(const Circuit& c)
{
    std::vector<std::string> names;
    for (std::size_t k : free_inputs(c)) {
        const auto& n = c.gate(k).name;
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
    return names;
}

inline OpSet ops_used(const Circuit& c)
{
    OpSet s;
    for (const Gate& g : c.gates())
        if (arity(g.op) > 0) s = s.with(g.op);
    return s;
}

inline std::vector<std::size_t> outdegrees(const Circuit& c)
{
    std::vector<std::size_t> deg(c.size() + 1, 0);
    for (const Gate& g : c.gates())
        for (std::size_t p : g.preds) ++deg.at(p);
    return deg;
}

/** A formula is a circuit whose gates all have outdegree at most one. */
inline bool is_formula(const Circuit& c)
{
    auto deg = outdegrees(c);
    return std::all_of(deg.begin(), deg.end(), [](std::size_t d) { return d <= 1; });
}

/** True iff every gate has a path to the output gate. */
inline bool is_connected_to_output(const Circuit& c)
{
    std::vector<bool> reach(c.size() + 1, false);
    reach.at(c.output()) = true;
    for (std::size_t k = c.size(); k >= 1; --k) {
        if (!reach[k]) continue;
        for (std::size_t p : c.gate(k).preds) reach[p] = true;
    }
    for (std::size_t k = 1; k <= c.size(); ++k)
        if (!reach[k]) return false;
    return true;
}

inline Natural max_constant(const Circuit& c)
{
    Natural m = 0;
    for (const Gate& g : c.gates())
        if (g.op == Op::Constant && g.value > m) m = g.value;
    return m;
}

// ---------------------------------------------------------------------------
// Terms

/** Immutable syntax tree; copies share structure. */
class Term {
public:
    struct Node {
        Op op = Op::Constant;
        Natural value;
        std::string name;
        std::vector<Term> children;
    };

    Term() : Term(constant(0)) {}

    static Term constant(Natural n)
    {
        auto node = std::make_shared<Node>();
        node->op = Op::Constant;
        node->value = std::move(n);
        return Term(std::move(node));
    }
    static Term var(std::string name)
    {
        auto node = std::make_shared<Node>();
        node->op = Op::Variable;
        node->name = std::move(name);
        return Term(std::move(node));
    }
    static Term complement(Term t)
    {
        auto node = std::make_shared<Node>();
        node->op = Op::Complement;
        node->children.push_back(std::move(t));
        return Term(std::move(node));
    }
    static Term binary(Op op, Term a, Term b)
    {
        if (arity(op) != 2) throw InvalidInput("Term::binary: operator is not binary");
        auto node = std::make_shared<Node>();
        node->op = op;
        node->children.push_back(std::move(a));
        node->children.push_back(std::move(b));
        return Term(std::move(node));
    }
    static Term unite(Term a, Term b) { return binary(Op::Union, std::move(a), std::move(b)); }
    static Term intersect(Term a, Term b) { return binary(Op::Intersect, std::move(a), std::move(b)); }
    static Term plus(Term a, Term b) { return binary(Op::Plus, std::move(a), std::move(b)); }
    static Term times(Term a, Term b) { return binary(Op::Times, std::move(a), std::move(b)); }

    Op op() const { return node_->op; }
    const Natural& value() const { return node_->value; }
    const std::string& name() const { return node_->name; }
    const std::vector<Term>& children() const { return node_->children; }
    const Term& child(std::size_t i) const { return node_->children.at(i); }
    const Node* identity() const { return node_.get(); }

    friend bool operator==(const Term& a, const Term& b)
    {
        if (a.node_ == b.node_) return true;
        return a.op() == b.op() && a.value() == b.value() && a.name() == b.name() && a.children() == b.children();
    }

private:
    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

namespace detail {
inline void collect_vars(const Term& t, std::vector<std::string>& out)
{
    if (t.op() == Op::Variable) {
        if (std::find(out.begin(), out.end(), t.name()) == out.end()) out.push_back(t.name());
        return;
    }
    for (const Term& c : t.children()) collect_vars(c, out);
}
} // namespace detail

/** Distinct variables in left-to-right first-occurrence order. */
inline std::vector<std::string> term_variables(const Term& t)
{
    std::vector<std::string> out;
    detail::collect_vars(t, out);
    return out;
}

inline void term_constants(const Term& t, std::set<Natural>& out)
{
    if (t.op() == Op::Constant) out.insert(t.value());
    for (const Term& c : t.children()) term_constants(c, out);
}

inline OpSet term_ops(const Term& t)
{
    OpSet s;
    if (arity(t.op()) > 0) s = s.with(t.op());
    for (const Term& c : t.children()) s = s | term_ops(c);
    return s;
}

/** Node count of the tree (shared subterms counted once per occurrence). */
inline std::size_t term_size(const Term& t)
{
    std::size_t n = 1;
    for (const Term& c : t.children()) n += term_size(c);
    return n;
}

/** Node count with physically shared subterms counted once. */
inline std::size_t term_dag_size(const Term& t, std::set<const Term::Node*>& seen)
{
    if (!seen.insert(t.identity()).second) return 0;
    std::size_t n = 1;
    for (const Term& c : t.children()) n += term_dag_size(c, seen);
    return n;
}

inline std::size_t term_depth(const Term& t)
{
    std::size_t d = 0;
    for (const Term& c : t.children()) d = std::max(d, term_depth(c));
    return d + 1;
}

namespace detail {
inline std::size_t emit_term(const Term& t, CircuitBuilder& b)
{
    switch (t.op()) {
    case Op::Constant: return b.constant(t.value());
    case Op::Variable: return b.variable(t.name());
    case Op::Complement: {
        std::size_t p = emit_term(t.child(0), b);
        return b.complement(p);
    }
    default: {
        std::size_t p = emit_term(t.child(0), b);
        std::size_t q = emit_term(t.child(1), b);
        return b.binary(t.op(), p, q);
    }
    }
}
} // namespace detail

/** Tree-shaped circuit, one gate per term node, postorder numbering. */
inline Circuit term_to_circuit(const Term& t)
{
    CircuitBuilder b;
    std::size_t out = detail::emit_term(t, b);
    return b.build(out);
}

/** Unfolds the DAG below `gate` into a term (exponential for deeply shared DAGs). */
inline Term gate_to_term(const Circuit& c, std::size_t gate)
{
    std::unordered_map<std::size_t, Term> memo;
    auto rec = [&](auto&& self, std::size_t k) -> Term {
        if (auto it = memo.find(k); it != memo.end()) return it->second;
        const Gate& g = c.gate(k);
        Term t;
        switch (g.op) {
        case Op::Constant: t = Term::constant(g.value); break;
        case Op::Variable: t = Term::var(g.name); break;
        case Op::Complement: t = Term::complement(self(self, g.preds[0])); break;
        default: t = Term::binary(g.op, self(self, g.preds[0]), self(self, g.preds[1])); break;
        }
        memo.emplace(k, t);
        return t;
    };
    return rec(rec, gate);
}

inline Term circuit_to_term(const Circuit& c)
{
    require_valid(c);
    return gate_to_term(c, c.output());
}

} // namespace skolem
