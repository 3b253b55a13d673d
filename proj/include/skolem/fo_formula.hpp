#pragma once

// First-order formulas over (ℕ; ·, =) with numerals: AST, SMT-LIB 2 text,
// JSON, and a bounded evaluator.

#include "skolem/dsl.hpp"

#include <unordered_map>

namespace skolem {

/** A variable or a numeral inside a product. */
struct Factor {
    std::string var;  // empty for numerals
    Natural num = 0;

    static Factor of_var(std::string v) { return {std::move(v), 0}; }
    static Factor of_num(Natural n) { return {{}, std::move(n)}; }
    bool is_var() const { return !var.empty(); }
    bool operator==(const Factor&) const = default;
};

using Product = std::vector<Factor>;  // never empty

enum class FoKind { Eq, Not, And, Or, Implies, Exists, Forall };

class Fo {
public:
    struct Node {
        FoKind kind = FoKind::Eq;
        Product lhs, rhs;
        std::vector<Fo> kids;
        std::vector<std::string> vars;  // bound by a quantifier
    };

    static Fo eq(Product l, Product r)
    {
        if (l.empty() || r.empty()) throw InvalidInput("Fo::eq: empty product");
        auto n = std::make_shared<Node>();
        n->kind = FoKind::Eq;
        n->lhs = std::move(l);
        n->rhs = std::move(r);
        return Fo(std::move(n));
    }
    static Fo negate(Fo f) { return make(FoKind::Not, {std::move(f)}); }
    static Fo conj(std::vector<Fo> fs) { return make(FoKind::And, std::move(fs)); }
    static Fo disj(std::vector<Fo> fs) { return make(FoKind::Or, std::move(fs)); }
    static Fo implies(Fo a, Fo b) { return make(FoKind::Implies, {std::move(a), std::move(b)}); }
    static Fo exists(std::vector<std::string> vs, Fo body) { return quant(FoKind::Exists, std::move(vs), std::move(body)); }
    static Fo forall(std::vector<std::string> vs, Fo body) { return quant(FoKind::Forall, std::move(vs), std::move(body)); }

    FoKind kind() const { return node_->kind; }
    const Product& lhs() const { return node_->lhs; }
    const Product& rhs() const { return node_->rhs; }
    const std::vector<Fo>& kids() const { return node_->kids; }
    const std::vector<std::string>& vars() const { return node_->vars; }
    const Node* identity() const { return node_.get(); }

    friend bool operator==(const Fo& a, const Fo& b)
    {
        if (a.node_ == b.node_) return true;
        return a.kind() == b.kind() && a.lhs() == b.lhs() && a.rhs() == b.rhs() && a.vars() == b.vars() &&
               a.kids() == b.kids();
    }

private:
    explicit Fo(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    static Fo make(FoKind k, std::vector<Fo> kids)
    {
        if ((k == FoKind::And || k == FoKind::Or) && kids.empty()) throw InvalidInput("Fo: empty connective");
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->kids = std::move(kids);
        return Fo(std::move(n));
    }
    static Fo quant(FoKind k, std::vector<std::string> vs, Fo body)
    {
        if (vs.empty()) throw InvalidInput("Fo: quantifier without variables");
        auto n = std::make_shared<Node>();
        n->kind = k;
        n->vars = std::move(vs);
        n->kids.push_back(std::move(body));
        return Fo(std::move(n));
    }

    std::shared_ptr<const Node> node_;
};

// Small constructors used by the compiler and tests.
namespace fo {
inline Factor var(const std::string& v) { return Factor::of_var(v); }
inline Factor num(Natural n) { return Factor::of_num(std::move(n)); }
inline Fo eq(Factor a, Factor b) { return Fo::eq({std::move(a)}, {std::move(b)}); }
inline Fo neq(Factor a, Factor b) { return Fo::negate(eq(std::move(a), std::move(b))); }
inline Fo eq_var(const std::string& v, Natural n) { return eq(var(v), num(std::move(n))); }
inline Fo eq_vars(const std::string& a, const std::string& b) { return eq(var(a), var(b)); }
} // namespace fo

// ---------------------------------------------------------------------------
// Structure

namespace detail {
inline void collect_free(const Fo& f, std::set<std::string>& bound, std::set<std::string>& out)
{
    switch (f.kind()) {
    case FoKind::Eq:
        for (const auto* side : {&f.lhs(), &f.rhs()})
            for (const auto& x : *side)
                if (x.is_var() && !bound.count(x.var)) out.insert(x.var);
        return;
    case FoKind::Exists:
    case FoKind::Forall: {
        std::vector<std::string> added;
        for (const auto& v : f.vars())
            if (bound.insert(v).second) added.push_back(v);
        collect_free(f.kids()[0], bound, out);
        for (const auto& v : added) bound.erase(v);
        return;
    }
    default:
        for (const auto& k : f.kids()) collect_free(k, bound, out);
    }
}
} // namespace detail

inline std::vector<std::string> free_variables(const Fo& f)
{
    std::set<std::string> bound, out;
    detail::collect_free(f, bound, out);
    return {out.begin(), out.end()};
}

/** Formula nodes plus product factors. */
inline std::size_t fo_size(const Fo& f)
{
    std::size_t n = 1 + f.lhs().size() + f.rhs().size() + f.vars().size();
    for (const auto& k : f.kids()) n += fo_size(k);
    return n;
}

inline std::size_t quantifier_depth(const Fo& f)
{
    std::size_t d = 0;
    for (const auto& k : f.kids()) d = std::max(d, quantifier_depth(k));
    return d + (f.kind() == FoKind::Exists || f.kind() == FoKind::Forall ? 1 : 0);
}

/** Replaces free occurrences of the given variables by numerals. */
inline Fo substitute(const Fo& f, const std::map<std::string, Natural>& s)
{
    auto sub_product = [&](const Product& p) {
        Product out = p;
        for (auto& x : out)
            if (x.is_var()) {
                auto it = s.find(x.var);
                if (it != s.end()) x = Factor::of_num(it->second);
            }
        return out;
    };
    switch (f.kind()) {
    case FoKind::Eq: return Fo::eq(sub_product(f.lhs()), sub_product(f.rhs()));
    case FoKind::Exists:
    case FoKind::Forall: {
        auto inner = s;
        for (const auto& v : f.vars()) inner.erase(v);
        Fo body = substitute(f.kids()[0], inner);
        return f.kind() == FoKind::Exists ? Fo::exists(f.vars(), body) : Fo::forall(f.vars(), body);
    }
    default: {
        std::vector<Fo> kids;
        for (const auto& k : f.kids()) kids.push_back(substitute(k, s));
        switch (f.kind()) {
        case FoKind::Not: return Fo::negate(kids[0]);
        case FoKind::And: return Fo::conj(std::move(kids));
        case FoKind::Or: return Fo::disj(std::move(kids));
        default: return Fo::implies(kids[0], kids[1]);
        }
    }
    }
}

/** True when ∃ occurs only positively and ∀ only negatively. */
inline bool is_existential(const Fo& f, bool positive = true)
{
    switch (f.kind()) {
    case FoKind::Eq: return true;
    case FoKind::Not: return is_existential(f.kids()[0], !positive);
    case FoKind::Implies: return is_existential(f.kids()[0], !positive) && is_existential(f.kids()[1], positive);
    case FoKind::Exists:
    case FoKind::Forall:
        if ((f.kind() == FoKind::Exists) != positive) return false;
        return is_existential(f.kids()[0], positive);
    default:
        return std::all_of(f.kids().begin(), f.kids().end(), [&](const Fo& k) { return is_existential(k, positive); });
    }
}

// ---------------------------------------------------------------------------
// SMT-LIB 2. Quantified variables range over Int with explicit guards:
//   (exists ((x Int) ...) (and (>= x 0) ... body))
//   (forall ((x Int) ...) (=> (and (>= x 0) ...) body))

namespace detail {
inline bool smt_simple_symbol(const std::string& s)
{
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
    static const std::string extra = "~!@$%^&*_-+=<>.?/";
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || extra.find(c) != std::string::npos;
    });
}

inline std::string smt_symbol(const std::string& s)
{
    if (smt_simple_symbol(s)) return s;
    if (s.find('|') != std::string::npos || s.find('\\') != std::string::npos)
        throw InvalidInput("variable name cannot be written as an SMT-LIB symbol: " + s);
    return "|" + s + "|";
}

inline std::string smt_product(const Product& p)
{
    auto one = [](const Factor& f) { return f.is_var() ? smt_symbol(f.var) : f.num.str(); };
    if (p.size() == 1) return one(p[0]);
    std::string s = "(*";
    for (const auto& f : p) s += " " + one(f);
    return s + ")";
}

inline void smt_write(const Fo& f, std::string& out)
{
    switch (f.kind()) {
    case FoKind::Eq: out += "(= " + smt_product(f.lhs()) + " " + smt_product(f.rhs()) + ")"; return;
    case FoKind::Not: out += "(not "; break;
    case FoKind::And: out += "(and"; break;
    case FoKind::Or: out += "(or"; break;
    case FoKind::Implies: out += "(=>"; break;
    case FoKind::Exists:
    case FoKind::Forall: {
        bool ex = f.kind() == FoKind::Exists;
        out += ex ? "(exists (" : "(forall (";
        for (std::size_t i = 0; i < f.vars().size(); ++i)
            out += (i ? " (" : "(") + smt_symbol(f.vars()[i]) + " Int)";
        out += ex ? ") (and" : ") (=> (and";
        for (const auto& v : f.vars()) out += " (>= " + smt_symbol(v) + " 0)";
        out += ex ? " " : ") ";
        smt_write(f.kids()[0], out);
        out += "))";
        return;
    }
    }
    for (std::size_t i = 0; i < f.kids().size(); ++i) {
        if (f.kind() != FoKind::Not || i) out += " ";
        smt_write(f.kids()[i], out);
    }
    out += ")";
}

struct SExpr {
    std::string atom;  // empty for lists
    std::vector<SExpr> items;
    std::size_t pos = 0;
    bool is_list() const { return atom.empty(); }
};

class SExprParser {
public:
    explicit SExprParser(std::string_view text) : text_(text) {}

    std::optional<SExpr> next()
    {
        skip();
        if (i_ >= text_.size()) return std::nullopt;
        return parse();
    }

    // 1-based line and column of an offset.
    std::pair<std::size_t, std::size_t> where(std::size_t pos) const
    {
        std::size_t line = 1, col = 1;
        for (std::size_t k = 0; k < pos && k < text_.size(); ++k) {
            if (text_[k] == '\n') ++line, col = 1;
            else ++col;
        }
        return {line, col};
    }

    [[noreturn]] void fail(std::size_t pos, const std::string& msg) const
    {
        auto [l, c] = where(pos);
        throw ParseError(l, c, msg);
    }

private:
    void skip()
    {
        while (i_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
            else if (text_[i_] == ';')
                while (i_ < text_.size() && text_[i_] != '\n') ++i_;
            else break;
        }
    }

    SExpr parse()
    {
        skip();
        if (i_ >= text_.size()) fail(i_, "unexpected end of input");
        SExpr e;
        e.pos = i_;
        char c = text_[i_];
        if (c == '(') {
            ++i_;
            for (;;) {
                skip();
                if (i_ >= text_.size()) fail(e.pos, "unbalanced '('");
                if (text_[i_] == ')') {
                    ++i_;
                    return e;
                }
                e.items.push_back(parse());
            }
        }
        if (c == ')') fail(i_, "unexpected ')'");
        if (c == '|') {
            std::size_t end = text_.find('|', i_ + 1);
            if (end == std::string_view::npos) fail(i_, "unterminated quoted symbol");
            e.atom = std::string(text_.substr(i_ + 1, end - i_ - 1));
            if (e.atom.empty()) fail(i_, "empty quoted symbol");
            i_ = end + 1;
            return e;
        }
        std::size_t start = i_;
        while (i_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[i_])) && text_[i_] != '(' &&
               text_[i_] != ')' && text_[i_] != ';')
            ++i_;
        e.atom = std::string(text_.substr(start, i_ - start));
        return e;
    }

    std::string_view text_;
    std::size_t i_ = 0;
};

class FoReader {
public:
    explicit FoReader(const SExprParser& p) : p_(p) {}

    Fo formula(const SExpr& e) const
    {
        if (!e.is_list() || e.items.empty() || e.items[0].is_list()) p_.fail(e.pos, "expected a formula");
        const std::string& head = e.items[0].atom;
        auto arity = [&](std::size_t n) {
            if (e.items.size() != n + 1) p_.fail(e.pos, "'" + head + "' expects " + std::to_string(n) + " arguments");
        };
        if (head == "=") {
            arity(2);
            return Fo::eq(product(e.items[1]), product(e.items[2]));
        }
        if (head == "not") {
            arity(1);
            return Fo::negate(formula(e.items[1]));
        }
        if (head == "=>") {
            arity(2);
            return Fo::implies(formula(e.items[1]), formula(e.items[2]));
        }
        if (head == "and" || head == "or") {
            if (e.items.size() < 2) p_.fail(e.pos, "'" + head + "' needs arguments");
            std::vector<Fo> kids;
            for (std::size_t i = 1; i < e.items.size(); ++i) kids.push_back(formula(e.items[i]));
            return head == "and" ? Fo::conj(std::move(kids)) : Fo::disj(std::move(kids));
        }
        if (head == "exists" || head == "forall") {
            arity(2);
            const SExpr& binders = e.items[1];
            if (!binders.is_list() || binders.items.empty()) p_.fail(binders.pos, "expected a binder list");
            std::vector<std::string> vars;
            for (const auto& b : binders.items) {
                if (!b.is_list() || b.items.size() != 2 || b.items[0].is_list() || b.items[1].atom != "Int")
                    p_.fail(b.pos, "expected (<name> Int)");
                vars.push_back(b.items[0].atom);
            }
            const SExpr& body = e.items[2];
            if (head == "exists") {
                // (and guards... body)
                if (!body.is_list() || body.items.size() != vars.size() + 2 || body.items[0].atom != "and")
                    p_.fail(body.pos, "expected (and <guards> <body>) under exists");
                expect_guards(body, 1, vars);
                return Fo::exists(std::move(vars), formula(body.items.back()));
            }
            if (!body.is_list() || body.items.size() != 3 || body.items[0].atom != "=>")
                p_.fail(body.pos, "expected (=> (and <guards>) <body>) under forall");
            const SExpr& guards = body.items[1];
            if (!guards.is_list() || guards.items.size() != vars.size() + 1 || guards.items[0].atom != "and")
                p_.fail(guards.pos, "expected (and <guards>)");
            expect_guards(guards, 1, vars);
            return Fo::forall(std::move(vars), formula(body.items[2]));
        }
        p_.fail(e.pos, "unknown connective '" + head + "'");
    }

private:
    void expect_guards(const SExpr& list, std::size_t from, const std::vector<std::string>& vars) const
    {
        for (std::size_t k = 0; k < vars.size(); ++k) {
            const SExpr& g = list.items[from + k];
            bool ok = g.is_list() && g.items.size() == 3 && g.items[0].atom == ">=" && g.items[1].atom == vars[k] &&
                      g.items[2].atom == "0";
            if (!ok) p_.fail(g.pos, "expected guard (>= " + vars[k] + " 0)");
        }
    }

    Factor factor(const SExpr& e) const
    {
        if (e.is_list()) p_.fail(e.pos, "expected a variable or numeral");
        if (std::isdigit(static_cast<unsigned char>(e.atom[0]))) {
            auto n = parse_natural(e.atom);
            if (!n) p_.fail(e.pos, "bad numeral '" + e.atom + "'");
            return Factor::of_num(*n);
        }
        return Factor::of_var(e.atom);
    }

    Product product(const SExpr& e) const
    {
        if (!e.is_list()) return {factor(e)};
        if (e.items.size() < 3 || e.items[0].atom != "*") p_.fail(e.pos, "expected (* <factors>)");
        Product p;
        for (std::size_t i = 1; i < e.items.size(); ++i) p.push_back(factor(e.items[i]));
        return p;
    }

    const SExprParser& p_;
};
} // namespace detail

inline std::string to_smt2(const Fo& f)
{
    std::string out;
    detail::smt_write(f, out);
    return out;
}

/** A script asserting the sentence. */
inline std::string to_smt2_script(const Fo& f) { return "(assert " + to_smt2(f) + ")\n(check-sat)\n"; }

/** Reads one formula, or the formula of the first assert in a script. */
inline Fo parse_smt2(std::string_view text)
{
    detail::SExprParser p(text);
    detail::FoReader r(p);
    std::optional<Fo> found;
    while (auto e = p.next()) {
        if (e->is_list() && !e->items.empty() && e->items[0].atom == "assert") {
            if (e->items.size() != 2) p.fail(e->pos, "assert expects one formula");
            if (!found) found = r.formula(e->items[1]);
            continue;
        }
        if (e->is_list() && !e->items.empty() && !e->items[0].is_list() &&
            (e->items[0].atom == "check-sat" || e->items[0].atom == "set-logic" || e->items[0].atom == "set-info"))
            continue;
        if (found) p.fail(e->pos, "trailing input");
        found = r.formula(*e);
    }
    if (!found) throw ParseError(1, 1, "no formula found");
    return *found;
}

// ---------------------------------------------------------------------------
// JSON

inline Json fo_to_json(const Fo& f)
{
    auto product = [](const Product& p) {
        Json a = Json::array();
        for (const auto& x : p) a.push_back(x.is_var() ? Json{{"var", x.var}} : Json{{"num", x.num.str()}});
        return a;
    };
    static const char* names[] = {"eq", "not", "and", "or", "implies", "exists", "forall"};
    Json j;
    j["kind"] = names[static_cast<int>(f.kind())];
    if (f.kind() == FoKind::Eq) {
        j["lhs"] = product(f.lhs());
        j["rhs"] = product(f.rhs());
        return j;
    }
    if (!f.vars().empty()) j["vars"] = f.vars();
    Json kids = Json::array();
    for (const auto& k : f.kids()) kids.push_back(fo_to_json(k));
    j["args"] = kids;
    return j;
}

inline Fo fo_from_json(const Json& j)
{
    auto bad = [](const std::string& m) { return InvalidInput("formula JSON: " + m); };
    if (!j.is_object() || !j.contains("kind")) throw bad("expected an object with 'kind'");
    std::string kind = j.at("kind").get<std::string>();
    auto product = [&](const Json& a) {
        if (!a.is_array() || a.empty()) throw bad("product must be a nonempty array");
        Product p;
        for (const auto& x : a) {
            if (x.contains("var")) p.push_back(Factor::of_var(x.at("var").get<std::string>()));
            else if (x.contains("num")) {
                auto n = parse_natural(x.at("num").get<std::string>());
                if (!n) throw bad("bad numeral");
                p.push_back(Factor::of_num(*n));
            } else
                throw bad("factor needs 'var' or 'num'");
        }
        return p;
    };
    if (kind == "eq") return Fo::eq(product(j.at("lhs")), product(j.at("rhs")));
    std::vector<Fo> kids;
    for (const auto& k : j.at("args")) kids.push_back(fo_from_json(k));
    auto need = [&](std::size_t n) {
        if (kids.size() != n) throw bad("'" + kind + "' expects " + std::to_string(n) + " arguments");
    };
    if (kind == "not") return need(1), Fo::negate(kids[0]);
    if (kind == "implies") return need(2), Fo::implies(kids[0], kids[1]);
    if (kind == "and") return Fo::conj(std::move(kids));
    if (kind == "or") return Fo::disj(std::move(kids));
    if (kind == "exists" || kind == "forall") {
        need(1);
        auto vars = j.at("vars").get<std::vector<std::string>>();
        return kind == "exists" ? Fo::exists(vars, kids[0]) : Fo::forall(vars, kids[0]);
    }
    throw bad("unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Bounded evaluation over [0..Q]

struct FoVerdict {
    TriBool value = TriBool::Unknown;
    bool sound = false;  // true only for True on an existential sentence
    std::size_t evaluations = 0;
};

namespace detail {

/**
 * Quantifiers range over [0..Q]. Three-valued evaluation with unknown
 * variables lets a quantifier be skipped when its variable cannot matter;
 * existential blocks pin variables from equations under guards that already
 * hold; quantifier results are memoised on the values of their free variables.
 */
class BoundedEvaluator {
public:
    BoundedEvaluator(const Fo& f, std::uint64_t Q) : Q_(static_cast<std::int64_t>(Q))
    {
        if (Q > (1ULL << 20)) throw InvalidInput("bounded_eval_fo: Q is too large");
        root_ = compile(f, {});
    }

    TriBool run()
    {
        env_.assign(var_names_.size(), kUnknown);
        return eval(root_);
    }

    std::size_t evaluations() const { return evaluations_; }

private:
    static constexpr std::int64_t kUnknown = -1;

    struct Term {
        std::vector<int> vars;
        Natural constant = 1;
        bool zero = false;
        bool small = true;  // constant fits comfortably in 62 bits
    };

    struct Node {
        FoKind kind;
        Term lhs, rhs;
        std::vector<int> kids;
        std::vector<int> bound;
        std::vector<int> free;
        std::vector<int> occurs;  // every variable mentioned below, sorted
        std::unordered_map<std::string, TriBool> memo;
    };

    int var_id(const std::string& name, const std::map<std::string, int>& scope)
    {
        auto it = scope.find(name);
        if (it == scope.end()) throw InvalidInput("bounded_eval_fo: free variable '" + name + "'");
        return it->second;
    }

    Term compile_product(const Product& p, const std::map<std::string, int>& scope)
    {
        Term t;
        for (const auto& f : p) {
            if (f.is_var()) t.vars.push_back(var_id(f.var, scope));
            else t.constant *= f.num;
        }
        t.zero = t.constant == 0;
        t.small = t.constant < (Natural(1) << 62);
        return t;
    }

    int compile(const Fo& f, std::map<std::string, int> scope)
    {
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{f.kind(), {}, {}, {}, {}, {}, {}, {}});
        if (f.kind() == FoKind::Eq) {
            Term l = compile_product(f.lhs(), scope), r = compile_product(f.rhs(), scope);
            nodes_[id].lhs = std::move(l);
            nodes_[id].rhs = std::move(r);
        } else {
            std::vector<int> bound;
            for (const auto& v : f.vars()) {
                int vid = static_cast<int>(var_names_.size());
                var_names_.push_back(v);
                scope[v] = vid;
                bound.push_back(vid);
            }
            nodes_[id].bound = bound;
            std::vector<int> kids;
            for (const auto& k : f.kids()) kids.push_back(compile(k, scope));
            nodes_[id].kids = std::move(kids);
        }
        std::set<int> fr;
        const Node& n = nodes_[id];
        for (int v : n.lhs.vars) fr.insert(v);
        for (int v : n.rhs.vars) fr.insert(v);
        for (int k : n.kids) fr.insert(nodes_[k].free.begin(), nodes_[k].free.end());
        std::set<int> oc(fr.begin(), fr.end());
        for (int k : n.kids) oc.insert(nodes_[k].occurs.begin(), nodes_[k].occurs.end());
        for (int b : n.bound) fr.erase(b);
        nodes_[id].free.assign(fr.begin(), fr.end());
        nodes_[id].occurs.assign(oc.begin(), oc.end());
        for (int b : n.bound) domain_of(id, b);
        return id;
    }

    // A variable that only ever meets numerals in single-factor equations can
    // only be told apart by which numeral it equals, plus one value equal to none.
    void domain_of(int id, int v)
    {
        std::set<std::int64_t> seen;
        bool ok = true;
        std::vector<int> stack{id};
        while (!stack.empty() && ok) {
            const Node& n = nodes_[stack.back()];
            stack.pop_back();
            if (!std::binary_search(n.occurs.begin(), n.occurs.end(), v)) continue;
            if (n.kind != FoKind::Eq) {
                stack.insert(stack.end(), n.kids.begin(), n.kids.end());
                continue;
            }
            const Term* mine = nullptr;
            const Term* other = nullptr;
            if (n.lhs.vars.size() == 1 && n.lhs.vars[0] == v && n.lhs.constant == 1) mine = &n.lhs, other = &n.rhs;
            else if (n.rhs.vars.size() == 1 && n.rhs.vars[0] == v && n.rhs.constant == 1) mine = &n.rhs, other = &n.lhs;
            if (!mine || !other->vars.empty()) {
                ok = false;
                break;
            }
            if (other->constant <= Q_) seen.insert(other->constant.convert_to<std::int64_t>());
        }
        if (!ok) return;
        std::vector<std::int64_t> d(seen.begin(), seen.end());
        for (std::int64_t x = 0; x <= Q_; ++x)
            if (!seen.count(x)) {
                d.push_back(x);
                break;
            }
        domains_[v] = std::move(d);
    }

    // Whether v can still influence the truth of node id: occurrences under a
    // guard that is already false do not count.
    bool live(int id, int v)
    {
        const Node& n = nodes_[id];
        if (!std::binary_search(n.occurs.begin(), n.occurs.end(), v)) return false;
        switch (n.kind) {
        case FoKind::Eq: return true;
        case FoKind::Implies:
            if (eval(n.kids[0]) == TriBool::False) return false;
            return live(n.kids[0], v) || live(n.kids[1], v);
        default:
            for (int k : n.kids)
                if (live(k, v)) return true;
            return false;
        }
    }

    bool partial(const Node& n) const
    {
        return std::any_of(n.free.begin(), n.free.end(), [&](int v) { return env_[v] == kUnknown; });
    }

    // Next variable to enumerate with its candidate values; a dead variable gets
    // the single value 0.
    std::vector<std::int64_t> candidates(int id, int v)
    {
        if (!live(nodes_[id].kids[0], v)) return {0};
        auto it = domains_.find(v);
        if (it != domains_.end()) return it->second;
        std::vector<std::int64_t> all(static_cast<std::size_t>(Q_ + 1));
        for (std::int64_t x = 0; x <= Q_; ++x) all[static_cast<std::size_t>(x)] = x;
        return all;
    }

    // Value of a product; nullopt when unknown. Exact beyond 64 bits.
    std::optional<Natural> value(const Term& t) const
    {
        if (t.zero) return Natural(0);
        bool unknown = false;
        for (int v : t.vars) {
            if (env_[v] == 0) return Natural(0);
            if (env_[v] == kUnknown) unknown = true;
        }
        if (unknown) return std::nullopt;
        if (t.small) {
            unsigned __int128 acc = t.constant.convert_to<std::uint64_t>();
            bool overflow = false;
            for (int v : t.vars) {
                acc *= static_cast<std::uint64_t>(env_[v]);
                if (acc >> 100) {
                    overflow = true;
                    break;
                }
            }
            if (!overflow) {
                if (static_cast<std::uint64_t>(acc >> 64) == 0) return Natural(static_cast<std::uint64_t>(acc));
                Natural hi = static_cast<std::uint64_t>(acc >> 64);
                return (hi << 64) + static_cast<std::uint64_t>(acc);
            }
        }
        Natural acc = t.constant;
        for (int v : t.vars) acc *= env_[v];
        return acc;
    }

    TriBool eval(int id)
    {
        Node& n = nodes_[id];
        switch (n.kind) {
        case FoKind::Eq: {
            auto l = value(n.lhs), r = value(n.rhs);
            if (!l || !r) return TriBool::Unknown;
            return tri(*l == *r);
        }
        case FoKind::Not: return tri_not(eval(n.kids[0]));
        case FoKind::And: {
            TriBool acc = TriBool::True;
            for (int k : n.kids) {
                acc = tri_and(acc, eval(k));
                if (acc == TriBool::False) return acc;
            }
            return acc;
        }
        case FoKind::Or: {
            TriBool acc = TriBool::False;
            for (int k : n.kids) {
                acc = tri_or(acc, eval(k));
                if (acc == TriBool::True) return acc;
            }
            return acc;
        }
        case FoKind::Implies: {
            TriBool a = eval(n.kids[0]);
            if (a == TriBool::False) return TriBool::True;
            return tri_or(tri_not(a), eval(n.kids[1]));
        }
        default: return quantifier(id);
        }
    }

    std::string key_of(const Node& n) const
    {
        std::string k;
        k.reserve(n.free.size() * 4);
        for (int v : n.free) {
            std::int64_t x = env_[v];
            k.append(reinterpret_cast<const char*>(&x), sizeof x);
        }
        return k;
    }

    TriBool quantifier(int id)
    {
        std::string key = key_of(nodes_[id]);
        auto it = nodes_[id].memo.find(key);
        if (it != nodes_[id].memo.end()) return it->second;
        ++evaluations_;
        std::vector<int> remaining = nodes_[id].bound;
        for (int v : remaining) env_[v] = kUnknown;
        TriBool r = nodes_[id].kind == FoKind::Exists ? search_exists(id, remaining) : search_forall(id, remaining);
        for (int v : nodes_[id].bound) env_[v] = kUnknown;
        nodes_[id].memo.emplace(std::move(key), r);
        return r;
    }

    // Equations var = known value inside conjunctions and under guards that hold.
    void collect_pins(int id, const std::vector<int>& remaining, std::vector<std::pair<int, std::optional<Natural>>>& pins)
    {
        Node& n = nodes_[id];
        switch (n.kind) {
        case FoKind::And:
            for (int k : n.kids) collect_pins(k, remaining, pins);
            return;
        case FoKind::Implies:
            if (eval(n.kids[0]) == TriBool::True) collect_pins(n.kids[1], remaining, pins);
            return;
        case FoKind::Eq: {
            auto single = [&](const Term& t) -> int {
                if (t.vars.size() != 1 || t.constant != 1) return -1;
                int v = t.vars[0];
                return std::find(remaining.begin(), remaining.end(), v) != remaining.end() ? v : -1;
            };
            int lv = single(n.lhs), rv = single(n.rhs);
            if (lv >= 0 && rv < 0) {
                if (auto x = value(n.rhs)) pins.emplace_back(lv, x);
            } else if (rv >= 0 && lv < 0) {
                if (auto x = value(n.lhs)) pins.emplace_back(rv, x);
            }
            return;
        }
        default: return;
        }
    }

    TriBool search_exists(int id, std::vector<int> remaining)
    {
        const int body = nodes_[id].kids[0];
        std::vector<std::pair<int, std::optional<Natural>>> pins;
        collect_pins(body, remaining, pins);
        if (!pins.empty()) {
            std::vector<int> set;
            TriBool r = TriBool::Unknown;
            bool dead = false;
            for (const auto& [v, x] : pins) {
                if (*x > Q_) {
                    dead = true;
                    break;
                }
                auto val = x->convert_to<std::int64_t>();
                if (env_[v] != kUnknown) {
                    if (env_[v] != val) {
                        dead = true;
                        break;
                    }
                    continue;
                }
                env_[v] = val;
                set.push_back(v);
            }
            if (dead) r = TriBool::False;
            else if (!set.empty()) {
                std::vector<int> rest;
                for (int v : remaining)
                    if (std::find(set.begin(), set.end(), v) == set.end()) rest.push_back(v);
                r = search_exists(id, rest);
            }
            for (int v : set) env_[v] = kUnknown;
            if (dead || !set.empty()) return r;
        }
        TriBool r = eval(body);
        if (r != TriBool::Unknown || remaining.empty() || partial(nodes_[id])) return r;
        int v = remaining.back();
        remaining.pop_back();
        TriBool acc = TriBool::False;
        for (std::int64_t x : candidates(id, v)) {
            env_[v] = x;
            TriBool t = search_exists(id, remaining);
            if (t == TriBool::True) {
                acc = t;
                break;
            }
            if (t == TriBool::Unknown) acc = TriBool::Unknown;
        }
        env_[v] = kUnknown;
        return acc;
    }

    TriBool search_forall(int id, std::vector<int> remaining)
    {
        const int body = nodes_[id].kids[0];
        TriBool r = eval(body);
        if (r != TriBool::Unknown || remaining.empty() || partial(nodes_[id])) return r;
        int v = remaining.back();
        remaining.pop_back();
        TriBool acc = TriBool::True;
        for (std::int64_t x : candidates(id, v)) {
            env_[v] = x;
            TriBool t = search_forall(id, remaining);
            if (t == TriBool::False) {
                acc = t;
                break;
            }
            if (t == TriBool::Unknown) acc = TriBool::Unknown;
        }
        env_[v] = kUnknown;
        return acc;
    }

    std::int64_t Q_;
    int root_ = 0;
    std::vector<Node> nodes_;
    std::vector<std::string> var_names_;
    std::vector<std::int64_t> env_;
    std::map<int, std::vector<std::int64_t>> domains_;
    std::size_t evaluations_ = 0;
};

} // namespace detail

/**
 * Truth of a sentence when every quantifier ranges over [0..Q]. Only True on
 * an existential sentence transfers to ℕ; every other verdict is a bounded
 * approximation.
 */
inline FoVerdict bounded_eval_fo(const Fo& f, std::uint64_t Q)
{
    auto fv = free_variables(f);
    if (!fv.empty()) throw InvalidInput("bounded_eval_fo: formula has free variable '" + fv[0] + "'");
    detail::BoundedEvaluator ev(f, Q);
    FoVerdict v;
    v.value = ev.run();
    v.evaluations = ev.evaluations();
    v.sound = v.value == TriBool::True && is_existential(f);
    return v;
}

} // namespace skolem
