#pragma once

// Text and JSON formats for circuits and CSP instances.
//
// Circuit DSL:
//   gate <idx> = const <n> | var <name> | not <p> | union <p> <q> | inter <p> <q>
//              | plus <p> <q> | times <p> <q>
//   output <idx>
// CSP DSL:
//   vars a b c;
//   signature cap-cup-not        (optional; inferred from the atoms otherwise)
//   uspec powers:3               (optional)
//   (plus a b) = (const 3)
//   a != b
//   U(a)
//   times a b c
// '#' starts a comment in both.

#include "skolem/instance.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>

namespace skolem {

/** Parse error carrying a 1-based line and column. */
class ParseError : public InvalidInput {
public:
    ParseError(std::size_t line, std::size_t col, const std::string& msg)
        : InvalidInput("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg), line_(line),
          col_(col)
    {
    }
    std::size_t line() const { return line_; }
    std::size_t column() const { return col_; }

private:
    std::size_t line_, col_;
};

namespace detail {

struct Token {
    std::string text;
    std::size_t col = 0;  // 1-based
};

inline std::string strip_comment(const std::string& line)
{
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

// Splits on whitespace; parentheses, '=', '!=' and ';' are separate tokens.
inline std::vector<Token> tokenize(const std::string& line)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '(' || c == ')' || c == '=' || c == ';') {
            out.push_back({std::string(1, c), i + 1});
            ++i;
            continue;
        }
        if (c == '!' && i + 1 < line.size() && line[i + 1] == '=') {
            out.push_back({"!=", i + 1});
            i += 2;
            continue;
        }
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != '(' &&
               line[i] != ')' && line[i] != '=' && line[i] != ';' && line[i] != '!')
            ++i;
        if (i == start) throw ParseError(0, i + 1, "unexpected character '" + std::string(1, c) + "'");
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

inline bool is_identifier(const std::string& s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
    });
}

inline std::vector<std::string> split_lines(std::string_view text)
{
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

inline std::string read_all(std::istream& in)
{
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class TermParser {
public:
    TermParser(const std::vector<Token>& toks, std::size_t line, std::size_t pos = 0)
        : toks_(toks), line_(line), pos_(pos)
    {
    }

    Term parse()
    {
        const Token& t = next("term");
        if (t.text == "(") {
            const Token& op = next("operator");
            Term result;
            if (op.text == "const") {
                const Token& n = next("constant");
                auto v = parse_natural(n.text);
                if (!v) throw ParseError(line_, n.col, "expected a natural number, got '" + n.text + "'");
                result = Term::constant(*v);
            } else if (op.text == "var") {
                const Token& n = next("variable name");
                if (!is_identifier(n.text)) throw ParseError(line_, n.col, "bad variable name '" + n.text + "'");
                result = Term::var(n.text);
            } else if (op.text == "not") {
                result = Term::complement(parse());
            } else {
                auto o = op_from_keyword(op.text);
                if (!o || arity(*o) != 2) throw ParseError(line_, op.col, "unknown operator '" + op.text + "'");
                Term a = parse();
                Term b = parse();
                result = Term::binary(*o, a, b);
            }
            expect(")");
            return result;
        }
        if (auto v = parse_natural(t.text)) return Term::constant(*v);
        if (is_identifier(t.text)) return Term::var(t.text);
        throw ParseError(line_, t.col, "unexpected token '" + t.text + "'");
    }

    std::size_t position() const { return pos_; }

private:
    const Token& next(const char* what)
    {
        if (pos_ >= toks_.size())
            throw ParseError(line_, toks_.empty() ? 1 : toks_.back().col + toks_.back().text.size(),
                             std::string("expected ") + what);
        return toks_[pos_++];
    }
    void expect(const char* text)
    {
        const Token& t = next(text);
        if (t.text != text) throw ParseError(line_, t.col, std::string("expected '") + text + "', got '" + t.text + "'");
    }

    const std::vector<Token>& toks_;
    std::size_t line_;
    std::size_t pos_;
};

} // namespace detail

// ---------------------------------------------------------------------------
// Terms

inline std::string format_term(const Term& t)
{
    switch (t.op()) {
    case Op::Constant: return "(const " + t.value().str() + ")";
    case Op::Variable: return t.name();
    case Op::Complement: return "(not " + format_term(t.child(0)) + ")";
    default:
        return "(" + std::string(op_keyword(t.op())) + " " + format_term(t.child(0)) + " " + format_term(t.child(1)) +
               ")";
    }
}

/** Infix rendering for human-readable output. */
inline std::string pretty_term(const Term& t)
{
    switch (t.op()) {
    case Op::Constant: return t.value().str();
    case Op::Variable: return t.name();
    case Op::Complement: return "-" + pretty_term(t.child(0));
    default: {
        const char* sym = t.op() == Op::Union ? " ∪ " : t.op() == Op::Intersect ? " ∩ " : t.op() == Op::Plus ? " + " : " × ";
        return "(" + pretty_term(t.child(0)) + sym + pretty_term(t.child(1)) + ")";
    }
    }
}

inline Term parse_term(std::string_view text)
{
    auto toks = detail::tokenize(std::string(text));
    detail::TermParser p(toks, 1);
    Term t = p.parse();
    if (p.position() != toks.size()) throw ParseError(1, toks[p.position()].col, "trailing input after term");
    return t;
}

// ---------------------------------------------------------------------------
// Circuits

inline std::string format_circuit(const Circuit& c)
{
    std::string out;
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        out += "gate " + std::to_string(k) + " = " + std::string(op_keyword(g.op));
        if (g.op == Op::Constant) out += " " + g.value.str();
        else if (g.op == Op::Variable) out += " " + g.name;
        for (std::size_t p : g.preds) out += " " + std::to_string(p);
        out += "\n";
    }
    out += "output " + std::to_string(c.output()) + "\n";
    return out;
}

inline Circuit parse_circuit(std::string_view text)
{
    std::vector<Gate> gates;
    std::optional<std::size_t> output;
    auto lines = detail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::vector<detail::Token> toks;
        try {
            toks = detail::tokenize(detail::strip_comment(lines[ln]));
        } catch (const ParseError& e) {
            throw ParseError(ln + 1, e.column(), "unexpected character");
        }
        if (toks.empty()) continue;
        auto err = [&](std::size_t i, const std::string& msg) {
            std::size_t col = i < toks.size() ? toks[i].col : toks.back().col + toks.back().text.size();
            return ParseError(ln + 1, col, msg);
        };
        auto number = [&](std::size_t i) -> std::size_t {
            if (i >= toks.size()) throw err(i, "expected a gate index");
            auto v = parse_natural(toks[i].text);
            if (!v || *v > 100000000) throw err(i, "expected a gate index, got '" + toks[i].text + "'");
            return v->convert_to<std::size_t>();
        };
        if (toks[0].text == "output") {
            if (output) throw err(0, "duplicate output line");
            output = number(1);
            if (toks.size() > 2) throw err(2, "trailing tokens");
            continue;
        }
        if (toks[0].text != "gate") throw err(0, "expected 'gate' or 'output', got '" + toks[0].text + "'");
        if (output) throw err(0, "gate after output line");
        std::size_t idx = number(1);
        if (idx != gates.size() + 1)
            throw err(1, "gates must be numbered consecutively from 1; expected " + std::to_string(gates.size() + 1));
        if (toks.size() < 4 || toks[2].text != "=") throw err(2, "expected '='");
        auto op = op_from_keyword(toks[3].text);
        if (!op) throw err(3, "unknown gate kind '" + toks[3].text + "'");
        Gate g;
        g.op = *op;
        std::size_t expected = 4;
        if (*op == Op::Constant) {
            if (toks.size() < 5) throw err(4, "expected a constant");
            auto v = parse_natural(toks[4].text);
            if (!v) throw err(4, "expected a natural number, got '" + toks[4].text + "'");
            g.value = *v;
            expected = 5;
        } else if (*op == Op::Variable) {
            if (toks.size() < 5 || !detail::is_identifier(toks[4].text)) throw err(4, "expected a variable name");
            g.name = toks[4].text;
            expected = 5;
        } else {
            for (int i = 0; i < arity(*op); ++i) g.preds.push_back(number(4 + static_cast<std::size_t>(i)));
            expected = 4 + static_cast<std::size_t>(arity(*op));
        }
        if (toks.size() > expected) throw err(expected, "trailing tokens");
        gates.push_back(std::move(g));
    }
    if (!output) throw ParseError(lines.size() + 1, 1, "missing output line");
    Circuit c(std::move(gates), *output);
    auto v = validate_circuit(c);
    if (!v.empty()) {
        std::size_t line = 0;
        // Map the violating gate back to its source line.
        std::size_t seen = 0;
        for (std::size_t ln = 0; ln < lines.size() && v.front().gate; ++ln) {
            auto toks = detail::tokenize(detail::strip_comment(lines[ln]));
            if (!toks.empty() && toks[0].text == "gate" && ++seen == v.front().gate) {
                line = ln + 1;
                break;
            }
        }
        throw ParseError(line ? line : lines.size(), 1, v.front().what);
    }
    return c;
}

// ---------------------------------------------------------------------------
// CSP instances

inline std::string format_atom(const Atom& a)
{
    return std::visit(
        [](const auto& at) -> std::string {
            using T = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<T, EqAtom>) return format_term(at.lhs) + " = " + format_term(at.rhs);
            else if constexpr (std::is_same_v<T, NeqAtom>) return format_term(at.lhs) + " != " + format_term(at.rhs);
            else if constexpr (std::is_same_v<T, UAtom>) return "U(" + at.var + ")";
            else return "times " + at.x + " " + at.y + " " + at.z;
        },
        a);
}

inline std::string format_csp(const CspInstance& inst)
{
    std::string out = "vars";
    for (const auto& v : inst.variables) out += " " + v;
    out += ";\nsignature " + inst.signature.tag() + "\n";
    if (inst.uspec) out += "uspec " + inst.uspec->str() + "\n";
    for (const auto& a : inst.atoms) out += format_atom(a) + "\n";
    return out;
}

inline CspInstance parse_csp(std::string_view text)
{
    CspInstance inst;
    bool have_vars = false, have_sig = false;
    auto lines = detail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::vector<detail::Token> toks;
        try {
            toks = detail::tokenize(detail::strip_comment(lines[ln]));
        } catch (const ParseError& e) {
            throw ParseError(ln + 1, e.column(), "unexpected character");
        }
        if (toks.empty()) continue;
        auto err = [&](std::size_t i, const std::string& msg) {
            std::size_t col = i < toks.size() ? toks[i].col : toks.back().col + toks.back().text.size();
            return ParseError(ln + 1, col, msg);
        };
        const std::string& head = toks[0].text;
        if (head == "vars") {
            if (have_vars) throw err(0, "duplicate vars line");
            have_vars = true;
            std::size_t i = 1;
            for (; i < toks.size() && toks[i].text != ";"; ++i) {
                if (!detail::is_identifier(toks[i].text)) throw err(i, "bad variable name '" + toks[i].text + "'");
                inst.variables.push_back(toks[i].text);
            }
            if (i >= toks.size()) throw err(i, "expected ';' after variable list");
            if (i + 1 != toks.size()) throw err(i + 1, "trailing tokens");
            continue;
        }
        if (head == "signature") {
            if (toks.size() != 2) throw err(1, "expected a signature tag");
            try {
                inst.signature = Signature::parse(toks[1].text);
            } catch (const InvalidInput& e) {
                throw err(1, e.what());
            }
            have_sig = true;
            continue;
        }
        if (head == "uspec") {
            if (toks.size() != 2) throw err(1, "expected a uspec such as powers:3 or set:4,6");
            try {
                inst.uspec = USpec::parse(toks[1].text);
            } catch (const InvalidInput& e) {
                throw err(1, e.what());
            }
            continue;
        }
        if (head == "times" && toks.size() == 4 && detail::is_identifier(toks[1].text) &&
            detail::is_identifier(toks[2].text) && detail::is_identifier(toks[3].text)) {
            inst.atoms.push_back(TimesRelAtom{toks[1].text, toks[2].text, toks[3].text});
            continue;
        }
        if (head == "U") {
            if (toks.size() != 4 || toks[1].text != "(" || toks[3].text != ")" || !detail::is_identifier(toks[2].text))
                throw err(1, "expected U(<variable>)");
            inst.atoms.push_back(UAtom{toks[2].text});
            continue;
        }
        detail::TermParser p(toks, ln + 1);
        Term lhs = p.parse();
        std::size_t i = p.position();
        if (i >= toks.size() || (toks[i].text != "=" && toks[i].text != "!="))
            throw err(i, "expected '=' or '!='");
        bool neq = toks[i].text == "!=";
        detail::TermParser q(toks, ln + 1, i + 1);
        Term rhs = q.parse();
        if (q.position() != toks.size()) throw err(q.position(), "trailing tokens");
        if (neq) inst.atoms.push_back(NeqAtom{lhs, rhs});
        else inst.atoms.push_back(EqAtom{lhs, rhs});
    }
    if (!have_vars) {
        // Declare variables in order of first use.
        for (const auto& a : inst.atoms)
            for (const auto& v : atom_variables(a))
                if (std::find(inst.variables.begin(), inst.variables.end(), v) == inst.variables.end())
                    inst.variables.push_back(v);
    }
    if (!have_sig) inst.signature = infer_signature(inst.atoms);
    return inst;
}

// ---------------------------------------------------------------------------
// JSON mirrors. Naturals are strings so that large values survive.

using Json = nlohmann::json;

inline Json circuit_to_json(const Circuit& c)
{
    Json gates = Json::array();
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        Json j;
        j["index"] = k;
        j["op"] = op_keyword(g.op);
        if (g.op == Op::Constant) j["value"] = g.value.str();
        if (g.op == Op::Variable) j["name"] = g.name;
        if (!g.preds.empty()) j["args"] = g.preds;
        gates.push_back(std::move(j));
    }
    return Json{{"gates", gates}, {"output", c.output()}};
}

inline Circuit circuit_from_json(const Json& j)
{
    try {
        std::vector<Gate> gates;
        for (const auto& jg : j.at("gates")) {
            std::size_t idx = jg.at("index").get<std::size_t>();
            if (idx != gates.size() + 1) throw InvalidInput("gates must be listed in ascending order from 1");
            auto op = op_from_keyword(jg.at("op").get<std::string>());
            if (!op) throw InvalidInput("unknown gate kind '" + jg.at("op").get<std::string>() + "'");
            Gate g;
            g.op = *op;
            if (*op == Op::Constant) {
                auto v = parse_natural(jg.at("value").get<std::string>());
                if (!v) throw InvalidInput("bad constant at gate " + std::to_string(idx));
                g.value = *v;
            }
            if (*op == Op::Variable) g.name = jg.at("name").get<std::string>();
            if (jg.contains("args")) g.preds = jg.at("args").get<std::vector<std::size_t>>();
            gates.push_back(std::move(g));
        }
        Circuit c(std::move(gates), j.at("output").get<std::size_t>());
        require_valid(c);
        return c;
    } catch (const Json::exception& e) {
        throw InvalidInput(std::string("malformed circuit JSON: ") + e.what());
    }
}

inline Json atom_to_json(const Atom& a)
{
    return std::visit(
        [](const auto& at) -> Json {
            using T = std::decay_t<decltype(at)>;
            if constexpr (std::is_same_v<T, EqAtom>)
                return {{"kind", "eq"}, {"lhs", format_term(at.lhs)}, {"rhs", format_term(at.rhs)}};
            else if constexpr (std::is_same_v<T, NeqAtom>)
                return {{"kind", "neq"}, {"lhs", format_term(at.lhs)}, {"rhs", format_term(at.rhs)}};
            else if constexpr (std::is_same_v<T, UAtom>)
                return {{"kind", "u"}, {"var", at.var}};
            else
                return {{"kind", "times"}, {"args", {at.x, at.y, at.z}}};
        },
        a);
}

inline Json csp_to_json(const CspInstance& inst)
{
    Json atoms = Json::array();
    for (const auto& a : inst.atoms) atoms.push_back(atom_to_json(a));
    Json j{{"vars", inst.variables}, {"atoms", atoms}, {"signature", inst.signature.tag()}};
    if (inst.uspec) j["uspec"] = inst.uspec->str();
    return j;
}

inline CspInstance csp_from_json(const Json& j)
{
    try {
        CspInstance inst;
        inst.variables = j.at("vars").get<std::vector<std::string>>();
        for (const auto& ja : j.at("atoms")) {
            std::string kind = ja.at("kind").get<std::string>();
            if (kind == "eq")
                inst.atoms.push_back(EqAtom{parse_term(ja.at("lhs").get<std::string>()),
                                            parse_term(ja.at("rhs").get<std::string>())});
            else if (kind == "neq")
                inst.atoms.push_back(NeqAtom{parse_term(ja.at("lhs").get<std::string>()),
                                             parse_term(ja.at("rhs").get<std::string>())});
            else if (kind == "u")
                inst.atoms.push_back(UAtom{ja.at("var").get<std::string>()});
            else if (kind == "times") {
                auto args = ja.at("args").get<std::vector<std::string>>();
                if (args.size() != 3) throw InvalidInput("times atom needs three arguments");
                inst.atoms.push_back(TimesRelAtom{args[0], args[1], args[2]});
            } else
                throw InvalidInput("unknown atom kind '" + kind + "'");
        }
        inst.signature = j.contains("signature") ? Signature::parse(j.at("signature").get<std::string>())
                                                 : infer_signature(inst.atoms);
        if (j.contains("uspec")) inst.uspec = USpec::parse(j.at("uspec").get<std::string>());
        return inst;
    } catch (const Json::exception& e) {
        throw InvalidInput(std::string("malformed instance JSON: ") + e.what());
    }
}

inline Json assignment_to_json(const Assignment& a)
{
    Json j = Json::object();
    for (const auto& [k, v] : a) j[k] = v.str();
    return j;
}

/** Reads either JSON (first non-space character '{') or the line DSL. */
inline Circuit read_circuit(std::string_view text)
{
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw InvalidInput(std::string("JSON parse error: ") + e.what());
        }
        return circuit_from_json(j);
    }
    return parse_circuit(text);
}

inline CspInstance read_csp(std::string_view text)
{
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && text[first] == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const Json::parse_error& e) {
            throw InvalidInput(std::string("JSON parse error: ") + e.what());
        }
        return csp_from_json(j);
    }
    return parse_csp(text);
}

// ---------------------------------------------------------------------------
// DIMACS CNF: "p cnf <vars> <clauses>" then 0-terminated clauses; 'c' lines are comments.

inline Cnf parse_dimacs(std::string_view text)
{
    Cnf f;
    bool header = false;
    std::size_t declared = 0;
    std::vector<int> clause;
    auto lines = detail::split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        const std::string& line = lines[ln];
        std::vector<std::pair<std::string, std::size_t>> words;
        for (std::size_t i = 0; i < line.size();) {
            if (std::isspace(static_cast<unsigned char>(line[i]))) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            words.emplace_back(line.substr(i, j - i), i + 1);
            i = j;
        }
        if (words.empty() || words[0].first == "c" || words[0].first == "%") continue;
        if (words[0].first == "p") {
            if (header) throw ParseError(ln + 1, 1, "duplicate problem line");
            if (words.size() != 4 || words[1].first != "cnf") throw ParseError(ln + 1, 1, "expected 'p cnf <vars> <clauses>'");
            auto v = parse_natural(words[2].first), c = parse_natural(words[3].first);
            if (!v || *v > 24) throw ParseError(ln + 1, words[2].second, "variable count must be at most 24");
            if (!c) throw ParseError(ln + 1, words[3].second, "bad clause count");
            f.num_vars = v->convert_to<std::size_t>();
            declared = c->convert_to<std::size_t>();
            header = true;
            continue;
        }
        if (!header) throw ParseError(ln + 1, words[0].second, "clause before the problem line");
        for (const auto& [w, col] : words) {
            long long lit = 0;
            try {
                std::size_t used = 0;
                lit = std::stoll(w, &used);
                if (used != w.size()) throw std::invalid_argument(w);
            } catch (const std::exception&) {
                throw ParseError(ln + 1, col, "expected a literal, got '" + w + "'");
            }
            if (lit == 0) {
                f.clauses.push_back(clause);
                clause.clear();
                continue;
            }
            if (static_cast<std::size_t>(std::llabs(lit)) > f.num_vars)
                throw ParseError(ln + 1, col, "literal " + w + " exceeds the declared variable count");
            clause.push_back(static_cast<int>(lit));
        }
    }
    if (!header) throw ParseError(1, 1, "missing problem line");
    if (!clause.empty()) f.clauses.push_back(clause);
    if (f.clauses.size() != declared)
        throw ParseError(lines.size(), 1, "expected " + std::to_string(declared) + " clauses, found " +
                                              std::to_string(f.clauses.size()));
    return f;
}

inline std::string format_dimacs(const Cnf& f)
{
    std::string out = "p cnf " + std::to_string(f.num_vars) + " " + std::to_string(f.clauses.size()) + "\n";
    for (const auto& cl : f.clauses) {
        for (int l : cl) out += std::to_string(l) + " ";
        out += "0\n";
    }
    return out;
}

} // namespace skolem
