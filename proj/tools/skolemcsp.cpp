// skolemcsp: command-line front end.
//
// Exit status: 0 on success, 1 for Unsat/False verdicts when --exit-verdict is
// given (and for corpus mismatches), 2 for input errors, 3 for internal errors.

#include "skolem/dsl.hpp"
#include "skolem/func_csp.hpp"
#include "skolem/mult_csp.hpp"
#include "skolem/numtheory.hpp"
#include "skolem/reductions.hpp"
#include "skolem/set_engine.hpp"
#include "skolem/skolem_compiler.hpp"
#include "skolem/testkit.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

using namespace skolem;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::string format = "text";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> bound;
    std::optional<std::uint64_t> window;
    std::optional<std::uint64_t> q;
    bool exit_verdict = false;
};

struct Report {
    Json json = Json::object();
    std::string text;
    bool negative = false;  // Unsat / False, for --exit-verdict
    bool failed = false;    // exit 1 regardless of --exit-verdict
};

// Name of the input being parsed, for error messages.
std::string g_source = "<stdin>";

std::string read_input(const std::string& path)
{
    if (path.empty() || path == "-") {
        g_source = "<stdin>";
        return detail::read_all(std::cin);
    }
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read '" + path + "'");
    g_source = path;
    return detail::read_all(in);
}

Assignment parse_assignment(const std::string& text)
{
    Assignment a;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        std::string item = text.substr(pos, end - pos);
        auto eq = item.find('=');
        if (eq == std::string::npos) throw InvalidInput("--assign: expected name=value, got '" + item + "'");
        auto v = parse_natural(item.substr(eq + 1));
        if (!v || !detail::is_identifier(item.substr(0, eq)))
            throw InvalidInput("--assign: expected name=value, got '" + item + "'");
        a[item.substr(0, eq)] = *v;
        pos = end + 1;
    }
    return a;
}

std::string verdict_word(TriBool t)
{
    switch (t) {
    case TriBool::True: return "True";
    case TriBool::False: return "False";
    default: return "Unknown";
    }
}

Report verdict_report(const std::string& command, TriBool t)
{
    Report r;
    r.json["command"] = command;
    r.json["verdict"] = std::string(to_string(t));
    r.text = verdict_word(t) + "\n";
    r.negative = t == TriBool::False;
    return r;
}

std::string assignment_text(const Assignment& a)
{
    std::string s;
    for (const auto& [k, v] : a) s += k + " = " + v.str() + "\n";
    return s;
}

void put_status(Report& r, Status s, const std::optional<Assignment>& w)
{
    r.json["status"] = std::string(to_string(s));
    r.text = std::string(to_string(s)) + "\n";
    if (w) {
        r.json["witness"] = assignment_to_json(*w);
        r.text += assignment_text(*w);
    }
    r.negative = s == Status::Unsat || s == Status::NoWitnessUpTo;
}

Json window_json(const WindowedSet& w)
{
    Json j;
    j["bound"] = w.bound;
    Json members = Json::array(), unknown = Json::array();
    for (std::size_t i = 0; i < w.bits.size(); ++i) {
        if (w.bits[i] == TriBool::True) members.push_back(i);
        if (w.bits[i] == TriBool::Unknown) unknown.push_back(i);
    }
    j["members"] = members;
    j["unknown"] = unknown;
    j["tail"] = std::string(to_string(w.tail));
    return j;
}

std::vector<std::string> nat_strings(const std::vector<Natural>& xs)
{
    std::vector<std::string> out;
    for (const auto& x : xs) out.push_back(x.str());
    return out;
}

Natural need_natural(const std::string& text, const char* flag)
{
    auto v = parse_natural(text);
    if (!v) throw InvalidInput(std::string(flag) + ": expected a natural number, got '" + text + "'");
    return *v;
}

// ---------------------------------------------------------------------------
// set engine

Report cmd_eval(const Globals& g, const std::string& input, const std::string& assign)
{
    auto c = read_circuit(read_input(input));
    auto a = parse_assignment(assign);
    Report r;
    r.json["command"] = "eval";
    if (!g.window) {
        if (auto v = eval_exact(c, a)) {
            r.json["exact"] = true;
            r.json["value"] = to_string(*v);
            r.text = to_string(*v) + "\n";
            return r;
        }
    }
    std::uint64_t B = std::max(g.window.value_or(0), minimal_window(c, a, 0));
    auto w = eval_windowed(c, a, B).back();
    r.json["exact"] = false;
    r.json["window"] = window_json(w);
    r.text = to_string(SetValue(w)) + "\n";
    return r;
}

Report cmd_member(const Globals& g, const std::string& input, const std::string& b, const std::string& assign)
{
    auto c = read_circuit(read_input(input));
    auto r = verdict_report("member", member(c, parse_assignment(assign), need_natural(b, "--b"), g.window));
    r.json["b"] = b;
    return r;
}

Report cmd_equiv(const Globals& g, const std::vector<std::string>& inputs, const std::string& assign)
{
    if (inputs.size() != 2) throw InvalidInput("equiv: expected two circuit files");
    auto c1 = read_circuit(read_input(inputs[0]));
    auto c2 = read_circuit(read_input(inputs[1]));
    auto a = parse_assignment(assign);
    std::uint64_t B = std::max({g.window.value_or(64), minimal_window(c1, a, 0), minimal_window(c2, a, 0)});
    auto r = verdict_report("equiv", equiv(c1, c2, a, B));
    r.json["window"] = B;
    return r;
}

// ---------------------------------------------------------------------------
// CSP

Report cmd_csp_solve(const Globals& g, const std::string& input, const std::string& signature)
{
    auto inst = read_csp(read_input(input));
    if (!signature.empty()) inst.signature = Signature::parse(signature);
    auto res = solve_csp(inst, g.bound.value_or(8));
    Report r;
    r.json["command"] = "csp solve";
    put_status(r, res.status, res.witness);
    r.json["method"] = res.method;
    r.json["branches_explored"] = res.branches_explored;
    if (res.bound) r.json["bound"] = res.bound->str();
    if (!res.note.empty()) r.json["note"] = res.note;
    return r;
}

Report reduction_output(const std::string& name, const CspInstance& out, const std::string& certificate)
{
    Report r;
    r.json["command"] = "csp reduce";
    r.json["name"] = name;
    r.json["output"] = {{"kind", "csp"}, {"dsl", format_csp(out)}, {"json", csp_to_json(out)}};
    r.json["certificate"] = certificate;
    r.text = format_csp(out);
    return r;
}

Report cmd_csp_reduce(const std::string& name, const std::vector<std::string>& inputs, const std::string& b)
{
    auto one = [&]() -> std::string {
        if (inputs.size() > 1) throw InvalidInput("csp reduce " + name + ": expected at most one input");
        return read_input(inputs.empty() ? "" : inputs[0]);
    };
    if (name == "ef2csp") {
        if (inputs.size() != 2) throw InvalidInput("csp reduce ef2csp: expected two formula files");
        auto f1 = read_circuit(read_input(inputs[0]));
        auto f2 = read_circuit(read_input(inputs[1]));
        return reduction_output(name, ef_to_csp(f1, f2),
                                "identity on inputs: an assignment satisfies the atom iff both formulas have equal values");
    }
    if (name == "csp2sc") {
        auto inst = read_csp(one());
        auto sc = csp_to_sc(inst);
        Report r;
        r.json["command"] = "csp reduce";
        r.json["name"] = name;
        r.json["output"] = {{"kind", "circuit"}, {"dsl", format_circuit(sc.circuit)}, {"json", circuit_to_json(sc.circuit)}};
        r.json["target"] = sc.target.str();
        r.json["certificate"] = "identity on variables: a CSP witness puts 0 into the circuit output and conversely";
        r.text = "# target " + sc.target.str() + "\n" + format_circuit(sc.circuit);
        return r;
    }
    if (name == "plus2times") {
        auto inst = read_csp(one());
        auto red = plus_to_times(inst);
        auto r = reduction_output(name, red.output,
                                  "forward y -> 2^y with chain w_i -> 2^(2^i); backward takes log2 of power-of-two witnesses");
        r.json["intermediate"] = format_csp(red.intermediate);
        r.json["chain"] = red.chain;
        return r;
    }
    if (name == "sat2capcup") {
        auto f = parse_dimacs(one());
        return reduction_output(name, sat3_to_capcup(f),
                                "true -> 1, false -> 0; a value is read back as true iff it is 1");
    }
    if (name == "sc2csp-times" || name == "sc2csp-plus") {
        if (b.empty()) throw InvalidInput("csp reduce " + name + ": --b is required");
        auto c = read_circuit(one());
        Natural target = need_natural(b, "--b");
        auto out = name == "sc2csp-times" ? sc_times_to_csp(c, target) : sc_plus_to_csp(c, target);
        return reduction_output(name, out, "one variable g<k> per gate; inputs are read off the variable gates");
    }
    throw InvalidInput("csp reduce: unknown reduction '" + name + "'");
}

Report cmd_circuit_sat(const Globals& g, const std::string& input, const std::string& b)
{
    if (b.empty()) throw InvalidInput("circuit sat: --b is required");
    auto c = read_circuit(read_input(input));
    auto res = solve_sc_bounded(c, need_natural(b, "--b"), g.bound.value_or(8));
    Report r;
    r.json["command"] = "circuit sat";
    put_status(r, res.status, res.inputs);
    r.json["explored"] = res.explored;
    r.json["bound"] = g.bound.value_or(8);
    return r;
}

// ---------------------------------------------------------------------------
// Skolem sentences

Report cmd_skolem_compile(const Globals& g, const std::string& input, const std::string& v, const std::string& emit)
{
    if (v.empty()) throw InvalidInput("skolem compile: --target-v is required");
    auto c = eliminate_cap(read_circuit(read_input(input)));
    Natural target = need_natural(v, "--target-v");
    auto f = compile_circuit(c, target);
    Report r;
    r.json["command"] = "skolem compile";
    r.json["target_v"] = v;
    r.json["agreement_bound"] = agreement_bound(c, target);
    r.json["size"] = fo_size(f);
    r.json["smt2"] = to_smt2_script(f);
    r.json["formula"] = fo_to_json(f);
    if (emit == "json") r.text = fo_to_json(f).dump() + "\n";
    else if (emit == "smt2") r.text = to_smt2_script(f);
    else throw InvalidInput("--emit: expected smt2 or json");
    (void)g;
    return r;
}

Report cmd_skolem_check(const Globals& g, const std::string& input)
{
    if (!g.q) throw InvalidInput("skolem check: --q is required");
    std::string text = read_input(input);
    auto first = text.find_first_not_of(" \t\r\n");
    Fo f = first != std::string::npos && text[first] == '{' ? fo_from_json(Json::parse(text)) : parse_smt2(text);
    auto v = bounded_eval_fo(f, *g.q);
    auto r = verdict_report("skolem check", v.value);
    r.json["q"] = *g.q;
    r.json["sound"] = v.sound;
    r.json["evaluations"] = v.evaluations;
    return r;
}

// ---------------------------------------------------------------------------
// Multiplicative CSPs

MulInstance read_mul(const std::string& input, const std::string& u)
{
    auto csp = read_csp(read_input(input));
    if (!u.empty()) csp.uspec = USpec::parse(u);
    return to_mul_instance(csp);
}

Report cmd_mul_solve(const std::string& input, const std::string& u)
{
    auto inst = read_mul(input, u);
    auto res = solve_mul(inst);
    Report r;
    r.json["command"] = "mulcsp solve";
    put_status(r, res.status, res.witness);
    r.json["method"] = res.method;
    if (!res.note.empty()) r.json["note"] = res.note;
    Json t;
    t["forced_zero"] = std::vector<std::string>(res.trace.forced.begin(), res.trace.forced.end());
    if (res.trace.additive) {
        const auto& add = *res.trace.additive;
        Json eqs = Json::array();
        for (const auto& e : add.equations)
            eqs.push_back({add.variables[e[0]], add.variables[e[1]], add.variables[e[2]]});
        Json pos = Json::array();
        for (std::size_t i = 0; i < add.variables.size(); ++i)
            if (add.at_least_one[i]) pos.push_back(add.variables[i]);
        t["additive"] = {{"variables", add.variables}, {"equations", eqs}, {"at_least_one", pos}};
    }
    if (res.trace.point) {
        Json p = Json::array();
        for (const auto& x : *res.trace.point) p.push_back(x.str());
        t["rational_point"] = p;
        t["scale"] = res.trace.scale.str();
    }
    if (res.trace.candidates) t["candidates"] = res.trace.candidates;
    r.json["trace"] = t;
    return r;
}

Report cmd_mul_gadget(const Globals& g, const std::string& name, const std::string& input, const std::string& u,
                      const std::string& m)
{
    Report r;
    r.json["command"] = "mulcsp gadget";
    r.json["name"] = name;
    if (name == "3sat-neq") {
        auto f = parse_dimacs(read_input(input));
        auto gad = gadget_3sat_to_neq_times(f);
        auto res = solve_mul_bounded(gad.instance, g.bound.value_or(2));
        auto brute = testkit::brute_force_sat(f);
        std::string dsl = format_csp(to_csp_instance(gad.instance));
        r.json["instance"] = dsl;
        put_status(r, res.status, res.witness);
        r.json["brute_force"] = brute ? "sat" : "unsat";
        if (res.witness) r.json["sat_assignment"] = neq_gadget_to_sat(f, *res.witness);
        r.json["agrees"] = (res.status == Status::Sat) == brute.has_value();
        r.text = dsl + "# status " + std::string(to_string(res.status)) + "\n";
        return r;
    }
    if (name == "const-u") {
        if (u.empty() || m.empty()) throw InvalidInput("mulcsp gadget const-u: --u and --m are required");
        auto inst = read_mul(input, "");
        Natural mm = need_natural(m, "--m");
        auto gad = gadget_constant(inst, USpec::parse(u), mm);
        std::string dsl = format_csp(to_csp_instance(gad.instance));
        r.json["instance"] = dsl;
        r.json["vm"] = gad.vm;
        r.json["cofactor"] = gad.cofactor;
        auto res = solve_mul_over(inst, divisors(mm));
        put_status(r, res.status, res.witness);
        if (res.witness) {
            auto fw = const_gadget_forward(gad, *res.witness);
            r.json["forward_witness"] = assignment_to_json(fw);
            r.json["forward_verified"] = check_mul(gad.instance, fw);
        }
        r.text = dsl + "# input " + std::string(to_string(res.status)) + " over divisors of " + m + "\n";
        return r;
    }
    throw InvalidInput("mulcsp gadget: unknown gadget '" + name + "'");
}

Report cmd_mul_xi(const std::string& u)
{
    if (u.empty()) throw InvalidInput("mulcsp xi: --u is required");
    auto xi = xi_construct(USpec::parse(u));
    Report r;
    r.json["command"] = "mulcsp xi";
    r.json["r"] = xi.r;
    r.json["exponents"] = xi.exponents;
    r.json["witness"] = xi.witness.str();
    r.json["q"] = xi.q.str();
    auto members = nat_strings(xi.members());
    r.json["members"] = members;
    r.text = "r = " + std::to_string(xi.r) + "\nwitness = " + xi.witness.str() + "\nq = " + xi.q.str() + "\nmembers =";
    for (const auto& s : members) r.text += " " + s;
    r.text += "\n";
    return r;
}

// ---------------------------------------------------------------------------
// Number theory

Report cmd_analyze(const std::string& what, const std::string& n, const std::string& u, std::size_t arity,
                   const std::string& m)
{
    Report r;
    r.json["command"] = "analyze " + what;
    auto need_n = [&] {
        if (n.empty()) throw InvalidInput("analyze " + what + ": --n is required");
        return need_natural(n, "--n");
    };
    if (what == "factor") {
        auto f = factorize(need_n());
        Json j = Json::object();
        std::string s;
        for (const auto& [p, e] : f) {
            j[p.str()] = e;
            s += (s.empty() ? "" : " * ") + p.str() + (e > 1 ? "^" + std::to_string(e) : "");
        }
        r.json["factors"] = j;
        r.text = (s.empty() ? "1" : s) + "\n";
    } else if (what == "minexp") {
        auto e = minexp(need_n());
        r.json["minexp"] = e;
        r.text = std::to_string(e) + "\n";
    } else if (what == "divisors") {
        auto d = nat_strings(divisors(need_n()));
        r.json["divisors"] = d;
        for (const auto& s : d) r.text += s + "\n";
    } else if (what == "core") {
        Natural x = need_n();
        if (has_degree_one_factor(x)) {
            auto e = core_endomorphism(x);
            Json j = Json::object();
            for (const auto& [a, b] : e) {
                j[a.str()] = b.str();
                r.text += a.str() + " -> " + b.str() + "\n";
            }
            r.json["two_element_core"] = true;
            r.json["endomorphism"] = j;
            r.json["verified"] = is_endomorphism(x, e);
        } else {
            bool none = no_two_element_core_check(x);
            r.json["two_element_core"] = !none;
            r.text = none ? "no endomorphism onto {1, m}\n" : "endomorphism found\n";
        }
    } else if (what == "basis") {
        if (u.empty()) throw InvalidInput("analyze basis: --u is required");
        auto b = basis(USpec::parse(u));
        r.json["infinite"] = b.infinite;
        if (!b.infinite) r.json["values"] = b.values;
        if (b.infinite) r.text = "infinite\n";
        else
            for (auto v : b.values) r.text += std::to_string(v) + "\n";
    } else if (what == "wnu") {
        std::size_t domain = 2;
        std::vector<FiniteRelation> rels = two_element_core_relations();
        if (!m.empty()) {
            // ({divisors of m}; ×-triples, {m})
            auto div = divisors(need_natural(m, "--m"));
            if (div.size() > 8) throw InvalidInput("analyze wnu: at most 8 divisors are supported");
            FiniteRelation times{3, {}};
            for (std::size_t i = 0; i < div.size(); ++i)
                for (std::size_t j = 0; j < div.size(); ++j)
                    for (std::size_t k = 0; k < div.size(); ++k)
                        if (div[i] * div[j] == div[k]) times.tuples.push_back({i, j, k});
            rels = {times, FiniteRelation{1, {{div.size() - 1}}}};
            domain = div.size();
        }
        auto res = wnu_search(domain, rels, arity);
        r.json["domain_size"] = domain;
        r.json["arity"] = arity;
        r.json["found"] = res.found;
        r.json["nodes"] = res.nodes;
        if (res.found) r.json["table"] = res.table;
        r.text = res.found ? "WNU found\n" : "no WNU of arity " + std::to_string(arity) + "\n";
    } else {
        throw InvalidInput("analyze: unknown analysis '" + what + "'");
    }
    return r;
}

// ---------------------------------------------------------------------------
// testkit

std::uint64_t default_seed(const Globals& g)
{
    if (g.seed) return *g.seed;
    if (const char* s = std::getenv("SKOLEMCSP_SEED")) {
        auto v = parse_natural(s);
        if (!v || !fits_u64(*v)) throw InvalidInput("SKOLEMCSP_SEED: expected a natural number");
        return to_u64(*v);
    }
    return 0;
}

Report cmd_gen(const Globals& g, const std::string& kind, std::size_t size)
{
    std::uint64_t seed = default_seed(g);
    testkit::Rng rng(seed);
    Report r;
    r.json["command"] = "testkit gen";
    r.json["kind"] = kind;
    r.json["seed"] = seed;
    if (kind == "circuit") {
        testkit::CircuitProfile p;
        if (size) p.gates = size;
        auto c = testkit::gen_circuit(rng, p);
        r.json["instance"] = circuit_to_json(c);
        r.text = format_circuit(c);
    } else if (kind == "csp" || kind == "mul") {
        CspInstance inst;
        if (kind == "csp") {
            testkit::CspProfile p;
            if (size) p.atoms = size;
            inst = testkit::gen_csp(rng, p);
        } else {
            testkit::MulProfile p;
            if (size) p.times_atoms = size;
            inst = testkit::gen_mul_csp(rng, p);
        }
        r.json["instance"] = csp_to_json(inst);
        r.text = format_csp(inst);
    } else if (kind == "cnf") {
        testkit::CnfProfile p;
        if (size) p.clauses = size;
        auto f = testkit::gen_cnf(rng, p);
        r.json["instance"] = format_dimacs(f);
        r.text = format_dimacs(f);
    } else {
        throw InvalidInput("testkit gen: unknown kind '" + kind + "'");
    }
    return r;
}

// ---------------------------------------------------------------------------
// corpus

struct CorpusEntry {
    std::string file, kind, result, expected, error;
};

// Header lines: "# expect: <verdict>" and, for circuits, "# member: <b>".
std::string header_value(const std::string& text, const std::string& key)
{
    for (const auto& line : detail::split_lines(text)) {
        auto pos = line.find("# " + key + ":");
        if (pos != 0) continue;
        std::string v = line.substr(key.size() + 3);
        v.erase(0, v.find_first_not_of(' '));
        v.erase(v.find_last_not_of(" \t") + 1);
        return v;
    }
    return {};
}

CorpusEntry run_corpus_file(const fs::path& path)
{
    CorpusEntry e;
    e.file = path.filename().string();
    e.kind = path.extension().string().substr(1);
    try {
        std::ifstream in(path);
        std::string text = detail::read_all(in);
        e.expected = header_value(text, "expect");
        if (e.kind == "csp") {
            e.result = to_string(solve_csp(read_csp(text)).status);
        } else if (e.kind == "mul") {
            e.result = to_string(solve_mul(to_mul_instance(read_csp(text))).status);
        } else if (e.kind == "circ") {
            auto b = parse_natural(header_value(text, "member"));
            if (!b) throw InvalidInput("missing '# member: <b>' header");
            e.result = to_string(member(read_circuit(text), {}, *b));
        } else if (e.kind == "cnf") {
            std::string body;  // drop the '#' header lines
            for (const auto& line : detail::split_lines(text))
                if (line.rfind('#', 0) != 0) body += line + "\n";
            auto f = parse_dimacs(body);
            auto res = solve_mul_bounded(gadget_3sat_to_neq_times(f).instance, 2);
            if ((res.status == Status::Sat) != testkit::brute_force_sat(f).has_value())
                throw InternalInvariant("gadget verdict differs from brute force");
            e.result = res.status == Status::Sat ? "sat" : "unsat";
        }
    } catch (const std::exception& ex) {
        e.result = "error";
        e.error = ex.what();
    }
    return e;
}

Report cmd_corpus(const std::string& dir, std::size_t jobs)
{
    std::vector<fs::path> files;
    if (!fs::is_directory(dir)) throw InvalidInput("corpus run: '" + dir + "' is not a directory");
    for (const auto& f : fs::directory_iterator(dir)) {
        auto ext = f.path().extension().string();
        if (f.is_regular_file() && (ext == ".csp" || ext == ".mul" || ext == ".circ" || ext == ".cnf"))
            files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());

    // Workers pull indices; results land in their slot so order never depends on scheduling.
    std::vector<CorpusEntry> results(files.size());
    std::atomic<std::size_t> next{0};
    if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
    std::vector<std::future<void>> workers;
    for (std::size_t w = 0; w < std::min(jobs, files.size()); ++w)
        workers.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i; (i = next++) < files.size();) results[i] = run_corpus_file(files[i]);
        }));
    for (auto& w : workers) w.get();

    Report r;
    r.json["command"] = "corpus run";
    Json list = Json::array();
    std::size_t mismatches = 0;
    for (const auto& e : results) {
        bool ok = e.result != "error" && (e.expected.empty() || e.expected == e.result);
        mismatches += ok ? 0 : 1;
        Json j = {{"file", e.file}, {"kind", e.kind}, {"result", e.result}, {"ok", ok}};
        if (!e.expected.empty()) j["expected"] = e.expected;
        if (!e.error.empty()) j["error"] = e.error;
        list.push_back(j);
        r.text += (ok ? "ok       " : "MISMATCH ") + e.file + ": " + e.result +
                  (e.expected.empty() ? "" : " (expected " + e.expected + ")") + "\n";
    }
    r.json["instances"] = list;
    r.json["total"] = results.size();
    r.json["mismatches"] = mismatches;
    r.text += std::to_string(results.size() - mismatches) + "/" + std::to_string(results.size()) + " ok\n";
    r.failed = mismatches > 0;
    return r;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Circuits over sets of naturals, functional CSPs and Skolem arithmetic"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "text"}));
    app.add_option("--seed", g.seed, "Seed for generators (default: $SKOLEMCSP_SEED or 0)");
    app.add_option("--bound", g.bound, "Search bound");
    app.add_option("--window", g.window, "Window bound B for windowed evaluation");
    app.add_option("--q", g.q, "Quantifier range [0..Q] for sentence checks");
    app.add_flag("--exit-verdict", g.exit_verdict, "Exit 1 on Unsat/False verdicts");

    std::string input, assign, b, signature, name, u, m, n, target_v, emit = "smt2", kind, what, dir;
    std::vector<std::string> inputs;
    std::size_t arity = 3, size = 0, jobs = 0;
    std::function<Report()> run;

    auto* eval = app.add_subcommand("eval", "Evaluate a circuit");
    eval->add_option("input", input, "Circuit file (default stdin)");
    eval->add_option("--assign", assign, "Input values, e.g. x=3,y=0");
    eval->callback([&] { run = [&] { return cmd_eval(g, input, assign); }; });

    auto* mem = app.add_subcommand("member", "Decide b ∈ circuit value");
    mem->add_option("input", input, "Circuit file (default stdin)");
    mem->add_option("--b", b, "Element")->required();
    mem->add_option("--assign", assign, "Input values");
    mem->callback([&] { run = [&] { return cmd_member(g, input, b, assign); }; });

    auto* eq = app.add_subcommand("equiv", "Compare two circuits on a window");
    eq->add_option("inputs", inputs, "Two circuit files")->expected(2);
    eq->add_option("--assign", assign, "Input values");
    eq->callback([&] { run = [&] { return cmd_equiv(g, inputs, assign); }; });

    auto* csp = app.add_subcommand("csp", "Functional CSPs");
    csp->require_subcommand(1);
    auto* solve = csp->add_subcommand("solve", "Solve an instance");
    solve->add_option("input", input, "CSP file (default stdin)");
    solve->add_option("--signature", signature, "Signature tag, e.g. cap-cup-not");
    solve->callback([&] { run = [&] { return cmd_csp_solve(g, input, signature); }; });
    auto* reduce = csp->add_subcommand("reduce", "Apply a reduction");
    reduce->add_option("inputs", inputs, "Input file(s) (default stdin)");
    reduce->add_option("--name", name, "ef2csp|csp2sc|plus2times|sat2capcup|sc2csp-times|sc2csp-plus")->required();
    reduce->add_option("--b", b, "Target element for sc2csp-*");
    reduce->callback([&] { run = [&] { return cmd_csp_reduce(name, inputs, b); }; });

    auto* circuit = app.add_subcommand("circuit", "Circuit problems");
    circuit->require_subcommand(1);
    auto* csat = circuit->add_subcommand("sat", "Bounded search for inputs with b in the output");
    csat->add_option("input", input, "Circuit file (default stdin)");
    csat->add_option("--b", b, "Target element")->required();
    csat->callback([&] { run = [&] { return cmd_circuit_sat(g, input, b); }; });

    auto* skolem = app.add_subcommand("skolem", "Skolem-arithmetic sentences");
    skolem->require_subcommand(1);
    auto* compile = skolem->add_subcommand("compile", "Compile a circuit and target into a sentence");
    compile->add_option("input", input, "Circuit file (default stdin)");
    compile->add_option("--target-v", target_v, "Target element v")->required();
    compile->add_option("--emit", emit, "smt2 or json")->check(CLI::IsMember({"smt2", "json"}));
    compile->callback([&] { run = [&] { return cmd_skolem_compile(g, input, target_v, emit); }; });
    auto* check = skolem->add_subcommand("check", "Bounded evaluation of a sentence");
    check->add_option("input", input, "Sentence as SMT-LIB or JSON (default stdin)");
    check->callback([&] { run = [&] { return cmd_skolem_check(g, input); }; });

    auto* mul = app.add_subcommand("mulcsp", "Multiplicative CSPs");
    mul->require_subcommand(1);
    auto* msolve = mul->add_subcommand("solve", "Decide an instance over × and U");
    msolve->add_option("input", input, "CSP file (default stdin)");
    msolve->add_option("--u", u, "powers:<m> or set:<n,...>");
    msolve->callback([&] { run = [&] { return cmd_mul_solve(input, u); }; });
    auto* gadget = mul->add_subcommand("gadget", "Build a hardness gadget");
    gadget->add_option("input", input, "DIMACS (3sat-neq) or CSP (const-u) file");
    gadget->add_option("--name", name, "3sat-neq or const-u")->required();
    gadget->add_option("--u", u, "U for const-u");
    gadget->add_option("--m", m, "Constant for const-u");
    gadget->callback([&] { run = [&] { return cmd_mul_gadget(g, name, input, u, m); }; });
    auto* xi = mul->add_subcommand("xi", "Build the set X for a finite U");
    xi->add_option("--u", u, "set:<n,...>")->required();
    xi->callback([&] { run = [&] { return cmd_mul_xi(u); }; });

    auto* analyze = app.add_subcommand("analyze", "Number-theoretic helpers");
    analyze->add_option("what", what, "factor|minexp|basis|divisors|core|wnu")->required();
    analyze->add_option("--n", n, "Number");
    analyze->add_option("--u", u, "U for basis");
    analyze->add_option("--m", m, "m for wnu over the divisors of m");
    analyze->add_option("--arity", arity, "WNU arity");
    analyze->callback([&] { run = [&] { return cmd_analyze(what, n, u, arity, m); }; });

    auto* tk = app.add_subcommand("testkit", "Generators");
    tk->require_subcommand(1);
    auto* gen = tk->add_subcommand("gen", "Generate a seeded instance");
    gen->add_option("--kind", kind, "circuit|csp|mul|cnf")->required();
    gen->add_option("--size", size, "Gates, atoms or clauses");
    gen->callback([&] { run = [&] { return cmd_gen(g, kind, size); }; });

    auto* corpus = app.add_subcommand("corpus", "Batch runs");
    corpus->require_subcommand(1);
    auto* crun = corpus->add_subcommand("run", "Run every instance in a directory");
    crun->add_option("dir", dir, "Corpus directory")->required();
    crun->add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");
    crun->callback([&] { run = [&] { return cmd_corpus(dir, jobs); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Report r = run();
        if (g.format == "json") std::cout << r.json.dump(2) << "\n";
        else std::cout << r.text;
        return r.failed || (g.exit_verdict && r.negative) ? 1 : 0;
    } catch (const ParseError& e) {
        std::cerr << "error: " << g_source << ": " << e.what() << "\n";
        return 2;
    } catch (const InternalInvariant& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Json::exception& e) {
        std::cerr << "error: " << g_source << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
