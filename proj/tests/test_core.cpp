#include "skolem/dsl.hpp"
#include "skolem/numtheory.hpp"
#include "skolem/set_engine.hpp"
#include "skolem/testkit.hpp"

#include <gtest/gtest.h>

using namespace skolem;

TEST(Circuit, SingleConstantIsValid)
{
    CircuitBuilder b;
    b.constant(5);
    EXPECT_TRUE(validate_circuit(b.build(1)).empty());
}

TEST(Circuit, ArityViolation)
{
    std::vector<Gate> gates{{Op::Constant, 2, {}, {}}, {Op::Times, 0, {}, {1}}};
    auto v = validate_circuit(Circuit(gates, 2));
    ASSERT_EQ(v.size(), 1U);
    EXPECT_EQ(v[0].gate, 2U);
    EXPECT_NE(v[0].what.find("arity"), std::string::npos);
}

TEST(Circuit, TopologyViolation)
{
    std::vector<Gate> gates{{Op::Constant, 2, {}, {}}, {Op::Complement, 0, {}, {3}}, {Op::Constant, 1, {}, {}}};
    auto v = validate_circuit(Circuit(gates, 2));
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v[0].what.find("topology"), std::string::npos);
}

TEST(Circuit, OutputMustExist)
{
    CircuitBuilder b;
    b.constant(1);
    EXPECT_FALSE(validate_circuit(b.build(2)).empty());
}

TEST(Circuit, FreeInputs)
{
    CircuitBuilder b;
    b.constant(1);
    b.constant(2);
    EXPECT_TRUE(free_inputs(b.build(2)).empty());

    CircuitBuilder c;
    c.variable("x");
    c.constant(2);
    c.variable("y");
    c.binary(Op::Plus, 1, 3);
    EXPECT_EQ(free_inputs(c.build(4)), (std::vector<std::size_t>{1, 3}));

    CircuitBuilder d;
    d.variable("x");
    d.binary(Op::Times, 1, 1);
    EXPECT_EQ(free_inputs(d.build(2)), (std::vector<std::size_t>{1}));
}

TEST(Term, ToCircuitShapes)
{
    EXPECT_EQ(term_to_circuit(Term::constant(3)).size(), 1U);

    Circuit u = term_to_circuit(Term::unite(Term::constant(2), Term::constant(3)));
    EXPECT_EQ(u.size(), 3U);
    EXPECT_EQ(u.gate(u.output()).op, Op::Union);

    Term t = Term::complement(Term::plus(Term::var("x"), Term::constant(1)));
    Circuit c = term_to_circuit(t);
    EXPECT_EQ(c.size(), 4U);
    auto deg = outdegrees(c);
    for (std::size_t k = 1; k <= c.size(); ++k) EXPECT_EQ(deg[k], k == c.output() ? 0U : 1U);
    EXPECT_TRUE(is_formula(c));
    EXPECT_EQ(circuit_to_term(c), t);
}

TEST(Term, ToCircuitPreservesSemantics)
{
    testkit::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Term t = testkit::gen_term(rng, {"x", "y"}, kAllOperators, 4, 5);
        Circuit c = term_to_circuit(t);
        for (unsigned x = 0; x <= 5; ++x)
            for (unsigned y = 0; y <= 5; y += 2) {
                Assignment a{{"x", x}, {"y", y}};
                auto wt = eval_windowed(term_to_circuit(circuit_to_term(c)), a, 40);
                auto wc = eval_windowed(c, a, 40);
                EXPECT_EQ(wt.back(), wc.at(c.output() - 1)) << format_term(t);
            }
    }
}

TEST(Dsl, CircuitRoundTrip)
{
    testkit::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        testkit::CircuitProfile prof;
        prof.gates = 1 + static_cast<std::size_t>(i % 9);
        prof.max_constant = 1000000;
        Circuit c = testkit::gen_circuit(rng, prof);
        EXPECT_EQ(parse_circuit(format_circuit(c)), c);
        EXPECT_EQ(circuit_from_json(circuit_to_json(c)), c);
    }
}

TEST(Dsl, CircuitParseErrorsCarryPosition)
{
    try {
        parse_circuit("gate 1 = const 2\ngate 2 = times 1\noutput 2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2U);
    }
    try {
        parse_circuit("gate 1 = cnst 2\noutput 1\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1U);
        EXPECT_EQ(e.column(), 10U);
    }
    EXPECT_THROW(parse_circuit("gate 1 = const 2\n"), ParseError);
}

TEST(Dsl, HugeConstantsSurvive)
{
    std::string big = "123456789012345678901234567890123456789";
    Circuit c = parse_circuit("gate 1 = const " + big + "\noutput 1\n");
    EXPECT_EQ(c.gate(1).value.str(), big);
    EXPECT_EQ(circuit_from_json(Json::parse(circuit_to_json(c).dump())), c);
}

TEST(Dsl, CspRoundTrip)
{
    testkit::Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        testkit::CspProfile prof;
        prof.variables = 1 + static_cast<std::size_t>(i % 4);
        prof.atoms = static_cast<std::size_t>(i % 5);
        prof.ops = kAllOperators;
        prof.allow_neq = true;
        CspInstance inst = testkit::gen_csp(rng, prof);
        EXPECT_EQ(parse_csp(format_csp(inst)), inst);
        EXPECT_EQ(csp_from_json(csp_to_json(inst)), inst);
    }
    CspInstance m = parse_csp("vars x y z;\nuspec powers:3|set:4,6\ntimes x y z\nU(z)\nx != y\n");
    EXPECT_EQ(m.signature.tag(), "neq-u-xrel");
    EXPECT_EQ(parse_csp(format_csp(m)), m);
}

TEST(Dsl, CspParsesSpecExamples)
{
    CspInstance inst = parse_csp("vars a b c;\n(plus a b) = (const 3)\na != b\nU(a)\ntimes a b c\n");
    ASSERT_EQ(inst.atoms.size(), 4U);
    EXPECT_TRUE(std::holds_alternative<EqAtom>(inst.atoms[0]));
    EXPECT_TRUE(std::holds_alternative<NeqAtom>(inst.atoms[1]));
    EXPECT_TRUE(std::holds_alternative<UAtom>(inst.atoms[2]));
    EXPECT_TRUE(std::holds_alternative<TimesRelAtom>(inst.atoms[3]));
    EXPECT_THROW(parse_csp("vars a;\n(plus a) = 3\n"), ParseError);
}

TEST(Instance, Validation)
{
    CspInstance inst = parse_csp("vars a;\n(plus a b) = (const 3)\n");
    EXPECT_FALSE(validate_instance(inst).empty());
    CspInstance sig = parse_csp("vars a;\nsignature cap\n(plus a a) = (const 2)\n");
    EXPECT_THROW(require_valid(sig), SignatureViolation);
    EXPECT_EQ(Signature::parse("cap-cup-not").tag(), "cap-cup-not");
    EXPECT_THROW(Signature::parse("cap-minus"), InvalidInput);
}

TEST(USpec, Membership)
{
    USpec p = USpec::powers(3);
    EXPECT_TRUE(p.contains(3));
    EXPECT_TRUE(p.contains(81));
    EXPECT_FALSE(p.contains(1));
    EXPECT_FALSE(p.contains(6));
    EXPECT_THROW(USpec::explicit_set({1, 4}), InvalidInput);
    EXPECT_THROW(USpec::powers(1), InvalidInput);
    USpec u = USpec::parse("powers:2|set:6,10");
    EXPECT_TRUE(u.contains(6));
    EXPECT_TRUE(u.contains(16));
    EXPECT_FALSE(u.contains(12));
    EXPECT_EQ(USpec::parse(u.str()), u);
}

TEST(FactorMap, ReconstructionUpTo1e5)
{
    for (std::uint64_t n = 1; n <= 100000; ++n) {
        FactorMap f = factorize(n);
        Natural prod = 1;
        for (const auto& [p, e] : f) {
            EXPECT_GE(e, 1U);
            prod *= pow_natural(p, e);
        }
        ASSERT_EQ(prod, n);
    }
}

TEST(Dimacs, ParsesAndRoundTrips)
{
    auto f = parse_dimacs("c small\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n");
    EXPECT_EQ(f.num_vars, 3U);
    EXPECT_EQ(f.clauses, (std::vector<std::vector<int>>{{1, -2}, {2, 3, -1}}));
    EXPECT_EQ(parse_dimacs(format_dimacs(f)).clauses, f.clauses);
    testkit::Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        auto g = testkit::gen_cnf(rng, {});
        ASSERT_EQ(parse_dimacs(format_dimacs(g)).clauses, g.clauses);
    }
}

TEST(Dimacs, ErrorsCarryPositions)
{
    try {
        parse_dimacs("p cnf 2 1\n1 x 0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2U);
        EXPECT_EQ(e.column(), 3U);
    }
    EXPECT_THROW(parse_dimacs("1 2 0\n"), ParseError);
    EXPECT_THROW(parse_dimacs("p cnf 2 1\n3 0\n"), ParseError);
    EXPECT_THROW(parse_dimacs("p cnf 2 2\n1 0\n"), ParseError);
    EXPECT_THROW(parse_dimacs("p cnf 30 1\n1 0\n"), ParseError);
}
