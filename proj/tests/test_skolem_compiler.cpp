#include "skolem/dsl.hpp"
#include "skolem/skolem_compiler.hpp"
#include "skolem/testkit.hpp"

#include <gtest/gtest.h>

using namespace skolem;
using testkit::Rng;
using namespace skolem::fo;

namespace {

Circuit C(const char* text) { return parse_circuit(text); }

// Largest per-gate contribution to fo_size; the × gate dominates.
constexpr std::size_t kNodesPerGate = 120;

Circuit random_circuit(Rng& rng, std::size_t max_gates)
{
    testkit::CircuitProfile p;
    p.gates = rng.range(1, max_gates);
    p.ops = OpSet{Op::Complement, Op::Union, Op::Times};
    p.max_constant = 4;
    return testkit::gen_circuit(rng, p);
}

} // namespace

TEST(EliminateCap, Examples)
{
    auto plain = C("gate 1 = var x\ngate 2 = not 1\ngate 3 = times 1 2\noutput 3\n");
    EXPECT_EQ(format_circuit(eliminate_cap(plain)), format_circuit(plain));

    auto c = C("gate 1 = const 2\ngate 2 = const 3\ngate 3 = inter 1 2\noutput 3\n");
    auto e = eliminate_cap(c);
    EXPECT_EQ(e.size(), 6U);
    EXPECT_FALSE(ops_used(e).contains(Op::Intersect));
    EXPECT_TRUE(exact::is_empty_set(*eval_exact(e, {})));
    EXPECT_TRUE(exact::is_empty_set(*eval_exact(c, {})));

    c = C("gate 1 = var x\ngate 2 = var x\ngate 3 = inter 1 2\noutput 3\n");
    e = eliminate_cap(c);
    for (unsigned x = 0; x <= 5; ++x) EXPECT_EQ(*eval_exact(e, {{"x", x}}), *eval_exact(c, {{"x", x}}));
}

TEST(EliminateCap, PreservesValues)
{
    Rng rng(5147);
    for (int i = 0; i < 200; ++i) {
        testkit::CircuitProfile p;
        p.gates = rng.range(1, 8);
        p.ops = OpSet{Op::Complement, Op::Union, Op::Intersect, Op::Times, Op::Plus};
        auto c = testkit::gen_circuit(rng, p);
        auto e = eliminate_cap(c);
        Assignment a{{"x", rng.range(0, 5)}, {"y", rng.range(0, 5)}};
        for (unsigned v = 0; v <= 30; ++v) {
            ASSERT_EQ(member(c, a, v), member(e, a, v)) << format_circuit(c) << " v=" << v;
        }
    }
}

TEST(CompileCircuit, Examples)
{
    auto input = C("gate 1 = var x\noutput 1\n");
    auto f = compile_circuit(input, 5);
    EXPECT_TRUE(free_variables(f).empty());
    // The body with a_x = 5 substituted holds; with 4 it does not.
    ASSERT_EQ(f.kind(), FoKind::Exists);
    EXPECT_EQ(bounded_eval_fo(substitute(f.kids()[0], {{input_var("x"), 5}}), 7).value, TriBool::True);
    EXPECT_EQ(bounded_eval_fo(substitute(f.kids()[0], {{input_var("x"), 4}}), 7).value, TriBool::False);
    auto v = bounded_eval_fo(f, 7);
    EXPECT_EQ(v.value, TriBool::True);
    EXPECT_TRUE(v.sound == is_existential(f));

    auto three = C("gate 1 = const 3\noutput 1\n");
    EXPECT_EQ(bounded_eval_fo(compile_circuit(three, 3), agreement_bound(three, 3)).value, TriBool::True);
    EXPECT_EQ(bounded_eval_fo(compile_circuit(three, 4), agreement_bound(three, 4)).value, TriBool::False);

    auto times = C("gate 1 = var x\ngate 2 = const 2\ngate 3 = times 1 2\noutput 3\n");
    f = compile_circuit(times, 6);
    EXPECT_EQ(bounded_eval_fo(substitute(f.kids()[0], {{input_var("x"), 3}}), agreement_bound(times, 6)).value,
              TriBool::True);
    EXPECT_EQ(bounded_eval_fo(compile_circuit(times, 7), agreement_bound(times, 7)).value, TriBool::False);
}

TEST(CompileCircuit, Errors)
{
    EXPECT_THROW(compile_circuit(C("gate 1 = var x\ngate 2 = inter 1 1\noutput 2\n"), 1), InvalidInput);
    EXPECT_THROW(compile_circuit(C("gate 1 = var x\ngate 2 = plus 1 1\noutput 2\n"), 1), SignatureViolation);
}

TEST(CompileCircuit, LinearSize)
{
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        auto c = random_circuit(rng, 12);
        auto f = compile_circuit(c, rng.range(0, 20));
        ASSERT_LE(fo_size(f), kNodesPerGate * (c.output() + 1)) << format_circuit(c);
    }
}

TEST(BoundedEval, Examples)
{
    auto sq4 = Fo::exists({"x"}, Fo::eq({var("x"), var("x")}, {num(4)}));
    auto v = bounded_eval_fo(sq4, 3);
    EXPECT_EQ(v.value, TriBool::True);
    EXPECT_TRUE(v.sound);

    auto unit = Fo::forall({"x"}, Fo::eq({var("x"), num(1)}, {var("x")}));
    v = bounded_eval_fo(unit, 5);
    EXPECT_EQ(v.value, TriBool::True);
    EXPECT_FALSE(v.sound);

    auto sq2 = Fo::exists({"x"}, Fo::eq({var("x"), var("x")}, {num(2)}));
    v = bounded_eval_fo(sq2, 10);
    EXPECT_EQ(v.value, TriBool::False);
    EXPECT_FALSE(v.sound);

    EXPECT_THROW(bounded_eval_fo(eq_var("x", 1), 3), InvalidInput);
}

TEST(BoundedEval, Alternation)
{
    auto xy = [](Natural n) { return Fo::eq({var("x"), var("y")}, {n == 0 ? num(0) : var("x")}); };
    EXPECT_EQ(bounded_eval_fo(Fo::forall({"x"}, Fo::exists({"y"}, xy(0))), 6).value, TriBool::True);
    EXPECT_EQ(bounded_eval_fo(Fo::exists({"y"}, Fo::forall({"x"}, xy(1))), 6).value, TriBool::True);
    EXPECT_EQ(bounded_eval_fo(Fo::exists({"y"}, Fo::forall({"x"}, Fo::negate(xy(0)))), 6).value, TriBool::False);
    // Doubling stays inside [0..Q] only for Q = 0.
    auto dbl = Fo::forall({"x"}, Fo::exists({"y"}, Fo::eq({var("x"), num(2)}, {var("y")})));
    EXPECT_EQ(bounded_eval_fo(dbl, 0).value, TriBool::True);
    EXPECT_EQ(bounded_eval_fo(dbl, 4).value, TriBool::False);
}

TEST(CspToSentence, Examples)
{
    auto bound = [](const CspInstance& inst) {
        return agreement_bound(eliminate_cap(csp_to_sc(inst).circuit), 0);
    };
    auto inst = parse_csp("y = y\n");
    EXPECT_EQ(bounded_eval_fo(csp_to_sentence(inst), bound(inst)).value, TriBool::True);

    auto f = csp_to_sentence(parse_csp("1 = 2\n"));
    for (std::uint64_t q = 4; q <= 8; ++q) EXPECT_EQ(bounded_eval_fo(f, q).value, TriBool::False) << q;

    inst = parse_csp("(times y y) = y\n");
    f = csp_to_sentence(inst);
    ASSERT_EQ(f.kind(), FoKind::Exists);
    EXPECT_EQ(bounded_eval_fo(substitute(f.kids()[0], {{input_var("y"), 0}}), bound(inst)).value, TriBool::True);
}

TEST(Smt2, Example)
{
    auto f = Fo::exists({"x"}, Fo::eq({var("x"), var("x")}, {var("x")}));
    EXPECT_EQ(to_smt2_script(f), "(assert (exists ((x Int)) (and (>= x 0) (= (* x x) x))))\n(check-sat)\n");
    EXPECT_EQ(parse_smt2(to_smt2_script(f)), f);
}

TEST(Smt2, ParseErrors)
{
    EXPECT_THROW(parse_smt2("(assert (exists ((x Int)) (and (>= x 0) (= x 1)))"), ParseError);
    EXPECT_THROW(parse_smt2("(assert (+ x 1))"), ParseError);
}

TEST(Serialization, RoundTripsCompiledSentences)
{
    Rng rng(77);
    for (int i = 0; i < 100; ++i) {
        auto c = eliminate_cap(random_circuit(rng, 6));
        auto f = compile_circuit(c, rng.range(0, 12));
        ASSERT_EQ(parse_smt2(to_smt2_script(f)), f) << format_circuit(c);
        ASSERT_EQ(parse_smt2(to_smt2(f)), f);
        ASSERT_EQ(fo_from_json(Json::parse(fo_to_json(f).dump())), f);
    }
}

TEST(CompileCircuit, AgreesWithSetEngine)
{
    Rng rng(1);
    int yes = 0;
    for (int i = 0; i < 200; ++i) {
        auto c = random_circuit(rng, 6);
        unsigned v = rng.range(0, 12);
        auto Q = agreement_bound(c, v);
        auto fv = bounded_eval_fo(compile_circuit(c, v), Q);
        auto sc = solve_sc_bounded(c, v, Q);
        ASSERT_NE(fv.value, TriBool::Unknown) << format_circuit(c) << "v=" << v;
        ASSERT_NE(sc.status, Status::Unknown);
        ASSERT_EQ(fv.value == TriBool::True, sc.status == Status::Sat) << format_circuit(c) << "v=" << v;
        if (sc.status == Status::Sat) ++yes;
    }
    EXPECT_GT(yes, 40);
    EXPECT_LT(yes, 180);
}
