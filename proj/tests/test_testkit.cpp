#include "skolem/dsl.hpp"
#include "skolem/set_engine.hpp"
#include "skolem/testkit.hpp"

#include <gtest/gtest.h>

using namespace skolem;
using testkit::Rng;

namespace {
std::set<Natural> S(std::initializer_list<unsigned> xs) { return {xs.begin(), xs.end()}; }
} // namespace

TEST(NaiveEval, Examples)
{
    auto c = parse_circuit("gate 1 = const 2\ngate 2 = const 3\ngate 3 = times 1 2\ngate 4 = const 7\n"
                           "gate 5 = union 3 4\noutput 5\n");
    EXPECT_EQ(testkit::naive_eval(c, {}), S({6, 7}));
    c = parse_circuit("gate 1 = const 0\ngate 2 = plus 1 1\noutput 2\n");
    EXPECT_EQ(testkit::naive_eval(c, {}), S({0}));
    c = parse_circuit("gate 1 = const 1\ngate 2 = const 2\ngate 3 = union 1 2\ngate 4 = plus 3 3\noutput 4\n");
    EXPECT_EQ(testkit::naive_eval(c, {}), S({2, 3, 4}));
    c = parse_circuit("gate 1 = var x\ngate 2 = const 4\ngate 3 = inter 1 2\noutput 3\n");
    EXPECT_EQ(testkit::naive_eval(c, {{"x", 4}}), S({4}));
    EXPECT_TRUE(testkit::naive_eval(c, {{"x", 3}}).empty());
}

TEST(NaiveEval, Errors)
{
    auto c = parse_circuit("gate 1 = const 1\ngate 2 = not 1\noutput 2\n");
    EXPECT_THROW(testkit::naive_eval(c, {}), InvalidInput);
    c = parse_circuit("gate 1 = var x\noutput 1\n");
    EXPECT_THROW(testkit::naive_eval(c, {}), InvalidInput);
}

TEST(NaiveEval, AgreesWithSetEngine)
{
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        testkit::CircuitProfile p;
        p.gates = rng.range(1, 10);
        p.ops = OpSet{Op::Union, Op::Intersect, Op::Plus, Op::Times};
        auto c = testkit::gen_circuit(rng, p);
        Assignment a{{"x", rng.range(0, 5)}, {"y", rng.range(0, 5)}};
        auto v = eval_exact(c, a);
        ASSERT_TRUE(v.has_value());
        auto expect = testkit::naive_eval(c, a);
        ASSERT_EQ(*v, SetValue(FiniteSet{{expect.begin(), expect.end()}})) << format_circuit(c);
    }
}

TEST(Rng, Deterministic)
{
    Rng a(9), b(9), c(10);
    for (int i = 0; i < 50; ++i) {
        auto x = a.next();
        ASSERT_EQ(x, b.next());
        ASSERT_NE(x, c.next());
    }
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        auto x = r.range(3, 7);
        ASSERT_GE(x, 3U);
        ASSERT_LE(x, 7U);
    }
    EXPECT_THROW(r.below(0), InvalidInput);
}

TEST(Generators, SameSeedSameInstance)
{
    testkit::CircuitProfile cp;
    Rng a(42), b(42);
    EXPECT_EQ(format_circuit(testkit::gen_circuit(a, cp)), format_circuit(testkit::gen_circuit(b, cp)));
    testkit::CspProfile sp;
    EXPECT_EQ(format_csp(testkit::gen_csp(a, sp)), format_csp(testkit::gen_csp(b, sp)));
    testkit::CnfProfile fp;
    auto f1 = testkit::gen_cnf(a, fp), f2 = testkit::gen_cnf(b, fp);
    EXPECT_EQ(f1.clauses, f2.clauses);
    testkit::MulProfile mp;
    EXPECT_EQ(format_csp(testkit::gen_mul_csp(a, mp)), format_csp(testkit::gen_mul_csp(b, mp)));
}

TEST(Generators, RespectProfile)
{
    testkit::CircuitProfile p;
    p.gates = 5;
    p.ops = OpSet{Op::Union, Op::Times};
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        auto c = testkit::gen_circuit(rng, p);
        ASSERT_EQ(c.size(), 5U);
        ASSERT_TRUE(validate_circuit(c).empty());
        ASSERT_TRUE(ops_used(c).subset_of(p.ops)) << format_circuit(c);
        ASSERT_LE(max_constant(c), p.max_constant);
    }
    testkit::CnfProfile fp;
    Rng rng(3);
    auto f = testkit::gen_cnf(rng, fp);
    ASSERT_EQ(f.clauses.size(), fp.clauses);
    for (const auto& cl : f.clauses) {
        ASSERT_EQ(cl.size(), 3U);
        for (int l : cl) {
            ASSERT_GE(std::abs(l), 1);
            ASSERT_LE(std::abs(l), 6);
        }
    }
}

TEST(Generators, SeedSweepGivesDistinctInstances)
{
    std::set<std::string> circuits, csps;
    testkit::CircuitProfile cp;
    cp.gates = 6;
    testkit::CspProfile sp;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng r1(seed), r2(seed);
        circuits.insert(format_circuit(testkit::gen_circuit(r1, cp)));
        csps.insert(format_csp(testkit::gen_csp(r2, sp)));
    }
    EXPECT_EQ(circuits.size(), 100U);
    EXPECT_EQ(csps.size(), 100U);
}

TEST(Exhaustive, Examples)
{
    auto sols = testkit::exhaustive_csp(parse_csp("(times x x) = x\n"), 3);
    ASSERT_EQ(sols.size(), 2U);
    EXPECT_EQ(sols[0].at("x"), 0);
    EXPECT_EQ(sols[1].at("x"), 1);

    EXPECT_TRUE(testkit::exhaustive_csp(parse_csp("(plus x 1) = x\n"), 6).empty());

    sols = testkit::exhaustive_csp(parse_csp("(times x y) = 6\n"), 6);
    std::vector<std::pair<Natural, Natural>> got;
    for (const auto& a : sols) got.emplace_back(a.at("x"), a.at("y"));
    EXPECT_EQ(got, (std::vector<std::pair<Natural, Natural>>{{1, 6}, {2, 3}, {3, 2}, {6, 1}}));
}

TEST(Exhaustive, ComplementHandledPointwise)
{
    // not x = not 2 forces x = 2.
    auto sols = testkit::exhaustive_csp(parse_csp("(not x) = (not 2)\n"), 5);
    ASSERT_EQ(sols.size(), 1U);
    EXPECT_EQ(sols[0].at("x"), 2);
    // For x = 0 both sides are everything from 2 on.
    auto r = testkit::oracle_check(parse_csp("(plus (not x) (not x)) = (not (union 0 1))\n"), {{"x", 0}});
    ASSERT_TRUE(r.has_value());
    EXPECT_TRUE(*r);
    EXPECT_FALSE(testkit::oracle_check(parse_csp("(times (not x) x) = x\n"), {{"x", 0}}).has_value());
}

TEST(Exhaustive, OverValues)
{
    auto inst = parse_csp("uspec powers:2\nvars a b;\ntimes a a b\nU(b)\n");
    auto w = testkit::exhaustive_over(inst, testkit::exponent_values(2, 3));
    ASSERT_TRUE(w.has_value());
    EXPECT_EQ(w->at("a") * w->at("a"), w->at("b"));
    EXPECT_EQ(testkit::exponent_values(3, 2), (std::vector<Natural>{0, 1, 3, 9}));
}

TEST(BruteForceSat, Examples)
{
    Cnf f{2, {{1, 2}, {-1}, {-2}}};
    EXPECT_FALSE(testkit::brute_force_sat(f).has_value());
    Cnf g{2, {{1, 2}, {-1}}};
    auto w = testkit::brute_force_sat(g);
    ASSERT_TRUE(w.has_value());
    EXPECT_TRUE(g.satisfied_by(*w));
}
