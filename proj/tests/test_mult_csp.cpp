#include "skolem/dsl.hpp"
#include "skolem/mult_csp.hpp"
#include "skolem/testkit.hpp"

#include <gtest/gtest.h>

using namespace skolem;
using testkit::Rng;

namespace {

MulInstance M(const char* text) { return to_mul_instance(parse_csp(text)); }

MulInstance MU(const char* text, const char* u) { return M(("uspec " + std::string(u) + "\n" + text).c_str()); }

// Complete check of a Div_m instance: every variable ranges over the divisors of m.
std::optional<Assignment> solve_over_divisors(const MulInstance& inst, const Natural& m)
{
    return solve_mul_over(inst, divisors(m)).witness;
}

} // namespace

TEST(PreprocessZero, Examples)
{
    auto inst = MU("times x y z\nU(z)\n", "powers:2");
    auto p = preprocess_zero(inst);
    EXPECT_TRUE(p.forced.empty());
    EXPECT_EQ(p.positive.variables.size(), 3U);

    inst = MU("times x y z\nU(z)\ntimes w w w\n", "powers:2");
    p = preprocess_zero(inst);
    EXPECT_EQ(p.forced, (std::set<std::string>{"w"}));
    EXPECT_EQ(p.positive.atoms.size(), 2U);
    Assignment pos{{"x", 2}, {"y", 2}, {"z", 4}};
    EXPECT_TRUE(check_mul(inst, preprocess_transport(p, pos)));

    inst = M("times x x x\n");
    p = preprocess_zero(inst);
    EXPECT_EQ(p.forced, (std::set<std::string>{"x"}));
    EXPECT_TRUE(p.positive.atoms.empty());
    EXPECT_TRUE(check_mul(inst, preprocess_transport(p, {})));
}

TEST(PreprocessZero, Errors)
{
    EXPECT_THROW(preprocess_zero(M("x != y\n")), InvalidInput);
}

TEST(PreprocessZero, TransportOnRandomInstances)
{
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        testkit::MulProfile prof;
        prof.variables = rng.range(1, 4);
        prof.times_atoms = rng.range(0, 3);
        prof.u_atoms = rng.range(0, 2);
        auto inst = to_mul_instance(testkit::gen_mul_csp(rng, prof));
        auto p = preprocess_zero(inst);
        // Solutions of the positive part over small positive values lift to the original.
        auto csp = to_csp_instance(p.positive);
        std::vector<Natural> vals{1, 2, 4, 8, 16};
        auto s = testkit::exhaustive_over(csp, vals);
        if (s) {
            ASSERT_TRUE(check_mul(inst, preprocess_transport(p, *s)));
        }
        // Every original solution is nonzero on V'.
        auto full = testkit::exhaustive_over(to_csp_instance(inst), {0, 1, 2, 4, 8, 16});
        if (full) {
            for (const auto& v : p.positive.variables) ASSERT_NE(full->at(v), 0);
        }
    }
}

TEST(ToAdditive, Examples)
{
    auto add = to_additive(MU("times x y y\nU(y)\n", "powers:2"), 2);
    ASSERT_EQ(add.equations.size(), 1U);
    EXPECT_TRUE(add.satisfied_by({0, 1}));
    EXPECT_FALSE(add.satisfied_by({1, 1}));
    EXPECT_EQ(add.at_least_one, (std::vector<bool>{false, true}));

    add = to_additive(MU("U(x)\ntimes x x y\n", "powers:2"), 2);
    EXPECT_TRUE(add.satisfied_by({1, 2}));
    EXPECT_FALSE(add.satisfied_by({0, 0}));

    MulInstance empty;
    EXPECT_TRUE(rational_feasible(to_additive(empty, 2)));

    EXPECT_THROW(to_additive(M("x != y\n"), 2), SignatureViolation);
    EXPECT_THROW(to_additive(MU("U(x)\n", "powers:3"), 2), InvalidInput);
}

TEST(RationalFeasible, Examples)
{
    AdditiveInstance a;
    a.variables = {"x", "y"};
    a.equations = {{0, 0, 1}};
    a.at_least_one = {false, true};
    auto p = rational_feasible(a);
    ASSERT_TRUE(p);
    EXPECT_EQ(2 * (*p)[0], (*p)[1]);
    EXPECT_GE((*p)[1], 1);

    a.equations = {{0, 1, 0}};
    EXPECT_FALSE(rational_feasible(a));
}

TEST(RationalFeasible, RandomSystems)
{
    Rng rng(73478);
    int feasible = 0;
    for (int i = 0; i < 200; ++i) {
        AdditiveInstance a;
        std::size_t n = rng.range(1, 4);
        for (std::size_t v = 0; v < n; ++v) a.variables.push_back("e" + std::to_string(v));
        a.at_least_one.resize(n);
        for (std::size_t v = 0; v < n; ++v) a.at_least_one[v] = rng.chance(1, 2);
        for (std::size_t k = rng.range(0, 3); k > 0; --k)
            a.equations.push_back({rng.range(0, n - 1), rng.range(0, n - 1), rng.range(0, n - 1)});
        auto p = rational_feasible(a);
        // Integer search over [0..6]^n.
        std::optional<std::vector<Natural>> grid;
        std::vector<Natural> e(n, 0);
        for (;;) {
            if (a.satisfied_by(e)) {
                grid = e;
                break;
            }
            std::size_t j = n;
            while (j > 0 && e[j - 1] == 6) e[--j] = 0;
            if (j == 0) break;
            ++e[j - 1];
        }
        if (p) {
            ++feasible;
            auto cons = additive_constraints(a);
            for (const auto& c : cons) ASSERT_TRUE(lp::satisfies(c, *p));
            ASSERT_TRUE(a.satisfied_by(scale_to_integer(*p)));
        } else {
            ASSERT_FALSE(grid);
        }
        if (grid) {
            ASSERT_TRUE(p);
        }
    }
    EXPECT_GT(feasible, 50);
}

TEST(ScaleToInteger, Examples)
{
    Natural a;
    EXPECT_EQ(scale_to_integer({Rational(1, 2), Rational(1)}, &a), (std::vector<Natural>{1, 2}));
    EXPECT_EQ(a, 2);
    EXPECT_EQ(scale_to_integer({Rational(3), Rational(0)}, &a), (std::vector<Natural>{3, 0}));
    EXPECT_EQ(a, 1);
    EXPECT_EQ(scale_to_integer({Rational(1, 3), Rational(1, 2), Rational(5, 6)}), (std::vector<Natural>{2, 3, 5}));
}

TEST(SolveMul, Examples)
{
    auto inst = MU("U(y)\ntimes x y y\n", "powers:3");
    auto r = solve_mul(inst);
    ASSERT_EQ(r.status, Status::Sat);
    EXPECT_EQ(r.method, "lp");
    EXPECT_EQ(r.witness->at("x"), 1);
    EXPECT_EQ(r.witness->at("y"), 3);

    r = solve_mul(MU("U(x)\ntimes x x x\n", "powers:2"));
    EXPECT_EQ(r.status, Status::Unsat);

    inst = MU("U(x)\n", "set:6");
    r = solve_mul(inst);
    ASSERT_EQ(r.status, Status::Sat);
    EXPECT_EQ(r.method, "candidates");
    EXPECT_EQ(r.witness->at("x"), 6);
}

TEST(SolveMul, TraceRecordsScaling)
{
    // e_x + e_x = e_y with e_y ≥ 1 over ℚ may give e_x = 1/2.
    auto inst = MU("U(y)\ntimes x x y\ntimes w w w\n", "powers:5");
    auto r = solve_mul(inst);
    ASSERT_EQ(r.status, Status::Sat);
    EXPECT_EQ(r.trace.forced, (std::set<std::string>{"w"}));
    ASSERT_TRUE(r.trace.point);
    EXPECT_TRUE(check_mul(inst, *r.witness));
}

TEST(SolveMul, FallbackUnknownWhenNothingFound)
{
    // No product of two equal elements of {6} ∪ divisors equals a U-value.
    auto r = solve_mul(MU("U(y)\ntimes x x y\n", "set:6"));
    EXPECT_EQ(r.status, Status::Unknown);
    EXPECT_FALSE(r.note.empty());
}

TEST(SolveMul, PowersPipelineAgainstExponentSearch)
{
    Rng rng(4);
    int sat = 0, unsat = 0;
    for (int i = 0; i < 200; ++i) {
        const unsigned bases[] = {2, 3, 5};
        Natural m = bases[i % 3];
        testkit::MulProfile prof;
        prof.variables = rng.range(1, 4);
        prof.times_atoms = rng.range(1, 4);
        prof.u_atoms = rng.range(1, 2);
        prof.uspec = USpec::powers(m);
        auto csp = testkit::gen_mul_csp(rng, prof);
        auto inst = to_mul_instance(csp);
        auto r = solve_mul(inst);
        ASSERT_NE(r.status, Status::Unknown);
        if (r.status == Status::Sat) {
            ++sat;
            ASSERT_TRUE(check_mul(inst, *r.witness));
        } else {
            ++unsat;
            ASSERT_FALSE(testkit::exhaustive_over(csp, testkit::exponent_values(m, 6))) << format_csp(csp);
        }
    }
    EXPECT_GT(sat, 20);
    EXPECT_GT(unsat, 20);
}

TEST(Homomorphism, OmegaIsAdditive)
{
    // Ω by sieve up to 10^8 as an independent oracle for the products.
    const std::uint32_t N = 10000;
    std::vector<std::uint8_t> omega(static_cast<std::size_t>(N) * N + 1, 0);
    for (std::uint64_t p = 2; p < omega.size(); ++p) {
        if (omega[p] != 0) continue;
        for (std::uint64_t q = p; q < omega.size(); q *= p) {
            for (std::uint64_t k = q; k < omega.size(); k += q) ++omega[k];
            if (q > (omega.size() - 1) / p) break;
        }
    }
    std::vector<std::uint64_t> small(N + 1);
    for (std::uint32_t a = 1; a <= N; ++a) {
        small[a] = big_omega(a);
        ASSERT_EQ(small[a], omega[a]) << a;
    }
    for (std::uint64_t a = 1; a <= N; ++a)
        for (std::uint64_t b = 1; b <= N; ++b)
            if (small[a] + small[b] != omega[a * b]) FAIL() << a << "*" << b;
    for (unsigned a = 1; a <= 60; ++a)
        for (unsigned b = 1; b <= 60; ++b)
            ASSERT_EQ(exponent_homomorphism(3, a) * exponent_homomorphism(3, b), exponent_homomorphism(3, a * b));
}

TEST(NeqGadget, Examples)
{
    Cnf f{2, {{1, -2}}};
    auto g = gadget_3sat_to_neq_times(f);
    auto w = neq_gadget_witness(g, f, {true, false});
    EXPECT_TRUE(check_mul(g.instance, w));
    auto back = neq_gadget_to_sat(f, w);
    EXPECT_EQ(back, (std::vector<bool>{true, false}));
    EXPECT_EQ(solve_mul_bounded(g.instance, 2).status, Status::Sat);

    Cnf contra{1, {{1}, {-1}}};
    EXPECT_EQ(solve_mul_bounded(gadget_3sat_to_neq_times(contra).instance, 2).status, Status::NoWitnessUpTo);
}

TEST(NeqGadget, ZeroAndBooleanDomains)
{
    // The forcing part alone: z must be 0 and p, n split {0,1}, at any bound.
    Cnf f{2, {}};
    auto g = gadget_3sat_to_neq_times(f);
    auto csp = to_csp_instance(g.instance);
    for (const auto& s : testkit::exhaustive_csp(csp, 5)) {
        EXPECT_EQ(s.at(g.zero), 0);
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_LE(s.at(gadget_pos(i)), 1);
            EXPECT_EQ(s.at(gadget_pos(i)) + s.at(gadget_neg(i)), 1);
        }
    }
}

TEST(NeqGadget, AgreesWithBruteForceSat)
{
    Rng rng(6286);
    int sat = 0;
    for (int i = 0; i < 100; ++i) {
        testkit::CnfProfile p;
        p.variables = 6;
        p.clauses = rng.range(10, 32);
        auto f = testkit::gen_cnf(rng, p);
        auto g = gadget_3sat_to_neq_times(f);
        auto b = testkit::brute_force_sat(f);
        auto r = solve_mul_bounded(g.instance, 2);
        ASSERT_EQ(r.status == Status::Sat, b.has_value());
        if (b) {
            ++sat;
            ASSERT_TRUE(check_mul(g.instance, neq_gadget_witness(g, f, *b)));
            ASSERT_TRUE(f.satisfied_by(neq_gadget_to_sat(f, *r.witness)));
            for (const auto& [v, x] : *r.witness) {
                if (v != g.zero_witness) {
                    ASSERT_LE(x, 1) << v;
                }
            }
        }
    }
    EXPECT_GT(sat, 10);
    EXPECT_LT(sat, 95);
}

TEST(ConstGadget, Examples)
{
    auto u = USpec::parse("set:6,10");
    auto inst = M("times x y c\nc = 6\n");
    auto g = gadget_constant(inst, u, 6);
    auto in = solve_over_divisors(inst, 6);
    ASSERT_TRUE(in);
    auto out = solve_mul_bounded(g.instance, 10);
    ASSERT_EQ(out.status, Status::Sat);
    EXPECT_TRUE(check_mul(g.instance, const_gadget_forward(g, *in)));
    auto back = const_gadget_backward(g, inst, *out.witness);
    EXPECT_TRUE(check_mul(inst, back));

    // A solution using v_m = 10 instead of 6 still maps back.
    Assignment ten{{"v_m", 10}, {"x", 2}, {"y", 5}, {"y_x", 5}, {"y_y", 2}};
    ASSERT_TRUE(check_mul(g.instance, ten));
    EXPECT_TRUE(check_mul(inst, const_gadget_backward(g, inst, ten)));

    auto sq = M("times c c c\nc = 6\n");
    EXPECT_FALSE(solve_over_divisors(sq, 6));
    auto gs = gadget_constant(sq, u, 6);
    EXPECT_EQ(solve_mul_bounded(gs.instance, 12).status, Status::NoWitnessUpTo);

    MulInstance empty;
    auto ge = gadget_constant(empty, u, 6);
    EXPECT_EQ(solve_mul_bounded(ge.instance, 6).status, Status::Sat);
}

TEST(ConstGadget, Errors)
{
    auto inst = M("times x y c\nc = 6\n");
    EXPECT_THROW(gadget_constant(inst, USpec::parse("set:4,6"), 6), InvalidInput);
    EXPECT_THROW(gadget_constant(inst, USpec::parse("set:10"), 6), InvalidInput);
    EXPECT_THROW(gadget_constant(inst, USpec::parse("powers:6"), 6), InvalidInput);
}

TEST(ConstGadget, RandomTransport)
{
    Rng rng(9);
    auto u = USpec::parse("set:6,30");
    for (int i = 0; i < 60; ++i) {
        testkit::MulProfile prof;
        prof.variables = rng.range(1, 3);
        prof.times_atoms = rng.range(1, 2);
        prof.u_atoms = 0;
        auto csp = testkit::gen_mul_csp(rng, prof);
        csp.variables.push_back("c");
        csp.atoms.push_back(TimesRelAtom{csp.variables[0], "c", "c"});
        csp.atoms.push_back(EqAtom{Term::var("c"), Term::constant(6)});
        auto inst = to_mul_instance(csp);
        auto g = gadget_constant(inst, u, 6);
        auto in = solve_over_divisors(inst, 6);
        // Every output variable divides v_m ∈ {6, 30}.
        auto out = solve_over_divisors(g.instance, 30);
        ASSERT_EQ(in.has_value(), out.has_value()) << format_csp(csp);
        if (in) {
            ASSERT_TRUE(check_mul(g.instance, const_gadget_forward(g, *in)));
            ASSERT_TRUE(check_mul(inst, const_gadget_backward(g, inst, *out)));
        }
    }
}

TEST(Xi, Example)
{
    Natural big = 506250000;  // 2^4·3^4·5^8
    auto xi = xi_construct(USpec::explicit_set({4, 108, big}));
    EXPECT_EQ(xi.r, 4U);
    EXPECT_EQ(xi.exponents, (std::vector<std::uint64_t>{8}));
    EXPECT_EQ(xi.witness, big);
    EXPECT_EQ(xi.q, 6);
    EXPECT_TRUE(xi.contains(6));
    EXPECT_TRUE(xi.contains(150));
    EXPECT_FALSE(xi.contains(1));
    EXPECT_FALSE(xi.contains(2));
    auto members = xi.members();
    ASSERT_FALSE(members.empty());
    for (const auto& y : members) {
        ASSERT_LT(y, 1000000);
        EXPECT_EQ(minexp(y), 1U) << y;
    }
    // members() agrees with a direct scan.
    std::vector<Natural> scan;
    for (unsigned y = 1; y < 1000; ++y)
        if (xi.contains(y)) scan.push_back(y);
    EXPECT_EQ(scan, members);
}

TEST(Xi, Errors)
{
    EXPECT_THROW(xi_construct(USpec::explicit_set({4})), InvalidInput);
    EXPECT_THROW(xi_construct(USpec::explicit_set({6, 10})), InvalidInput);
    EXPECT_THROW(xi_construct(USpec::powers(2)), InvalidInput);
}
