#include "skolem/dsl.hpp"
#include "skolem/reductions.hpp"
#include "skolem/testkit.hpp"

#include <gtest/gtest.h>

using namespace skolem;
using testkit::Rng;

namespace {

Circuit C(const char* text) { return term_to_circuit(parse_term(text)); }

std::vector<Natural> ns(std::initializer_list<unsigned> xs) { return {xs.begin(), xs.end()}; }

std::vector<std::uint64_t> window_members(const WindowedSet& w)
{
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < w.bits.size(); ++i)
        if (w.bits[i] == TriBool::True) out.push_back(i);
    return out;
}

bool window_fully_known(const WindowedSet& w)
{
    return std::none_of(w.bits.begin(), w.bits.end(), [](TriBool t) { return t == TriBool::Unknown; });
}

Term set_term(unsigned mask)
{
    std::optional<Term> t;
    for (unsigned i = 0; i < 4; ++i)
        if (mask & (1U << i)) t = t ? Term::unite(*t, Term::constant(i)) : Term::constant(i);
    return t ? *t : Term::intersect(Term::constant(0), Term::constant(1));
}

} // namespace

TEST(EvalExact, Examples)
{
    EXPECT_EQ(eval_exact(C("(union (times 2 3) 7)"), {}), SetValue(FiniteSet{ns({6, 7})}));
    EXPECT_EQ(eval_exact(C("(not (plus 2 3))"), {}), SetValue(CofiniteSet{ns({5})}));
}

TEST(EvalExact, CofiniteTimesCofiniteIsExactViaProfiles)
{
    // ¬0 × ¬0 is every positive number, which the profile class represents.
    auto v = eval_exact(C("(times (not 0) (not 0))"), {});
    ASSERT_TRUE(v);
    EXPECT_EQ(normalize(*v), SetValue(CofiniteSet{ns({0})}));
}

TEST(EvalExact, OutsideTheClassesIsAbsent)
{
    EXPECT_FALSE(eval_exact(C("(times (not (union 0 1)) 3)"), {}));
    // {a·b : a ≥ 2, b ≥ 3} is every composite except 4, which the profile class does hold.
    auto v = eval_exact(C("(times (not (union 0 1)) (not (union 0 (union 1 2))))"), {});
    ASSERT_TRUE(v);
    for (unsigned n = 0; n < 200; ++n) {
        bool composite = false;
        for (unsigned d = 2; d < n && !composite; ++d) composite = n % d == 0;
        EXPECT_EQ(contains(*v, n), tri(composite && n != 4)) << n;
    }
}

TEST(EvalExact, ComplementFreeIsFinite)
{
    Rng rng(11);
    testkit::CircuitProfile p;
    p.ops = OpSet{Op::Union, Op::Intersect, Op::Plus, Op::Times};
    for (int i = 0; i < 100; ++i) {
        auto c = testkit::gen_circuit(rng, p);
        auto v = eval_exact(c, {{"x", rng.range(0, 5)}, {"y", rng.range(0, 5)}});
        ASSERT_TRUE(v);
        EXPECT_TRUE(std::holds_alternative<FiniteSet>(*v));
    }
}

TEST(EvalExact, UnassignedInputIsAnError)
{
    EXPECT_THROW(eval_exact(C("(plus x 1)"), {}), InvalidInput);
}

TEST(EvalWindowed, Examples)
{
    auto w = eval_windowed(C("5"), {}, 10).back();
    EXPECT_EQ(window_members(w), (std::vector<std::uint64_t>{5}));
    EXPECT_EQ(w.tail, Tail::Empty);

    w = eval_windowed(C("(not (union 0 1))"), {}, 4).back();
    EXPECT_EQ(window_members(w), (std::vector<std::uint64_t>{2, 3, 4}));
    EXPECT_EQ(w.tail, Tail::All);
}

TEST(EvalWindowed, BoundBelowConstantIsRejected)
{
    EXPECT_THROW(eval_windowed(C("(plus 7 1)"), {}, 5), InvalidInput);
    EXPECT_THROW(eval_windowed(C("(plus x 1)"), {{"x", 9}}, 5), InvalidInput);
}

TEST(QTerm, PowersOfTwoHybrid)
{
    auto q = term_to_circuit(q_term());
    auto w = eval_windowed(q, {}, 64).back();
    EXPECT_EQ(window_members(w), (std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64}));
    EXPECT_TRUE(window_fully_known(w));
    EXPECT_NE(w.tail, Tail::Empty);
}

TEST(QTerm, PowersOfTwoPureWindow)
{
    auto q = term_to_circuit(q_term());
    WindowOptions opts;
    opts.exact_first = false;
    auto w = eval_windowed(q, {}, 64, opts).back();
    EXPECT_EQ(window_members(w), (std::vector<std::uint64_t>{1, 2, 4, 8, 16, 32, 64}));
    EXPECT_TRUE(window_fully_known(w));
    EXPECT_NE(w.tail, Tail::Empty);
}

TEST(QTerm, ExactValueIsPowersOfTwo)
{
    auto v = eval_term_exact(q_term(), {});
    ASSERT_TRUE(v);
    for (unsigned n = 0; n < 3000; ++n) EXPECT_EQ(contains(*v, n), tri(n && !(n & (n - 1)))) << n;
    EXPECT_EQ(contains(*v, Natural(1) << 900), TriBool::True);
    EXPECT_EQ(contains(*v, (Natural(1) << 900) * 3), TriBool::False);
}

TEST(Member, Examples)
{
    EXPECT_EQ(member(C("(times 2 3)"), {}, 6), TriBool::True);
    EXPECT_EQ(member(C("(not (union 0 1))"), {}, 1), TriBool::False);
    auto q = term_to_circuit(q_term());
    EXPECT_EQ(member(q, {}, 5), TriBool::False);
    EXPECT_EQ(member(q, {}, 8), TriBool::True);
    EXPECT_EQ(member(q, {}, 5, 16), TriBool::False);
    EXPECT_EQ(member(q, {}, 8, 16), TriBool::True);
}

TEST(Equiv, Examples)
{
    EXPECT_EQ(equiv(C("(not (plus 2 3))"), C("(not 5)"), {}, 10), TriBool::True);
    EXPECT_EQ(equiv(C("(union 1 2)"), C("1"), {}, 10), TriBool::False);
    // Differ only at multiples of 35 from 70 on; windows agree up to B.
    auto c1 = C("(times (not (union 0 1)) 3)");
    auto c2 = C("(union (times (not (union 0 1)) 3) (inter (times (not (union 0 1)) 5) (times (not (union 0 1)) 7)))");
    EXPECT_EQ(equiv(c1, c2, {}, 20), TriBool::Unknown);
    EXPECT_EQ(equiv(c1, c2, {}, 80), TriBool::False);
}

TEST(Nonempty, Examples)
{
    EXPECT_EQ(nonempty(FiniteSet{}), TriBool::False);
    EXPECT_EQ(nonempty(CofiniteSet{ns({0})}), TriBool::True);
    WindowedSet w{4, std::vector<TriBool>(5, TriBool::False), Tail::Unknown};
    EXPECT_EQ(nonempty(w), TriBool::Unknown);
    w.tail = Tail::Empty;
    EXPECT_EQ(nonempty(w), TriBool::False);
    w.tail = Tail::Some;
    EXPECT_EQ(nonempty(w), TriBool::True);
}

TEST(Property, OracleEquivalence)
{
    Rng rng(20240501);
    testkit::CircuitProfile p;
    p.ops = OpSet{Op::Union, Op::Intersect, Op::Plus, Op::Times};
    for (int i = 0; i < 500; ++i) {
        p.gates = rng.range(1, 10);
        auto c = testkit::gen_circuit(rng, p);
        Assignment a{{"x", rng.range(0, 5)}, {"y", rng.range(0, 5)}};
        auto v = eval_exact(c, a);
        ASSERT_TRUE(v);
        auto expect = testkit::naive_eval(c, a);
        ASSERT_EQ(*v, SetValue(FiniteSet{{expect.begin(), expect.end()}})) << format_circuit(c);
    }
}

namespace {
// Known window bits must agree with the exact value; tail claims must hold.
void expect_window_sound(const SetValue& exact, const WindowedSet& w, const std::string& ctx)
{
    for (std::size_t i = 0; i < w.bits.size(); ++i) {
        if (w.bits[i] != TriBool::Unknown) {
            ASSERT_EQ(w.bits[i], contains(exact, i)) << ctx << " at " << i;
        }
    }
    const std::uint64_t B = w.bound;
    if (w.tail == Tail::Empty || w.tail == Tail::All) {
        for (std::uint64_t n = B + 1; n <= 4 * B + 64; ++n)
            ASSERT_EQ(contains(exact, n), tri(w.tail == Tail::All)) << ctx << " tail at " << n;
    }
    if (w.tail == Tail::Some) {
        bool above = std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, FiniteSet>) return !s.elements.empty() && s.elements.back() > B;
                else if constexpr (std::is_same_v<T, CofiniteSet>) return true;
                else if constexpr (std::is_same_v<T, ProfileSet>) return s.has_element_above(B);
                else return false;
            },
            exact);
        ASSERT_TRUE(above) << ctx << " claims an element above " << B;
    }
}
} // namespace

TEST(Property, WindowedSoundness)
{
    Rng rng(77);
    testkit::CircuitProfile p;
    WindowOptions pure;
    pure.exact_first = false;
    WindowOptions nolook = pure;
    nolook.lookahead = false;
    int checked = 0;
    for (int i = 0; i < 400; ++i) {
        p.gates = rng.range(1, 8);
        auto c = testkit::gen_circuit(rng, p);
        Assignment a{{"x", rng.range(0, 5)}, {"y", rng.range(0, 5)}};
        auto ex = eval_exact_gates(c, a);
        for (std::uint64_t B : {5, 9, 24}) {
            auto hybrid = eval_windowed(c, a, B);
            auto w = eval_windowed(c, a, B, pure);
            auto w0 = eval_windowed(c, a, B, nolook);
            for (std::size_t k = 1; k <= c.size(); ++k) {
                if (!ex[k - 1]) continue;
                ++checked;
                std::string ctx = format_circuit(c) + " gate " + std::to_string(k) + " B=" + std::to_string(B);
                expect_window_sound(*ex[k - 1], w[k - 1], ctx);
                expect_window_sound(*ex[k - 1], w0[k - 1], ctx);
                expect_window_sound(*ex[k - 1], hybrid[k - 1], ctx);
                EXPECT_TRUE(window_fully_known(hybrid[k - 1])) << ctx;
            }
        }
    }
    EXPECT_GT(checked, 1000);
}

TEST(Property, MonotoneRefinement)
{
    Rng rng(5150);
    testkit::CircuitProfile p;
    for (int i = 0; i < 200; ++i) {
        p.gates = rng.range(2, 8);
        auto c = testkit::gen_circuit(rng, p);
        Assignment a{{"x", rng.range(0, 4)}, {"y", rng.range(0, 4)}};
        auto exact = eval_exact(c, a);
        for (unsigned b = 0; b <= 6; ++b) {
            std::optional<TriBool> seen;
            for (std::uint64_t B : {6, 8, 13, 21, 40, 80}) {
                TriBool m = member(c, a, b, B);
                if (m == TriBool::Unknown) {
                    ASSERT_FALSE(seen) << format_circuit(c) << " b=" << b << " lost its verdict at B=" << B;
                    continue;
                }
                if (exact) {
                    ASSERT_EQ(m, contains(*exact, b)) << format_circuit(c);
                }
                if (seen) {
                    ASSERT_EQ(m, *seen) << format_circuit(c) << " b=" << b;
                }
                seen = m;
            }
        }
    }
}

TEST(Property, ZeroRule)
{
    for (unsigned x = 0; x < 16; ++x) {
        for (unsigned y = 0; y < 16; ++y) {
            Term tx = set_term(x), ty = set_term(y);
            auto expect = testkit::naive_eval_term(Term::times(tx, ty), {});
            bool zero = expect.count(0);
            bool rule = ((x & 1U) && y) || ((y & 1U) && x);
            ASSERT_EQ(zero, rule);
            auto ex = exact::times(*eval_term_exact(tx, {}), *eval_term_exact(ty, {}));
            ASSERT_TRUE(ex);
            EXPECT_EQ(contains(*ex, 0), tri(zero));
            auto wx = window::from_exact(*eval_term_exact(tx, {}), 6);
            auto wy = window::from_exact(*eval_term_exact(ty, {}), 6);
            EXPECT_EQ(window::times(wx, wy).bits[0], tri(zero));
            // Without tail knowledge, 0 ∈ A×B is decided only when nonemptiness is known from the window.
            wx.tail = wy.tail = Tail::Unknown;
            TriBool w0 = window::times(wx, wy).bits[0];
            if (w0 != TriBool::Unknown) {
                EXPECT_EQ(w0, tri(zero));
            }
        }
    }
}

TEST(Property, Locality)
{
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
        unsigned b = rng.range(1, 12);
        std::set<Natural> A, B;
        for (unsigned n = 0; n <= b; ++n) {
            if (rng.chance(1, 3)) A.insert(n);
            if (rng.chance(1, 3)) B.insert(n);
        }
        auto members = [&](const std::set<Natural>& X, const std::set<Natural>& Y) {
            bool plus = false, times = false;
            for (const auto& x : X)
                for (const auto& y : Y) {
                    plus |= x + y == b;
                    times |= x * y == b;
                }
            return std::pair{plus, times};
        };
        auto base = members(A, B);
        for (int k = 0; k < 5; ++k) {
            auto A2 = A, B2 = B;
            for (int j = 0; j < 4; ++j) {
                A2.insert(b + 1 + rng.below(30));
                B2.insert(b + 1 + rng.below(30));
            }
            ASSERT_EQ(members(A2, B2), base);
        }
        // The engine reaches the same bit from windows that know nothing above b.
        auto to_window = [&](const std::set<Natural>& X) {
            WindowedSet w{b, std::vector<TriBool>(b + 1, TriBool::False), Tail::Unknown};
            for (const auto& x : X) w.bits[x.convert_to<std::size_t>()] = TriBool::True;
            return w;
        };
        auto wa = to_window(A), wb = to_window(B);
        EXPECT_EQ(window::plus(wa, wb).bits[b], tri(base.first));
        EXPECT_EQ(window::times(wa, wb).bits[b], tri(base.second));
    }
}

TEST(ExactOps, CofinitePlus)
{
    auto v = exact::plus(CofiniteSet{ns({0, 1, 2, 5})}, FiniteSet{ns({2, 3})});
    ASSERT_TRUE(v);
    // {3,4,6,7,...} + {2,3} misses 0..4 and nothing else.
    EXPECT_EQ(normalize(*v), SetValue(CofiniteSet{ns({0, 1, 2, 3, 4})}));
}

TEST(ExactOps, SpecialProducts)
{
    SetValue cof = CofiniteSet{ns({3})};
    EXPECT_EQ(exact::times(cof, FiniteSet{}), SetValue(FiniteSet{}));
    EXPECT_EQ(exact::times(cof, FiniteSet{ns({0})}), SetValue(FiniteSet{ns({0})}));
    EXPECT_EQ(normalize(*exact::times(cof, FiniteSet{ns({1})})), cof);
}
