#pragma once

// Factorisation-level utilities: minexp, basis, divisors, two-element cores
// of (Div_m; ×, m) and a small weak-near-unanimity polymorphism search.

#include "skolem/instance.hpp"

#include <map>
#include <numeric>

namespace skolem {

/** prime -> exponent (>= 1); the empty map represents 1. */
using FactorMap = std::map<Natural, std::uint64_t>;

/** Trial division; n must be >= 1 and fit in 64 bits. */
inline FactorMap factorize(const Natural& n)
{
    if (n <= 0) throw InvalidInput("factorize: n must be >= 1");
    std::uint64_t x = to_u64(n);
    FactorMap f;
    for (std::uint64_t p = 2; p <= x / p; p += (p == 2 ? 1 : 2)) {
        while (x % p == 0) {
            ++f[p];
            x /= p;
        }
    }
    if (x > 1) ++f[x];
    return f;
}

inline Natural reconstruct(const FactorMap& f)
{
    Natural n = 1;
    for (const auto& [p, e] : f) n *= pow_natural(p, e);
    return n;
}

inline std::uint64_t minexp(const Natural& n)
{
    if (n < 2) throw InvalidInput("minexp: n must be >= 2");
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (const auto& [p, e] : factorize(n)) best = std::min(best, e);
    return best;
}

inline bool has_degree_one_factor(const Natural& n) { return minexp(n) == 1; }

inline bool is_perfect_power(const Natural& n)
{
    if (n < 2) return false;
    std::uint64_t g = 0;
    for (const auto& [p, e] : factorize(n)) g = std::gcd(g, e);
    return g >= 2;
}

struct Basis {
    bool infinite = false;
    std::set<std::uint64_t> values;  // meaningful when !infinite
    bool operator==(const Basis&) const = default;
};

/** {minexp(x) : x ∈ U}; any powers component makes it infinite. */
inline Basis basis(const USpec& u)
{
    Basis b;
    switch (u.kind()) {
    case USpec::Kind::Powers: b.infinite = true; break;
    case USpec::Kind::Explicit:
        for (const auto& x : u.elements()) b.values.insert(minexp(x));
        break;
    case USpec::Kind::UnionOf:
        for (const auto& p : u.parts()) {
            Basis s = basis(p);
            b.infinite = b.infinite || s.infinite;
            b.values.insert(s.values.begin(), s.values.end());
        }
        if (b.infinite) b.values.clear();
        break;
    }
    return b;
}

inline std::vector<Natural> divisors(const Natural& m)
{
    std::vector<Natural> out{1};
    for (const auto& [p, e] : factorize(m)) {
        std::size_t n = out.size();
        Natural pk = 1;
        for (std::uint64_t k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < n; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/** Least prime p with p | m and p² ∤ m. */
inline std::optional<Natural> least_degree_one_prime(const Natural& m)
{
    for (const auto& [p, e] : factorize(m))
        if (e == 1) return p;
    return std::nullopt;
}

using DivisorMap = std::map<Natural, Natural>;

/**
 * e(x) = m when p | x, else 1, for the least degree-one prime p of m: the
 * multiplicative extension of e(p) = m and e(q) = 1 for the other primes.
 */
inline DivisorMap core_endomorphism(const Natural& m)
{
    if (m < 2) throw InvalidInput("core_endomorphism: m must be >= 2");
    auto p = least_degree_one_prime(m);
    if (!p) throw InvalidInput("core_endomorphism: " + m.str() + " has no degree-one prime factor");
    DivisorMap e;
    for (const auto& x : divisors(m)) e[x] = (x % *p == 0) ? m : Natural(1);
    return e;
}

/** Checks e(m) = m and e(x)·e(y) = e(xy) for every x·y = z inside Div_m. */
inline bool is_endomorphism(const Natural& m, const DivisorMap& e)
{
    auto div = divisors(m);
    if (e.size() != div.size() || e.at(m) != m) return false;
    for (const auto& x : div)
        for (const auto& y : div) {
            Natural z = x * y;
            if (m % z != 0) continue;
            if (e.at(x) * e.at(y) != e.at(z)) return false;
        }
    return true;
}

/**
 * Exhaustive confirmation that no map Div_m → {1, m} fixes m and preserves
 * the ×-triples of Div_m. Requires minexp(m) >= 2. Returns true when no such
 * map exists.
 */
inline bool no_two_element_core_check(const Natural& m)
{
    if (m < 2 || minexp(m) < 2)
        throw InvalidInput("no_two_element_core_check: " + m.str() + " has a degree-one prime factor");
    auto div = divisors(m);
    const std::size_t n = div.size();
    std::map<Natural, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i) index[div[i]] = i;
    // Triples (i, j, k) with div[i]·div[j] = div[k], checked once the largest index is set.
    std::vector<std::vector<std::array<std::size_t, 3>>> by_last(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Natural z = div[i] * div[j];
            if (m % z != 0) continue;
            std::size_t k = index[z];
            by_last[std::max({i, j, k})].push_back({i, j, k});
        }
    std::vector<Natural> val(n);
    std::function<bool(std::size_t)> extend = [&](std::size_t i) -> bool {
        if (i == n) return true;
        for (const Natural& c : {Natural(1), m}) {
            if (i == n - 1 && c != m) continue;  // div.back() == m must be fixed
            val[i] = c;
            bool ok = true;
            for (const auto& t : by_last[i])
                if (val[t[0]] * val[t[1]] != val[t[2]]) {
                    ok = false;
                    break;
                }
            if (ok && extend(i + 1)) return true;
        }
        return false;
    };
    return !extend(0);
}

// ---------------------------------------------------------------------------
// Weak near-unanimity search

/** A relation over domain indices; every tuple has the same arity. */
struct FiniteRelation {
    std::size_t arity = 0;
    std::vector<std::vector<std::size_t>> tuples;
};

struct WnuResult {
    bool found = false;
    std::size_t arity = 0;
    std::vector<std::size_t> table;  // row-major over D^k, entry = domain index
    std::size_t nodes = 0;
};

/**
 * Backtracking search for an idempotent k-ary operation f on the domain with
 * f(y,x,..,x) = f(x,y,x,..,x) = ... = f(x,..,x,y) that preserves every relation.
 * Entries forced equal by the WNU identities share one search variable.
 */
inline WnuResult wnu_search(std::size_t domain_size, const std::vector<FiniteRelation>& relations, std::size_t k)
{
    if (domain_size == 0 || domain_size > 6 || k < 2 || k > 3)
        throw InvalidInput("wnu_search: supports domains of size 1..6 and arity 2..3");
    const std::size_t d = domain_size;
    std::size_t cells = 1;
    for (std::size_t i = 0; i < k; ++i) cells *= d;
    auto encode = [&](const std::vector<std::size_t>& args) {
        std::size_t c = 0;
        for (std::size_t a : args) c = c * d + a;
        return c;
    };

    // Union-find over cells for the WNU identities.
    std::vector<std::size_t> parent(cells);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    std::vector<int> fixed(cells, -1);
    for (std::size_t x = 0; x < d; ++x) {
        fixed[encode(std::vector<std::size_t>(k, x))] = static_cast<int>(x);
        for (std::size_t y = 0; y < d; ++y) {
            if (x == y) continue;
            std::size_t first = 0;
            for (std::size_t pos = 0; pos < k; ++pos) {
                std::vector<std::size_t> args(k, x);
                args[pos] = y;
                std::size_t c = encode(args);
                if (pos == 0) first = c;
                else parent[find(c)] = find(first);
            }
        }
    }
    std::vector<std::size_t> classes;
    std::vector<std::size_t> class_of(cells);
    std::map<std::size_t, std::size_t> root_index;
    for (std::size_t c = 0; c < cells; ++c) {
        std::size_t r = find(c);
        auto [it, inserted] = root_index.emplace(r, classes.size());
        if (inserted) classes.push_back(r);
        class_of[c] = it->second;
    }
    std::vector<int> value(classes.size(), -1);
    for (std::size_t c = 0; c < cells; ++c)
        if (fixed[c] >= 0) value[class_of[c]] = fixed[c];

    // Preservation constraints: for each relation and each k-tuple of its
    // tuples, the coordinate-wise images must form a tuple of the relation.
    struct Constraint {
        std::size_t relation;
        std::vector<std::size_t> cls;  // class per coordinate
    };
    std::vector<std::vector<Constraint>> by_last(classes.size() + 1);
    std::vector<std::set<std::vector<std::size_t>>> rel_sets;
    for (const auto& r : relations) rel_sets.emplace_back(r.tuples.begin(), r.tuples.end());
    for (std::size_t ri = 0; ri < relations.size(); ++ri) {
        const auto& R = relations[ri];
        const std::size_t nt = R.tuples.size();
        std::size_t combos = 1;
        for (std::size_t i = 0; i < k; ++i) combos *= nt;
        for (std::size_t combo = 0; combo < combos; ++combo) {
            std::vector<std::size_t> pick(k);
            std::size_t rest = combo;
            for (std::size_t i = 0; i < k; ++i) {
                pick[i] = rest % nt;
                rest /= nt;
            }
            Constraint con{ri, {}};
            std::size_t last = 0;
            for (std::size_t col = 0; col < R.arity; ++col) {
                std::vector<std::size_t> args(k);
                for (std::size_t i = 0; i < k; ++i) args[i] = R.tuples[pick[i]][col];
                std::size_t cl = class_of[encode(args)];
                con.cls.push_back(cl);
                if (value[cl] < 0) last = std::max(last, cl + 1);
            }
            by_last[last].push_back(std::move(con));
        }
    }
    auto satisfied = [&](const Constraint& con) {
        std::vector<std::size_t> img;
        for (std::size_t cl : con.cls) img.push_back(static_cast<std::size_t>(value[cl]));
        return rel_sets[con.relation].count(img) > 0;
    };

    WnuResult res;
    res.arity = k;
    for (const auto& con : by_last[0])
        if (!satisfied(con)) return res;

    std::function<bool(std::size_t)> extend = [&](std::size_t cl) -> bool {
        if (cl == classes.size()) return true;
        if (value[cl] >= 0) {
            for (const auto& con : by_last[cl + 1])
                if (!satisfied(con)) return false;
            return extend(cl + 1);
        }
        for (std::size_t v = 0; v < d; ++v) {
            ++res.nodes;
            value[cl] = static_cast<int>(v);
            bool ok = true;
            for (const auto& con : by_last[cl + 1])
                if (!satisfied(con)) {
                    ok = false;
                    break;
                }
            if (ok && extend(cl + 1)) return true;
        }
        value[cl] = -1;
        return false;
    };
    if (!extend(0)) return res;
    res.found = true;
    res.table.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) res.table[c] = static_cast<std::size_t>(value[class_of[c]]);
    return res;
}

/**
 * The two-element structure ({1, m}; ×-triples, {m}) as domain indices
 * 0 ↦ 1, 1 ↦ m.
 */
inline std::vector<FiniteRelation> two_element_core_relations()
{
    FiniteRelation times{3, {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}}};
    FiniteRelation constant{1, {{1}}};
    return {times, constant};
}

/** {(x_1..x_k) ∈ S^k : x_1 ⋯ x_k = m}. */
inline FiniteRelation product_relation(const std::vector<Natural>& S, const Natural& m, std::size_t k)
{
    FiniteRelation R;
    R.arity = k;
    std::vector<std::size_t> idx(k, 0);
    for (;;) {
        Natural prod = 1;
        for (std::size_t i : idx) prod *= S[i];
        if (prod == m) R.tuples.push_back(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] + 1 == S.size()) idx[--i] = 0;
        if (i == 0) break;
        ++idx[i - 1];
    }
    return R;
}

} // namespace skolem
