#pragma once

// Evaluation of circuits over sets of naturals. Exact where the value stays
// finite, cofinite or a profile set; otherwise a three-valued window [0..B]
// plus a tail abstraction of everything above B.

#include "skolem/circuit.hpp"
#include "skolem/instance.hpp"
#include "skolem/profile_set.hpp"

#include <variant>

namespace skolem {

enum class Tail : std::uint8_t { Empty, All, Some, Unknown };

inline std::string_view to_string(Tail t)
{
    switch (t) {
    case Tail::Empty: return "empty";
    case Tail::All: return "all";
    case Tail::Some: return "some";
    default: return "unknown";
    }
}

struct FiniteSet {
    std::vector<Natural> elements;  // sorted, duplicate-free
    bool operator==(const FiniteSet&) const = default;
};

struct CofiniteSet {
    std::vector<Natural> excluded;  // sorted, duplicate-free
    bool operator==(const CofiniteSet&) const = default;
};

struct WindowedSet {
    std::uint64_t bound = 0;
    std::vector<TriBool> bits;  // bound + 1 positions
    Tail tail = Tail::Unknown;
    bool operator==(const WindowedSet&) const = default;
};

using SetValue = std::variant<FiniteSet, CofiniteSet, ProfileSet, WindowedSet>;

inline bool is_exact(const SetValue& v) { return !std::holds_alternative<WindowedSet>(v); }

namespace detail {
inline void sort_unique(std::vector<Natural>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}
inline bool sorted_contains(const std::vector<Natural>& v, const Natural& n)
{
    return std::binary_search(v.begin(), v.end(), n);
}
} // namespace detail

inline SetValue make_finite(std::vector<Natural> elems)
{
    detail::sort_unique(elems);
    return FiniteSet{std::move(elems)};
}

inline SetValue make_cofinite(std::vector<Natural> excluded)
{
    detail::sort_unique(excluded);
    return CofiniteSet{std::move(excluded)};
}

/** Brings a profile set back to Finite/Cofinite when it is one of those. */
inline SetValue normalize(SetValue v)
{
    if (auto* p = std::get_if<ProfileSet>(&v)) {
        if (auto f = p->as_finite()) return make_finite(std::move(*f));
        if (auto c = p->as_cofinite()) return make_cofinite(std::move(*c));
    }
    return v;
}

inline TriBool contains(const SetValue& v, const Natural& n)
{
    return std::visit(
        [&](const auto& s) -> TriBool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FiniteSet>) return tri(detail::sorted_contains(s.elements, n));
            else if constexpr (std::is_same_v<T, CofiniteSet>) return tri(!detail::sorted_contains(s.excluded, n));
            else if constexpr (std::is_same_v<T, ProfileSet>) return tri(s.contains(n));
            else {
                if (n <= s.bound) return s.bits[n.template convert_to<std::size_t>()];
                if (s.tail == Tail::Empty) return TriBool::False;
                if (s.tail == Tail::All) return TriBool::True;
                return TriBool::Unknown;
            }
        },
        v);
}

inline TriBool window_nonempty(const WindowedSet& w, std::size_t from = 0)
{
    bool unknown = false;
    for (std::size_t i = from; i < w.bits.size(); ++i) {
        if (w.bits[i] == TriBool::True) return TriBool::True;
        if (w.bits[i] == TriBool::Unknown) unknown = true;
    }
    if (w.tail == Tail::Some || w.tail == Tail::All) return TriBool::True;
    if (w.tail == Tail::Unknown) unknown = true;
    return unknown ? TriBool::Unknown : TriBool::False;
}

inline TriBool nonempty(const SetValue& v)
{
    return std::visit(
        [](const auto& s) -> TriBool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FiniteSet>) return tri(!s.elements.empty());
            else if constexpr (std::is_same_v<T, CofiniteSet>) return TriBool::True;
            else if constexpr (std::is_same_v<T, ProfileSet>) return tri(!s.empty());
            else return window_nonempty(s);
        },
        v);
}

inline std::string to_string(const SetValue& v)
{
    auto list = [](const std::vector<Natural>& xs) {
        std::string s = "{";
        for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i].str();
        return s + "}";
    };
    return std::visit(
        [&](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, FiniteSet>) return list(s.elements);
            else if constexpr (std::is_same_v<T, CofiniteSet>) return "N\\" + list(s.excluded);
            else if constexpr (std::is_same_v<T, ProfileSet>) {
                std::string out = "profile(zero=" + std::string(s.has_zero() ? "1" : "0") + ",t2=" +
                                  std::to_string(s.t2()) + ",to=" + std::to_string(s.to()) + ",cells=";
                for (std::size_t i = 0; i <= s.t2(); ++i) {
                    if (i) out += "/";
                    for (std::size_t j = 0; j <= s.to(); ++j) out += s.cell(i, j) ? '1' : '0';
                }
                return out + ")";
            } else {
                std::string out = "window[0.." + std::to_string(s.bound) + "]{";
                bool first = true;
                for (std::size_t i = 0; i < s.bits.size(); ++i) {
                    if (s.bits[i] == TriBool::False) continue;
                    out += (first ? "" : ",") + std::to_string(i) + (s.bits[i] == TriBool::Unknown ? "?" : "");
                    first = false;
                }
                return out + "} tail=" + std::string(to_string(s.tail));
            }
        },
        v);
}

// ---------------------------------------------------------------------------
// Exact operations. Each returns nullopt when the result leaves the
// representable classes or a size guard trips.

namespace exact {

inline constexpr std::size_t kMaxFiniteProduct = 1U << 22;
inline constexpr std::uint64_t kMaxScan = 1U << 18;

inline std::optional<ProfileSet> as_profile(const SetValue& v)
{
    if (auto* p = std::get_if<ProfileSet>(&v)) return *p;
    if (auto* f = std::get_if<FiniteSet>(&v)) return ProfileSet::from_finite(f->elements);
    if (auto* c = std::get_if<CofiniteSet>(&v)) return ProfileSet::from_cofinite(c->excluded);
    return std::nullopt;
}

inline bool is_empty_set(const SetValue& v)
{
    auto* f = std::get_if<FiniteSet>(&v);
    return f && f->elements.empty();
}
inline bool is_singleton(const SetValue& v, unsigned n)
{
    auto* f = std::get_if<FiniteSet>(&v);
    return f && f->elements.size() == 1 && f->elements[0] == n;
}
inline bool is_everything(const SetValue& v)
{
    auto* c = std::get_if<CofiniteSet>(&v);
    return c && c->excluded.empty();
}

inline std::optional<Natural> min_element(const SetValue& v)
{
    if (auto* f = std::get_if<FiniteSet>(&v)) {
        if (f->elements.empty()) return std::nullopt;
        return f->elements.front();
    }
    if (auto* c = std::get_if<CofiniteSet>(&v)) {
        Natural n = 0;
        for (const auto& e : c->excluded) {
            if (e != n) break;
            ++n;
        }
        return n;
    }
    if (auto* p = std::get_if<ProfileSet>(&v)) return p->min_element();
    return std::nullopt;
}

inline std::optional<SetValue> complement(const SetValue& a)
{
    if (auto* f = std::get_if<FiniteSet>(&a)) return CofiniteSet{f->elements};
    if (auto* c = std::get_if<CofiniteSet>(&a)) return FiniteSet{c->excluded};
    if (auto* p = std::get_if<ProfileSet>(&a)) return normalize(p->complement());
    return std::nullopt;
}

inline std::vector<Natural> set_union(const std::vector<Natural>& a, const std::vector<Natural>& b)
{
    std::vector<Natural> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}
inline std::vector<Natural> set_inter(const std::vector<Natural>& a, const std::vector<Natural>& b)
{
    std::vector<Natural> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}
inline std::vector<Natural> set_minus(const std::vector<Natural>& a, const std::vector<Natural>& b)
{
    std::vector<Natural> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Profile membership for arbitrary finite lists may exceed the 64-bit guard.
inline std::optional<std::vector<Natural>> filter_by_profile(const std::vector<Natural>& xs, const ProfileSet& p,
                                                             bool keep_members)
{
    std::vector<Natural> out;
    try {
        for (const auto& x : xs)
            if (p.contains(x) == keep_members) out.push_back(x);
    } catch (const InvalidInput&) {
        return std::nullopt;
    }
    return out;
}

inline std::optional<SetValue> unite(const SetValue& a, const SetValue& b)
{
    auto* fa = std::get_if<FiniteSet>(&a);
    auto* fb = std::get_if<FiniteSet>(&b);
    auto* ca = std::get_if<CofiniteSet>(&a);
    auto* cb = std::get_if<CofiniteSet>(&b);
    if (fa && fb) return FiniteSet{set_union(fa->elements, fb->elements)};
    if (ca && cb) return CofiniteSet{set_inter(ca->excluded, cb->excluded)};
    if (ca && fb) return CofiniteSet{set_minus(ca->excluded, fb->elements)};
    if (fa && cb) return CofiniteSet{set_minus(cb->excluded, fa->elements)};
    if (!is_exact(a) || !is_exact(b)) return std::nullopt;
    if (is_empty_set(a)) return b;
    if (is_empty_set(b)) return a;
    auto pa = as_profile(a), pb = as_profile(b);
    if (pa && pb) return normalize(ProfileSet::unite(*pa, *pb));
    // One side is a profile, the other a non-profile finite/cofinite set.
    const ProfileSet& p = pa ? *pa : *pb;
    const SetValue& other = pa ? b : a;
    if (auto* c = std::get_if<CofiniteSet>(&other)) {
        auto kept = filter_by_profile(c->excluded, p, false);
        if (kept) return CofiniteSet{std::move(*kept)};
    }
    return std::nullopt;
}

inline std::optional<SetValue> intersect(const SetValue& a, const SetValue& b)
{
    auto* fa = std::get_if<FiniteSet>(&a);
    auto* fb = std::get_if<FiniteSet>(&b);
    auto* ca = std::get_if<CofiniteSet>(&a);
    auto* cb = std::get_if<CofiniteSet>(&b);
    if (fa && fb) return FiniteSet{set_inter(fa->elements, fb->elements)};
    if (ca && cb) return CofiniteSet{set_union(ca->excluded, cb->excluded)};
    if (ca && fb) return FiniteSet{set_minus(fb->elements, ca->excluded)};
    if (fa && cb) return FiniteSet{set_minus(fa->elements, cb->excluded)};
    if (!is_exact(a) || !is_exact(b)) return std::nullopt;
    if (is_everything(a)) return b;
    if (is_everything(b)) return a;
    auto pa = as_profile(a), pb = as_profile(b);
    if (pa && pb) return normalize(ProfileSet::intersect(*pa, *pb));
    const ProfileSet& p = pa ? *pa : *pb;
    const SetValue& other = pa ? b : a;
    if (auto* f = std::get_if<FiniteSet>(&other)) {
        auto kept = filter_by_profile(f->elements, p, true);
        if (kept) return FiniteSet{std::move(*kept)};
    }
    return std::nullopt;
}

/** Ascending elements of an exact set that are < limit. */
inline std::vector<std::uint64_t> elements_below(const SetValue& v, std::uint64_t limit)
{
    std::vector<std::uint64_t> out;
    if (auto* f = std::get_if<FiniteSet>(&v)) {
        for (const auto& e : f->elements) {
            if (e >= limit) break;
            out.push_back(e.convert_to<std::uint64_t>());
        }
        return out;
    }
    for (std::uint64_t n = 0; n < limit; ++n)
        if (contains(v, n) == TriBool::True) out.push_back(n);
    return out;
}

// Cofinite A plus nonempty exact X: every n >= max(excluded) + 1 + min(X) is
// reached, the rest is decided by scanning.
inline std::optional<SetValue> cofinite_plus(const CofiniteSet& a, const SetValue& x)
{
    auto m = min_element(x);
    if (!m) return FiniteSet{};
    Natural top = a.excluded.empty() ? Natural(0) : a.excluded.back() + 1;
    Natural limit = top + *m;
    if (limit > kMaxScan) return std::nullopt;
    std::uint64_t T = limit.convert_to<std::uint64_t>();
    std::vector<std::uint64_t> xs = elements_below(x, T);
    std::vector<Natural> excluded;
    for (std::uint64_t n = 0; n < T; ++n) {
        bool in = false;
        for (std::uint64_t e : xs) {
            if (e > n) break;
            if (!detail::sorted_contains(a.excluded, Natural(n - e))) {
                in = true;
                break;
            }
        }
        if (!in) excluded.push_back(n);
    }
    return CofiniteSet{std::move(excluded)};
}

inline std::optional<SetValue> plus(const SetValue& a, const SetValue& b)
{
    if (!is_exact(a) || !is_exact(b)) return std::nullopt;
    if (is_empty_set(a) || is_empty_set(b)) return FiniteSet{};
    if (is_singleton(a, 0)) return b;
    if (is_singleton(b, 0)) return a;
    auto* fa = std::get_if<FiniteSet>(&a);
    auto* fb = std::get_if<FiniteSet>(&b);
    if (fa && fb) {
        if (fa->elements.size() * fb->elements.size() > kMaxFiniteProduct) return std::nullopt;
        std::vector<Natural> out;
        out.reserve(fa->elements.size() * fb->elements.size());
        for (const auto& x : fa->elements)
            for (const auto& y : fb->elements) out.push_back(x + y);
        return make_finite(std::move(out));
    }
    if (auto* ca = std::get_if<CofiniteSet>(&a)) return cofinite_plus(*ca, b);
    if (auto* cb = std::get_if<CofiniteSet>(&b)) return cofinite_plus(*cb, a);
    return std::nullopt;
}

inline std::optional<SetValue> times(const SetValue& a, const SetValue& b)
{
    if (!is_exact(a) || !is_exact(b)) return std::nullopt;
    if (is_empty_set(a) || is_empty_set(b)) return FiniteSet{};
    if (is_singleton(a, 0) || is_singleton(b, 0)) return FiniteSet{{0}};
    if (is_singleton(a, 1)) return b;
    if (is_singleton(b, 1)) return a;
    auto* fa = std::get_if<FiniteSet>(&a);
    auto* fb = std::get_if<FiniteSet>(&b);
    if (fa && fb) {
        if (fa->elements.size() * fb->elements.size() > kMaxFiniteProduct) return std::nullopt;
        std::vector<Natural> out;
        out.reserve(fa->elements.size() * fb->elements.size());
        for (const auto& x : fa->elements)
            for (const auto& y : fb->elements) out.push_back(x * y);
        return make_finite(std::move(out));
    }
    auto pa = as_profile(a), pb = as_profile(b);
    if (pa && pb) return normalize(ProfileSet::times(*pa, *pb));
    return std::nullopt;
}

} // namespace exact

// ---------------------------------------------------------------------------
// Window operations on a common bound L.

namespace window {

inline Tail tail_complement(Tail t)
{
    if (t == Tail::Empty) return Tail::All;
    if (t == Tail::All) return Tail::Empty;
    return Tail::Unknown;
}

inline Tail tail_union(Tail a, Tail b)
{
    if (a == Tail::All || b == Tail::All) return Tail::All;
    if (a == Tail::Empty && b == Tail::Empty) return Tail::Empty;
    if (a == Tail::Some || b == Tail::Some) return Tail::Some;
    return Tail::Unknown;
}

inline Tail tail_intersect(Tail a, Tail b)
{
    if (a == Tail::Empty || b == Tail::Empty) return Tail::Empty;
    if (a == Tail::All && b == Tail::All) return Tail::All;
    if ((a == Tail::All && b == Tail::Some) || (a == Tail::Some && b == Tail::All)) return Tail::Some;
    return Tail::Unknown;
}

inline bool tail_certain(Tail t) { return t == Tail::Some || t == Tail::All; }

struct Extent {
    std::int64_t max_true = -1;      // largest position >= from that is certainly present
    std::int64_t max_possible = -1;  // largest position >= from that may be present
};

inline Extent extent(const WindowedSet& w, std::size_t from)
{
    Extent e;
    for (std::size_t i = from; i < w.bits.size(); ++i) {
        if (w.bits[i] == TriBool::True) e.max_true = static_cast<std::int64_t>(i);
        if (w.bits[i] != TriBool::False) e.max_possible = static_cast<std::int64_t>(i);
    }
    return e;
}

inline WindowedSet complement(const WindowedSet& a)
{
    WindowedSet r{a.bound, a.bits, tail_complement(a.tail)};
    for (auto& b : r.bits) b = tri_not(b);
    return r;
}

inline WindowedSet unite(const WindowedSet& a, const WindowedSet& b)
{
    WindowedSet r{a.bound, a.bits, tail_union(a.tail, b.tail)};
    for (std::size_t i = 0; i < r.bits.size(); ++i) r.bits[i] = tri_or(a.bits[i], b.bits[i]);
    return r;
}

inline WindowedSet intersect(const WindowedSet& a, const WindowedSet& b)
{
    WindowedSet r{a.bound, a.bits, tail_intersect(a.tail, b.tail)};
    for (std::size_t i = 0; i < r.bits.size(); ++i) r.bits[i] = tri_and(a.bits[i], b.bits[i]);
    return r;
}

inline WindowedSet plus(const WindowedSet& a, const WindowedSet& b)
{
    const std::size_t n = a.bits.size();
    const auto L = static_cast<std::int64_t>(a.bound);
    WindowedSet r{a.bound, std::vector<TriBool>(n, TriBool::False), Tail::Unknown};
    for (std::size_t x = 0; x < n; ++x) {
        if (a.bits[x] == TriBool::False) continue;
        for (std::size_t y = 0; x + y < n; ++y) {
            if (b.bits[y] == TriBool::False) continue;
            r.bits[x + y] = tri_or(r.bits[x + y], tri_and(a.bits[x], b.bits[y]));
        }
    }
    TriBool na = window_nonempty(a), nb = window_nonempty(b);
    Extent ea = extent(a, 0), eb = extent(b, 0);
    if (na == TriBool::False || nb == TriBool::False) {
        r.tail = Tail::Empty;
    } else if ((a.tail == Tail::All && b.bits[0] == TriBool::True) ||
               (b.tail == Tail::All && a.bits[0] == TriBool::True)) {
        r.tail = Tail::All;
    } else if ((ea.max_true >= 0 && eb.max_true >= 0 && ea.max_true + eb.max_true > L) ||
               (tail_certain(a.tail) && nb == TriBool::True) || (tail_certain(b.tail) && na == TriBool::True)) {
        r.tail = Tail::Some;
    } else if (a.tail == Tail::Empty && b.tail == Tail::Empty &&
               (ea.max_possible < 0 || eb.max_possible < 0 || ea.max_possible + eb.max_possible <= L)) {
        r.tail = Tail::Empty;
    }
    return r;
}

inline WindowedSet times(const WindowedSet& a, const WindowedSet& b)
{
    const std::size_t n = a.bits.size();
    const auto L = static_cast<std::int64_t>(a.bound);
    WindowedSet r{a.bound, std::vector<TriBool>(n, TriBool::False), Tail::Unknown};
    for (std::size_t x = 1; x < n; ++x) {
        if (a.bits[x] == TriBool::False) continue;
        for (std::size_t y = 1; x * y < n; ++y) {
            if (b.bits[y] == TriBool::False) continue;
            r.bits[x * y] = tri_or(r.bits[x * y], tri_and(a.bits[x], b.bits[y]));
        }
    }
    TriBool na = window_nonempty(a), nb = window_nonempty(b);
    // 0 ∈ A×B iff (0 ∈ A and B ≠ ∅) or (0 ∈ B and A ≠ ∅).
    r.bits[0] = tri_or(tri_and(a.bits[0], nb), tri_and(b.bits[0], na));

    TriBool nza = window_nonempty(a, 1), nzb = window_nonempty(b, 1);
    Extent ea = extent(a, 1), eb = extent(b, 1);
    if (na == TriBool::False || nb == TriBool::False) {
        r.tail = Tail::Empty;
    } else if ((a.tail == Tail::All && n > 1 && b.bits[1] == TriBool::True) ||
               (b.tail == Tail::All && n > 1 && a.bits[1] == TriBool::True)) {
        r.tail = Tail::All;
    } else if ((ea.max_true >= 1 && eb.max_true >= 1 && ea.max_true * eb.max_true > L) ||
               (tail_certain(a.tail) && nzb == TriBool::True) || (tail_certain(b.tail) && nza == TriBool::True)) {
        r.tail = Tail::Some;
    } else {
        bool possible = (ea.max_possible >= 1 && eb.max_possible >= 1 && ea.max_possible * eb.max_possible > L) ||
                        (a.tail != Tail::Empty && nzb != TriBool::False) ||
                        (b.tail != Tail::Empty && nza != TriBool::False);
        if (!possible) r.tail = Tail::Empty;
    }
    return r;
}

/** Window of an exact value at bound L. */
inline WindowedSet from_exact(const SetValue& v, std::uint64_t L)
{
    WindowedSet w{L, std::vector<TriBool>(L + 1, TriBool::False), Tail::Empty};
    if (auto* f = std::get_if<FiniteSet>(&v)) {
        for (const auto& e : f->elements) {
            if (e > L) {
                w.tail = Tail::Some;
                break;
            }
            w.bits[e.convert_to<std::size_t>()] = TriBool::True;
        }
    } else if (auto* c = std::get_if<CofiniteSet>(&v)) {
        std::fill(w.bits.begin(), w.bits.end(), TriBool::True);
        w.tail = Tail::All;
        for (const auto& e : c->excluded) {
            if (e > L) {
                w.tail = Tail::Some;
                break;
            }
            w.bits[e.convert_to<std::size_t>()] = TriBool::False;
        }
    } else if (auto* p = std::get_if<ProfileSet>(&v)) {
        for (std::uint64_t n = 0; n <= L; ++n) w.bits[n] = tri(p->contains(n));
        // A normalised profile set is neither finite nor cofinite, so it
        // misses infinitely many numbers and the tail is never All.
        w.tail = p->has_element_above(L) ? Tail::Some : Tail::Empty;
    } else {
        throw InvalidInput("from_exact: value is not exact");
    }
    return w;
}

/** Restriction of a window at L to the smaller bound B, refining the tail from (B, L]. */
inline WindowedSet project(const WindowedSet& w, std::uint64_t B)
{
    if (B >= w.bound) return w;
    WindowedSet r{B, std::vector<TriBool>(w.bits.begin(), w.bits.begin() + static_cast<std::ptrdiff_t>(B + 1)),
                  Tail::Unknown};
    bool all_true = true, all_false = true, some_true = false;
    for (std::size_t i = B + 1; i < w.bits.size(); ++i) {
        if (w.bits[i] != TriBool::True) all_true = false;
        if (w.bits[i] != TriBool::False) all_false = false;
        if (w.bits[i] == TriBool::True) some_true = true;
    }
    if (all_true && w.tail == Tail::All) r.tail = Tail::All;
    else if (all_false && w.tail == Tail::Empty) r.tail = Tail::Empty;
    else if (some_true || tail_certain(w.tail)) r.tail = Tail::Some;
    return r;
}

} // namespace window

// ---------------------------------------------------------------------------
// Circuit evaluation

namespace detail {
inline const Natural& lookup(const Assignment& a, const std::string& name)
{
    auto it = a.find(name);
    if (it == a.end()) throw InvalidInput("no value assigned to input '" + name + "'");
    if (it->second < 0) throw InvalidInput("negative value assigned to '" + name + "'");
    return it->second;
}
} // namespace detail

/** Exact value of every gate (entry k-1 is gate k); nullopt where not representable. */
inline std::vector<std::optional<SetValue>> eval_exact_gates(const Circuit& c, const Assignment& a)
{
    require_valid(c);
    std::vector<std::optional<SetValue>> v(c.size());
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        std::optional<SetValue>& out = v[k - 1];
        auto arg = [&](std::size_t i) -> const std::optional<SetValue>& { return v[g.preds[i] - 1]; };
        switch (g.op) {
        case Op::Constant: out = FiniteSet{{g.value}}; break;
        case Op::Variable: out = FiniteSet{{detail::lookup(a, g.name)}}; break;
        case Op::Complement:
            if (arg(0)) out = exact::complement(*arg(0));
            break;
        default:
            if (!arg(0) || !arg(1)) break;
            switch (g.op) {
            case Op::Union: out = exact::unite(*arg(0), *arg(1)); break;
            case Op::Intersect: out = exact::intersect(*arg(0), *arg(1)); break;
            case Op::Plus: out = exact::plus(*arg(0), *arg(1)); break;
            default: out = exact::times(*arg(0), *arg(1)); break;
            }
        }
    }
    return v;
}

inline std::optional<SetValue> eval_exact(const Circuit& c, const Assignment& a)
{
    return eval_exact_gates(c, a).at(c.output() - 1);
}

struct WindowOptions {
    bool exact_first = true;  // use exact values where they exist
    bool lookahead = true;    // evaluate at 2B+1 internally and project down to B
};

inline Natural max_assigned_value(const Circuit& c, const Assignment& a)
{
    Natural m = 0;
    for (std::size_t k : free_inputs(c)) m = std::max(m, detail::lookup(a, c.gate(k).name));
    return m;
}

inline constexpr std::uint64_t kMaxWindow = 1U << 20;

/** Windowed value of every gate at bound B (entry k-1 is gate k). */
inline std::vector<WindowedSet> eval_windowed(const Circuit& c, const Assignment& a, std::uint64_t B,
                                              WindowOptions opts = {})
{
    require_valid(c);
    if (max_constant(c) > B) throw InvalidInput("window bound " + std::to_string(B) + " is below a constant");
    if (max_assigned_value(c, a) > B)
        throw InvalidInput("window bound " + std::to_string(B) + " is below an assigned value");
    if (B > kMaxWindow) throw InvalidInput("window bound exceeds " + std::to_string(kMaxWindow));
    const std::uint64_t L = opts.lookahead ? 2 * B + 1 : B;

    std::vector<std::optional<SetValue>> ex;
    if (opts.exact_first) ex = eval_exact_gates(c, a);

    std::vector<WindowedSet> w(c.size());
    for (std::size_t k = 1; k <= c.size(); ++k) {
        const Gate& g = c.gate(k);
        if (opts.exact_first && ex[k - 1]) {
            w[k - 1] = window::from_exact(*ex[k - 1], L);
            continue;
        }
        auto arg = [&](std::size_t i) -> const WindowedSet& { return w[g.preds[i] - 1]; };
        switch (g.op) {
        case Op::Constant: w[k - 1] = window::from_exact(FiniteSet{{g.value}}, L); break;
        case Op::Variable: w[k - 1] = window::from_exact(FiniteSet{{detail::lookup(a, g.name)}}, L); break;
        case Op::Complement: w[k - 1] = window::complement(arg(0)); break;
        case Op::Union: w[k - 1] = window::unite(arg(0), arg(1)); break;
        case Op::Intersect: w[k - 1] = window::intersect(arg(0), arg(1)); break;
        case Op::Plus: w[k - 1] = window::plus(arg(0), arg(1)); break;
        case Op::Times: w[k - 1] = window::times(arg(0), arg(1)); break;
        }
    }
    if (L != B)
        for (auto& x : w) x = window::project(x, B);
    return w;
}

inline std::uint64_t minimal_window(const Circuit& c, const Assignment& a, const Natural& extra)
{
    Natural m = std::max({extra, max_constant(c), max_assigned_value(c, a)});
    if (m > kMaxWindow) throw InvalidInput("values exceed the window limit " + std::to_string(kMaxWindow));
    return m.convert_to<std::uint64_t>();
}

/**
 * Membership of b in the output. Exact when possible; otherwise windowed at
 * B = max(b, constants, inputs), doubling B while the answer stays Unknown
 * unless an explicit window is given.
 */
inline TriBool member(const Circuit& c, const Assignment& a, const Natural& b,
                      std::optional<std::uint64_t> window = std::nullopt)
{
    if (!window) {
        if (auto v = eval_exact(c, a)) {
            try {
                return contains(*v, b);
            } catch (const InvalidInput&) {
                // Profile lookup beyond the factorisation guard; fall through.
            }
        }
    }
    std::uint64_t B = minimal_window(c, a, b);
    if (window) B = std::max(B, *window);
    const std::size_t bi = b.convert_to<std::size_t>();
    for (int attempt = 0;; ++attempt) {
        auto w = eval_windowed(c, a, B);
        TriBool r = w.at(c.output() - 1).bits.at(bi);
        if (r != TriBool::Unknown || window || attempt == 3 || 2 * B + 1 > kMaxWindow) return r;
        B = 2 * B + 1;
    }
}

inline TriBool compare_windows(const WindowedSet& x, const WindowedSet& y)
{
    bool all_known = true;
    for (std::size_t i = 0; i < x.bits.size(); ++i) {
        if (x.bits[i] == TriBool::Unknown || y.bits[i] == TriBool::Unknown) {
            all_known = false;
            continue;
        }
        if (x.bits[i] != y.bits[i]) return TriBool::False;
    }
    auto disjoint_tails = [](Tail s, Tail t) {
        return (s == Tail::Empty && window::tail_certain(t)) || (t == Tail::Empty && window::tail_certain(s));
    };
    if (disjoint_tails(x.tail, y.tail)) return TriBool::False;
    if (all_known && x.tail == y.tail && (x.tail == Tail::Empty || x.tail == Tail::All)) return TriBool::True;
    return TriBool::Unknown;
}

/** Set equality of two output values under one assignment. */
inline TriBool equiv(const Circuit& c1, const Circuit& c2, const Assignment& a, std::uint64_t B)
{
    auto v1 = eval_exact(c1, a);
    auto v2 = eval_exact(c2, a);
    if (v1 && v2) return tri(normalize(*v1) == normalize(*v2));
    B = std::max({B, minimal_window(c1, a, 0), minimal_window(c2, a, 0)});
    auto w1 = eval_windowed(c1, a, B);
    auto w2 = eval_windowed(c2, a, B);
    return compare_windows(w1.at(c1.output() - 1), w2.at(c2.output() - 1));
}

// Terms are evaluated through their tree circuits.

inline std::optional<SetValue> eval_term_exact(const Term& t, const Assignment& a)
{
    return eval_exact(term_to_circuit(t), a);
}

} // namespace skolem
