#pragma once

// Sets of naturals that are unions of fibers of n ↦ (v2(n), Ω(odd part of n)),
// plus an independent flag for 0. Closed under ∪, ∩, complement and ×, which
// makes power-of-two constructions such as {2^i} exactly representable.
//
// Cell (i, j) of the grid is a point when i < t2 (resp. j < to) and a ray
// [t2, ∞) (resp. [to, ∞)) at the threshold.

#include "skolem/natural.hpp"

#include <algorithm>
#include <vector>

namespace skolem {

class ProfileSet {
public:
    ProfileSet() : ProfileSet(false, 0, 0, {false}) {}

    ProfileSet(bool has_zero, std::size_t t2, std::size_t to, std::vector<bool> cells)
        : has_zero_(has_zero), t2_(t2), to_(to), cells_(std::move(cells))
    {
        if (cells_.size() != (t2_ + 1) * (to_ + 1)) throw InvalidInput("ProfileSet: grid size mismatch");
        shrink();
    }

    /** {2^i : i >= 0}. */
    static ProfileSet powers_of_two()
    {
        return ProfileSet(false, 1, 1, {true, false, true, false});
    }

    bool has_zero() const { return has_zero_; }
    std::size_t t2() const { return t2_; }
    std::size_t to() const { return to_; }

    /** Cell lookup with coordinates clamped to the thresholds. */
    bool cell(std::size_t i, std::size_t j) const
    {
        return cells_[std::min(i, t2_) * (to_ + 1) + std::min(j, to_)];
    }

    bool contains(const Natural& n) const
    {
        if (n == 0) return has_zero_;
        std::size_t v2 = boost::multiprecision::lsb(n);
        Natural odd = n >> v2;
        // Rows where every column agrees need no odd factorisation.
        bool first = cell(v2, 0);
        bool uniform = true;
        for (std::size_t j = 1; j <= to_; ++j)
            if (cell(v2, j) != first) uniform = false;
        if (uniform) return first;
        auto p = two_adic_profile(to_u64(odd));
        return cell(v2, p.odd_omega);
    }

    bool empty() const
    {
        return !has_zero_ && std::none_of(cells_.begin(), cells_.end(), [](bool b) { return b; });
    }

    ProfileSet complement() const
    {
        std::vector<bool> c(cells_.size());
        for (std::size_t k = 0; k < cells_.size(); ++k) c[k] = !cells_[k];
        return ProfileSet(!has_zero_, t2_, to_, std::move(c));
    }

    static ProfileSet unite(const ProfileSet& a, const ProfileSet& b)
    {
        return combine(a, b, [](bool x, bool y) { return x || y; });
    }
    static ProfileSet intersect(const ProfileSet& a, const ProfileSet& b)
    {
        return combine(a, b, [](bool x, bool y) { return x && y; });
    }

    /** Element-wise product: profiles add, so cells combine by Minkowski sum. */
    static ProfileSet times(const ProfileSet& a, const ProfileSet& b)
    {
        std::size_t T2 = a.t2_ + b.t2_, To = a.to_ + b.to_;
        std::vector<bool> cells((T2 + 1) * (To + 1), false);
        for (std::size_t i = 0; i <= a.t2_; ++i)
            for (std::size_t j = 0; j <= a.to_; ++j) {
                if (!a.cells_[i * (a.to_ + 1) + j]) continue;
                for (std::size_t k = 0; k <= b.t2_; ++k)
                    for (std::size_t l = 0; l <= b.to_; ++l) {
                        if (!b.cells_[k * (b.to_ + 1) + l]) continue;
                        std::size_t lo2 = i + k, lo_o = j + l;
                        std::size_t hi2 = (i == a.t2_ || k == b.t2_) ? T2 : lo2;
                        std::size_t hi_o = (j == a.to_ || l == b.to_) ? To : lo_o;
                        for (std::size_t x = lo2; x <= hi2; ++x)
                            for (std::size_t y = lo_o; y <= hi_o; ++y) cells[x * (To + 1) + y] = true;
                    }
            }
        bool a_nonempty = !a.empty(), b_nonempty = !b.empty();
        bool zero = (a.has_zero_ && b_nonempty) || (b.has_zero_ && a_nonempty);
        return ProfileSet(zero, T2, To, std::move(cells));
    }

    std::optional<Natural> min_element() const
    {
        if (has_zero_) return Natural(0);
        std::optional<Natural> best;
        for (std::size_t i = 0; i <= t2_; ++i)
            for (std::size_t j = 0; j <= to_; ++j) {
                if (!cell(i, j)) continue;
                Natural v = (Natural(1) << i) * pow_natural(3, j);
                if (!best || v < *best) best = v;
            }
        return best;
    }

    /** True when some element exceeds `bound`. */
    bool has_element_above(const Natural& bound) const
    {
        for (std::size_t i = 0; i <= t2_; ++i)
            for (std::size_t j = 0; j <= to_; ++j) {
                if (!cell(i, j)) continue;
                bool singleton = i < t2_ && j == 0 && to_ >= 1;
                if (!singleton || (Natural(1) << i) > bound) return true;
            }
        return false;
    }

    /** The elements, when the set is finite (every member is 0 or a power of two). */
    std::optional<std::vector<Natural>> as_finite() const
    {
        std::vector<Natural> out;
        if (has_zero_) out.push_back(0);
        for (std::size_t i = 0; i <= t2_; ++i)
            for (std::size_t j = 0; j <= to_; ++j) {
                if (!cell(i, j)) continue;
                if (i == t2_ || j != 0 || to_ == 0) return std::nullopt;
                out.push_back(Natural(1) << i);
            }
        return out;
    }

    /** The excluded elements, when the set is cofinite. */
    std::optional<std::vector<Natural>> as_cofinite() const
    {
        auto c = complement().as_finite();
        return c;
    }

    /** Profile of a finite set; only 0 and powers of two are representable. */
    static std::optional<ProfileSet> from_finite(const std::vector<Natural>& elems)
    {
        bool zero = false;
        std::vector<std::size_t> exps;
        for (const auto& e : elems) {
            if (e == 0) {
                zero = true;
                continue;
            }
            auto k = log2_exact(e);
            if (!k || *k > 4096) return std::nullopt;
            exps.push_back(static_cast<std::size_t>(*k));
        }
        std::size_t t2 = exps.empty() ? 0 : *std::max_element(exps.begin(), exps.end()) + 1;
        std::vector<bool> cells((t2 + 1) * 2, false);
        for (std::size_t k : exps) cells[k * 2] = true;
        return ProfileSet(zero, t2, 1, std::move(cells));
    }

    static std::optional<ProfileSet> from_cofinite(const std::vector<Natural>& excluded)
    {
        auto p = from_finite(excluded);
        if (!p) return std::nullopt;
        return p->complement();
    }

    bool operator==(const ProfileSet&) const = default;

private:
    template <class F>
    static ProfileSet combine(const ProfileSet& a, const ProfileSet& b, F f)
    {
        std::size_t T2 = std::max(a.t2_, b.t2_), To = std::max(a.to_, b.to_);
        std::vector<bool> cells((T2 + 1) * (To + 1));
        for (std::size_t i = 0; i <= T2; ++i)
            for (std::size_t j = 0; j <= To; ++j) cells[i * (To + 1) + j] = f(a.cell(i, j), b.cell(i, j));
        return ProfileSet(f(a.has_zero_, b.has_zero_), T2, To, std::move(cells));
    }

    // Canonical form: drop the threshold row/column while it equals its predecessor.
    void shrink()
    {
        auto at = [&](std::size_t i, std::size_t j) { return cells_[i * (to_ + 1) + j]; };
        std::size_t t2 = t2_, to = to_;
        auto rows_equal = [&](std::size_t r) {
            for (std::size_t j = 0; j <= to_; ++j)
                if (at(r, j) != at(r - 1, j)) return false;
            return true;
        };
        while (t2 > 0 && rows_equal(t2)) --t2;
        auto cols_equal = [&](std::size_t c) {
            for (std::size_t i = 0; i <= t2; ++i)
                if (at(i, c) != at(i, c - 1)) return false;
            return true;
        };
        while (to > 0 && cols_equal(to)) --to;
        if (t2 == t2_ && to == to_) return;
        std::vector<bool> cells((t2 + 1) * (to + 1));
        for (std::size_t i = 0; i <= t2; ++i)
            for (std::size_t j = 0; j <= to; ++j) cells[i * (to + 1) + j] = at(i, j);
        t2_ = t2;
        to_ = to;
        cells_ = std::move(cells);
    }

    bool has_zero_;
    std::size_t t2_, to_;
    std::vector<bool> cells_;
};

} // namespace skolem
