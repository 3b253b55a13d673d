#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skolem {

// Expression templates are off so that `auto` and ?: behave like plain values.
using Natural = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

/** Base class of every error thrown by the library. */
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/** Input that violates a documented precondition. */
class InvalidInput : public Error {
public:
    using Error::Error;
};

/** An atom or gate uses an operator the instance signature does not allow. */
class SignatureViolation : public Error {
public:
    using Error::Error;
};

/** A state that the construction proves unreachable was reached. */
class InternalInvariant : public Error {
public:
    using Error::Error;
};

enum class TriBool : std::uint8_t { False, True, Unknown };

constexpr TriBool tri(bool b) { return b ? TriBool::True : TriBool::False; }

constexpr TriBool tri_not(TriBool a)
{
    switch (a) {
    case TriBool::False: return TriBool::True;
    case TriBool::True: return TriBool::False;
    default: return TriBool::Unknown;
    }
}

constexpr TriBool tri_and(TriBool a, TriBool b)
{
    if (a == TriBool::False || b == TriBool::False) return TriBool::False;
    if (a == TriBool::True && b == TriBool::True) return TriBool::True;
    return TriBool::Unknown;
}

constexpr TriBool tri_or(TriBool a, TriBool b)
{
    if (a == TriBool::True || b == TriBool::True) return TriBool::True;
    if (a == TriBool::False && b == TriBool::False) return TriBool::False;
    return TriBool::Unknown;
}

inline std::string_view to_string(TriBool t)
{
    switch (t) {
    case TriBool::False: return "false";
    case TriBool::True: return "true";
    default: return "unknown";
    }
}

inline std::string to_string(const Natural& n) { return n.str(); }

/** Parses a non-negative decimal literal of any length. */
inline std::optional<Natural> parse_natural(std::string_view text)
{
    if (text.empty()) return std::nullopt;
    for (char c : text)
        if (c < '0' || c > '9') return std::nullopt;
    return Natural(std::string(text));
}

inline bool fits_u64(const Natural& n)
{
    return n >= 0 && n <= Natural(std::numeric_limits<std::uint64_t>::max());
}

inline std::uint64_t to_u64(const Natural& n)
{
    if (!fits_u64(n)) throw InvalidInput("value " + n.str() + " exceeds the 64-bit guard");
    return n.convert_to<std::uint64_t>();
}

/** Bit length of n, with bit_length(0) == 1 so that every constant costs something. */
inline std::size_t bit_length(const Natural& n)
{
    if (n == 0) return 1;
    return boost::multiprecision::msb(n) + 1;
}

/** Exact power of a natural; exponents are small at desk scale. */
inline Natural pow_natural(const Natural& base, std::uint64_t exp)
{
    return boost::multiprecision::pow(base, static_cast<unsigned>(exp));
}

/**
 * Splits n >= 1 into the exponent of 2 and the number of odd prime factors
 * counted with multiplicity. Trial division; n must fit 64 bits.
 */
struct TwoAdicProfile {
    std::uint64_t two_exponent = 0;
    std::uint64_t odd_omega = 0;
};

inline TwoAdicProfile two_adic_profile(std::uint64_t n)
{
    if (n == 0) throw InvalidInput("two_adic_profile: zero has no profile");
    TwoAdicProfile p;
    while ((n & 1U) == 0) {
        n >>= 1U;
        ++p.two_exponent;
    }
    for (std::uint64_t d = 3; d <= n / d; d += 2) {
        while (n % d == 0) {
            n /= d;
            ++p.odd_omega;
        }
    }
    if (n > 1) ++p.odd_omega;
    return p;
}

/** Returns k when n == 2^k. */
inline std::optional<std::uint64_t> log2_exact(const Natural& n)
{
    if (n <= 0) return std::nullopt;
    std::size_t k = boost::multiprecision::msb(n);
    if (n != (Natural(1) << k)) return std::nullopt;
    return k;
}

} // namespace skolem
