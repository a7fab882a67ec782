#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "dyadnet/dyadic.hpp"
#include "dyadnet/errors.hpp"

namespace dyadnet {

// 8-bit codes: 7 bits for the fractional part.
inline constexpr int kDefaultCsdFractionBits = 7;

struct CsdDigit {
    int sign = 1; // +1 or -1
    int exponent = 0;

    friend bool operator==(const CsdDigit&, const CsdDigit&) = default;
};

/// Canonical signed digit code: value == sum of sign * 2^exponent, no two
/// nonzero digits on adjacent exponents, digit count minimal. Digits are kept
/// most-significant first.
struct CsdCode {
    std::vector<CsdDigit> digits;
    double value = 0.0;

    int nonzero_digits() const { return static_cast<int>(digits.size()); }

    double decode() const {
        double v = 0.0;
        for (const auto& d : digits) v += std::ldexp(static_cast<double>(d.sign), d.exponent);
        return v;
    }

    /// Signed power-of-two expression, e.g. "+2^-2 +2^-4 -2^-8"; "0" for the
    /// empty code. This textual form is the golden-file contract.
    std::string to_string() const {
        if (digits.empty()) return "0";
        std::string out;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (i) out += ' ';
            out += digits[i].sign > 0 ? '+' : '-';
            out += "2^";
            out += std::to_string(digits[i].exponent);
        }
        return out;
    }

    static CsdCode parse(const std::string& text) {
        CsdCode code;
        std::size_t i = 0;
        auto skip_ws = [&] { while (i < text.size() && text[i] == ' ') ++i; };
        skip_ws();
        if (text.compare(i, 1, "0") == 0 && i + 1 >= text.size()) return code;
        while (i < text.size()) {
            int sign = text[i] == '-' ? -1 : 1;
            if (text[i] == '+' || text[i] == '-') ++i;
            if (text.compare(i, 2, "2^") != 0)
                throw DataError("CsdCode: cannot parse \"" + text + "\"");
            i += 2;
            std::size_t end = i;
            if (end < text.size() && (text[end] == '-' || text[end] == '+')) ++end;
            while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
            code.digits.push_back({sign, std::stoi(text.substr(i, end - i))});
            i = end;
            skip_ws();
        }
        code.value = code.decode();
        return code;
    }

    friend bool operator==(const CsdCode& a, const CsdCode& b) { return a.digits == b.digits; }
};

struct CsdCost {
    int additions = 0;
    int shifts = 0;

    friend bool operator==(const CsdCost&, const CsdCost&) = default;
};

namespace detail {

// Non-adjacent form of k: minimal-weight signed binary recoding.
inline std::vector<CsdDigit> naf_digits(std::int64_t k, int exponent_offset) {
    bool neg = k < 0;
    std::uint64_t u = neg ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
    std::vector<CsdDigit> out;
    int e = 0;
    while (u != 0) {
        if (u & 1) {
            int d = 2 - static_cast<int>(u & 3); // +1 if u%4==1, -1 if u%4==3
            out.push_back({neg ? -d : d, e + exponent_offset});
            u -= static_cast<std::uint64_t>(d); // d in {+1,-1}; wraps correctly for -1
        }
        u >>= 1;
        ++e;
    }
    std::reverse(out.begin(), out.end()); // most-significant first
    return out;
}

} // namespace detail

/// CSD code of the integer z (exponents from 0 upward).
inline CsdCode csd_encode_integer(std::int64_t z) {
    CsdCode code;
    code.digits = detail::naf_digits(z, 0);
    code.value = code.decode();
    return code;
}

/// CSD code of value rounded to the nearest multiple of 2^-max_fraction_bits
/// (ties away from zero).
inline CsdCode csd_encode(double value, int max_fraction_bits = kDefaultCsdFractionBits) {
    if (!std::isfinite(value)) throw Error("csd_encode: non-finite value");
    if (max_fraction_bits < 0) throw Error("csd_encode: negative fraction width");
    double scaled = std::ldexp(value, max_fraction_bits);
    if (std::abs(scaled) >= std::ldexp(1.0, 62))
        throw Error("csd_encode: value out of range for the requested width");
    std::int64_t k = std::llround(scaled);
    CsdCode code;
    code.digits = detail::naf_digits(k, -max_fraction_bits);
    code.value = code.decode();
    return code;
}

/// Exact CSD code of a dyadic rational (no rounding).
inline CsdCode csd_encode_exact(const DyadicRational& r) {
    CsdCode code;
    code.digits = detail::naf_digits(r.num, -r.log2_den);
    code.value = code.decode();
    return code;
}

/// Arithmetic cost of realizing a multiplication by the coded constant:
/// additions between the nonzero partial products, and one shift per nonzero
/// digit off exponent zero.
inline CsdCost csd_cost(const CsdCode& code) {
    CsdCost cost;
    cost.additions = std::max(0, code.nonzero_digits() - 1);
    for (const auto& d : code.digits)
        if (d.exponent != 0) ++cost.shifts;
    return cost;
}

} // namespace dyadnet
