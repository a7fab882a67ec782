#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dyadnet/errors.hpp"

namespace dyadnet {

/// Exact value num / 2^log2_den. Stored reduced: when log2_den > 0 the
/// numerator is odd, and zero is always 0 / 2^0.
struct DyadicRational {
    std::int64_t num = 0;
    int log2_den = 0;

    DyadicRational() = default;

    DyadicRational(std::int64_t m, int n) : num(m), log2_den(n) {
        if (n < 0) throw Error("DyadicRational: negative log2 denominator");
        if (num == 0) {
            log2_den = 0;
            return;
        }
        while (log2_den > 0 && (num & 1) == 0) {
            num >>= 1;
            --log2_den;
        }
    }

    static DyadicRational from_integer(std::int64_t m) { return DyadicRational(m, 0); }

    double value() const { return std::ldexp(static_cast<double>(num), -log2_den); }

    bool is_zero() const { return num == 0; }

    DyadicRational negated() const { return DyadicRational(-num, log2_den); }

    // exact comparison on a common denominator
    friend bool operator<(const DyadicRational& a, const DyadicRational& b) {
        int d = std::max(a.log2_den, b.log2_den);
        return (a.num << (d - a.log2_den)) < (b.num << (d - b.log2_den));
    }
    friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
        return a.num == b.num && a.log2_den == b.log2_den;
    }
    friend bool operator!=(const DyadicRational& a, const DyadicRational& b) { return !(a == b); }

    std::string to_string() const {
        return std::to_string(num) + "/2^" + std::to_string(log2_den);
    }

    static DyadicRational parse(const std::string& s) {
        auto sep = s.find("/2^");
        if (sep == std::string::npos)
            throw DataError("DyadicRational: expected \"m/2^n\", got \"" + s + "\"");
        try {
            std::int64_t m = std::stoll(s.substr(0, sep));
            int n = std::stoi(s.substr(sep + 3));
            return DyadicRational(m, n);
        } catch (const std::exception&) {
            throw DataError("DyadicRational: cannot parse \"" + s + "\"");
        }
    }
};

/// A finite symmetric alphabet of dyadic rationals, sorted ascending.
class DyadicSet {
public:
    DyadicSet() = default;

    DyadicSet(std::string name, std::vector<DyadicRational> elements)
        : name_(std::move(name)), elements_(std::move(elements)) {
        std::sort(elements_.begin(), elements_.end());
        validate();
        values_.reserve(elements_.size());
        for (const auto& r : elements_) values_.push_back(r.value());
    }

    const std::string& name() const { return name_; }
    const std::vector<DyadicRational>& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }
    const DyadicRational& operator[](std::size_t i) const { return elements_[i]; }

    bool contains(const DyadicRational& r) const {
        return std::binary_search(elements_.begin(), elements_.end(), r);
    }

    /// Largest log2 denominator over the elements; the whole set lives on the
    /// grid Z / 2^scale.
    int scale_log2() const {
        int s = 0;
        for (const auto& r : elements_) s = std::max(s, r.log2_den);
        return s;
    }

    /// Closest element to value via binary search. Ties prefer the smaller
    /// absolute value, then the negative one.
    const DyadicRational& nearest(double value) const {
        if (elements_.empty()) throw Error("DyadicSet::nearest on empty set");
        auto it = std::lower_bound(values_.begin(), values_.end(), value);
        std::size_t hi = static_cast<std::size_t>(it - values_.begin());
        std::size_t best = hi < values_.size() ? hi : values_.size() - 1;
        if (hi > 0) {
            std::size_t lo = hi - 1;
            if (best >= values_.size()) best = lo;
            double dl = std::abs(value - values_[lo]);
            double db = std::abs(value - values_[best]);
            if (dl < db) {
                best = lo;
            } else if (dl == db && lo != best) {
                double al = std::abs(values_[lo]), ab = std::abs(values_[best]);
                if (al < ab || (al == ab && values_[lo] < values_[best])) best = lo;
            }
        }
        return elements_[best];
    }

    std::vector<std::string> to_strings() const {
        std::vector<std::string> out;
        out.reserve(elements_.size());
        for (const auto& r : elements_) out.push_back(r.to_string());
        return out;
    }

    static DyadicSet from_strings(std::string name, const std::vector<std::string>& strs) {
        std::vector<DyadicRational> el;
        el.reserve(strs.size());
        for (const auto& s : strs) el.push_back(DyadicRational::parse(s));
        return DyadicSet(std::move(name), std::move(el));
    }

    /// The predefined alphabets D1..D10.
    static DyadicSet builtin(const std::string& name);

private:
    void validate() const {
        bool has_zero = false;
        for (std::size_t i = 0; i < elements_.size(); ++i) {
            if (elements_[i].is_zero()) has_zero = true;
            if (i + 1 < elements_.size() && !(elements_[i] < elements_[i + 1]))
                throw Error("DyadicSet " + name_ + ": duplicate or unsorted elements");
            if (!contains_negation(elements_[i]))
                throw Error("DyadicSet " + name_ + ": not symmetric at " + elements_[i].to_string());
        }
        if (!has_zero) throw Error("DyadicSet " + name_ + ": missing zero");
    }

    bool contains_negation(const DyadicRational& r) const {
        auto n = r.negated();
        for (const auto& e : elements_)
            if (e == n) return true;
        return false;
    }

    std::string name_;
    std::vector<DyadicRational> elements_;
    std::vector<double> values_;
};

namespace detail {

inline std::vector<DyadicRational> integer_span(int lo, int hi) {
    std::vector<DyadicRational> out;
    for (int i = lo; i <= hi; ++i) out.push_back(DyadicRational::from_integer(i));
    return out;
}

// lo/4 .. hi/4 inclusive in steps of 1/4
inline std::vector<DyadicRational> quarter_span(int lo, int hi) {
    std::vector<DyadicRational> out;
    for (int q = lo; q <= hi; ++q) out.emplace_back(q, 2);
    return out;
}

inline std::vector<DyadicRational> from_quarters(std::initializer_list<int> quarters) {
    std::vector<DyadicRational> out;
    for (int q : quarters) out.emplace_back(q, 2);
    return out;
}

inline std::vector<DyadicRational> from_eighths(std::initializer_list<int> eighths) {
    std::vector<DyadicRational> out;
    for (int e : eighths) out.emplace_back(e, 3);
    return out;
}

} // namespace detail

inline DyadicSet DyadicSet::builtin(const std::string& name) {
    using namespace detail;
    if (name == "D1") return DyadicSet("D1", integer_span(-1, 1));
    if (name == "D2") return DyadicSet("D2", integer_span(-2, 2));
    if (name == "D3") return DyadicSet("D3", integer_span(-4, 4));
    if (name == "D4")
        return DyadicSet("D4", from_quarters({-16, -12, -8, -4, -3, -2, -1, 0, 1, 2, 3, 4, 8, 12, 16}));
    if (name == "D5") {
        auto el = integer_span(-7, 7);
        for (int q : {-3, -2, -1, 1, 2, 3}) el.emplace_back(q, 2);
        return DyadicSet("D5", std::move(el));
    }
    if (name == "D6") return DyadicSet("D6", quarter_span(-16, 16));
    if (name == "D7") return DyadicSet("D7", quarter_span(-20, 20));
    if (name == "D8") return DyadicSet("D8", quarter_span(-28, 28));
    if (name == "D9")
        return DyadicSet("D9", from_eighths({-16, -8, -4, -1, 0, 1, 4, 8, 16}));
    if (name == "D10")
        return DyadicSet("D10", from_eighths({-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16}));
    throw ConfigError("unknown dyadic set \"" + name + "\" (expected D1..D10)");
}

/// Convenience free function mirroring the set-level nearest-neighbour search.
inline const DyadicRational& nearest_in_set(double value, const DyadicSet& set) {
    return set.nearest(value);
}

} // namespace dyadnet
