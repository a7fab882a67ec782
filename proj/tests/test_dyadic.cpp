#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dyadnet/csd.hpp"
#include "dyadnet/dyadic.hpp"

using namespace dyadnet;

TEST_CASE("dyadic rationals are stored reduced and round-trip exactly") {
    DyadicRational r(6, 3); // 6/8 = 3/4
    CHECK(r.num == 3);
    CHECK(r.log2_den == 2);
    CHECK(r.value() == 0.75);

    DyadicRational z(0, 5);
    CHECK(z.num == 0);
    CHECK(z.log2_den == 0);

    DyadicRational i(4, 0);
    CHECK(i.num == 4);
    CHECK(i.value() == 4.0);

    CHECK(DyadicRational(-27, 2).value() == -6.75);
    CHECK_THROWS(DyadicRational(1, -1));

    // text form is the set serialization contract
    CHECK(DyadicRational(-27, 2).to_string() == "-27/2^2");
    CHECK(DyadicRational::parse("-27/2^2") == DyadicRational(-27, 2));
    CHECK_THROWS_AS(DyadicRational::parse("3/4"), DataError);
}

TEST_CASE("builtin sets match their listings") {
    auto values = [](const DyadicSet& s) {
        std::vector<double> v;
        for (const auto& r : s.elements()) v.push_back(r.value());
        return v;
    };

    CHECK(values(DyadicSet::builtin("D1")) == std::vector<double>{-1, 0, 1});
    CHECK(values(DyadicSet::builtin("D2")) == std::vector<double>{-2, -1, 0, 1, 2});
    CHECK(values(DyadicSet::builtin("D3")) ==
          std::vector<double>{-4, -3, -2, -1, 0, 1, 2, 3, 4});
    CHECK(values(DyadicSet::builtin("D4")) ==
          std::vector<double>{-4, -3, -2, -1, -0.75, -0.5, -0.25, 0, 0.25, 0.5, 0.75, 1, 2, 3, 4});
    CHECK(values(DyadicSet::builtin("D5")) ==
          std::vector<double>{-7, -6, -5, -4, -3, -2, -1, -0.75, -0.5, -0.25, 0,
                              0.25, 0.5, 0.75, 1, 2, 3, 4, 5, 6, 7});
    CHECK(values(DyadicSet::builtin("D10")) ==
          std::vector<double>{-2, -1, -0.5, -0.25, -0.125, 0, 0.125, 0.25, 0.5, 1, 2});
    CHECK(values(DyadicSet::builtin("D9")) ==
          std::vector<double>{-2, -1, -0.5, -0.125, 0, 0.125, 0.5, 1, 2});

    // uniformly spaced quarter grids
    auto d6 = values(DyadicSet::builtin("D6"));
    auto d7 = values(DyadicSet::builtin("D7"));
    auto d8 = values(DyadicSet::builtin("D8"));
    CHECK(d6.size() == 33);
    CHECK(d7.size() == 41);
    CHECK(d8.size() == 57);
    CHECK(d6.front() == -4.0);
    CHECK(d6[1] == -3.75);
    CHECK(d7.front() == -5.0);
    CHECK(d8.front() == -7.0);
    CHECK(d8.back() == 7.0);
    for (std::size_t i = 1; i < d8.size(); ++i) CHECK(d8[i] - d8[i - 1] == 0.25);

    CHECK_THROWS_AS(DyadicSet::builtin("D11"), ConfigError);
    CHECK_THROWS_AS(DyadicSet::builtin("bogus"), ConfigError);
}

TEST_CASE("builtin sets are symmetric, sorted, contain zero, and are reduced") {
    for (int i = 1; i <= 10; ++i) {
        auto s = DyadicSet::builtin("D" + std::to_string(i));
        bool has_zero = false;
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto& r = s[k];
            if (r.is_zero()) has_zero = true;
            if (r.log2_den > 0) CHECK((r.num & 1) == 1);
            if (r.num == 0) CHECK(r.log2_den == 0);
            CHECK(s.contains(r.negated()));
            if (k + 1 < s.size()) CHECK(s[k].value() < s[k + 1].value());
        }
        CHECK(has_zero);
    }
}

TEST_CASE("D3 is contained in D8 element-wise") {
    auto d3 = DyadicSet::builtin("D3");
    auto d8 = DyadicSet::builtin("D8");
    for (const auto& r : d3.elements()) CHECK(d8.contains(r));
}

TEST_CASE("nearest_in_set picks the closest element") {
    auto d1 = DyadicSet::builtin("D1");
    auto d2 = DyadicSet::builtin("D2");
    CHECK(nearest_in_set(0.6, d1).value() == 1.0);
    CHECK(nearest_in_set(-0.2, d2).value() == 0.0);
    // exact tie resolves toward the smaller magnitude
    CHECK(nearest_in_set(0.5, d1).value() == 0.0);
    CHECK(nearest_in_set(-0.5, d1).value() == 0.0);
    // tie between equal magnitudes resolves toward the negative one
    CHECK(nearest_in_set(0.0, d1).value() == 0.0);
    // out-of-range values clamp to the extremes
    CHECK(nearest_in_set(99.0, d2).value() == 2.0);
    CHECK(nearest_in_set(-99.0, d2).value() == -2.0);
}

TEST_CASE("nearest_in_set agrees with a linear scan on random queries") {
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> val(-9.0, 9.0);
    std::uniform_int_distribution<int> pick(1, 10);
    for (int t = 0; t < 10000; ++t) {
        auto set = DyadicSet::builtin("D" + std::to_string(pick(rng)));
        double v = val(rng);
        const auto& fast = set.nearest(v);
        // independent linear scan with the same tie rule
        const DyadicRational* best = &set[0];
        for (const auto& r : set.elements()) {
            double dr = std::abs(v - r.value());
            double db = std::abs(v - best->value());
            if (dr < db)
                best = &r;
            else if (dr == db) {
                double ar = std::abs(r.value()), ab = std::abs(best->value());
                if (ar < ab || (ar == ab && r.value() < best->value())) best = &r;
            }
        }
        REQUIRE(fast == *best);
    }
}

TEST_CASE("every builtin element survives an 8-bit CSD round trip") {
    for (int i = 1; i <= 10; ++i) {
        auto s = DyadicSet::builtin("D" + std::to_string(i));
        for (const auto& r : s.elements()) {
            CsdCode code = csd_encode(r.value(), 8);
            CHECK(code.decode() == r.value());
        }
    }
}

TEST_CASE("set serialization round-trips through strings") {
    auto d8 = DyadicSet::builtin("D8");
    auto strings = d8.to_strings();
    auto back = DyadicSet::from_strings("D8", strings);
    CHECK(back.size() == d8.size());
    for (std::size_t i = 0; i < d8.size(); ++i) CHECK(back[i] == d8[i]);

    // malformed sets are rejected
    CHECK_THROWS(DyadicSet("bad", {DyadicRational(1, 0)}));                      // no zero, no -1
    CHECK_THROWS(DyadicSet("dup", {DyadicRational(0, 0), DyadicRational(0, 0)})); // duplicate
}
