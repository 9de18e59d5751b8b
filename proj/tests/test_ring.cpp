#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chainring/ring.hpp"

using namespace chainring;

TEST_CASE("modular arithmetic canonical examples") {
    auto z4 = RingSpec::parse("Z/4");
    CHECK(z4.add(3, 3) == 2);
    CHECK(z4.mul(2, 2) == 0);
    CHECK(z4.is_unit(3));
    CHECK(z4.inv(3) == 3);
    CHECK_FALSE(z4.is_unit(2));
    CHECK_THROWS_AS(z4.inv(2), domain_error);

    auto z9 = RingSpec::parse("Z/9");
    CHECK(z9.inv(2) == 5);

    auto f2t2 = RingSpec::parse("F2[t]/t^2");
    CHECK(f2t2.mul(f2t2.pi(1), f2t2.pi(1)) == 0);
}

TEST_CASE("valuation convention and the ultrametric product law") {
    auto z8 = RingSpec::parse("Z/8");
    CHECK(z8.valuation(6) == 1);
    CHECK(z8.valuation(4) == 2);
    CHECK(z8.valuation(0) == 3);

    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2"), RingSpec::parse("Z/9")}) {
        for (uint32_t a = 0; a < R.size(); ++a)
            for (uint32_t b = 0; b < R.size(); ++b)
                CHECK(R.valuation(R.mul(a, b)) ==
                      std::min(R.valuation(a) + R.valuation(b), R.e()));
    }
}

TEST_CASE("residue map and enumeration") {
    auto z4 = RingSpec::parse("Z/4");
    CHECK(z4.residue(3) == 1);
    auto ideals = z4.enumerate_ideals();
    REQUIRE(ideals.size() == 3);
    CHECK(ideals[0].size() == 4);
    CHECK(ideals[1] == std::vector<uint32_t>{0, 2});
    CHECK(ideals[2] == std::vector<uint32_t>{0});

    auto f4 = RingSpec::parse("F4[t]/t");
    CHECK(f4.enumerate_units().size() == 3);

    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2"), RingSpec::parse("F3[t]/t^2")}) {
        // |units| = |R| - |m| and |m| = |R|/q
        CHECK(R.enumerate_units().size() == R.size() - R.size() / R.q());
        CHECK(R.maximal_ideal_size() == R.size() / R.q());
        // ideal chain has e+1 members, strictly nested
        auto ideals2 = R.enumerate_ideals();
        CHECK(ideals2.size() == R.e() + 1);
        for (size_t j = 1; j < ideals2.size(); ++j) CHECK(ideals2[j].size() < ideals2[j - 1].size());
    }
}

TEST_CASE("units invert, arithmetic identities hold") {
    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("Z/9"), RingSpec::parse("F4[t]/t^2"),
                   RingSpec::parse("F2[t]/t^3")}) {
        for (uint32_t a = 0; a < R.size(); ++a) {
            CHECK(R.add(a, 0) == a);
            CHECK(R.mul(a, R.one()) == a);
            CHECK(R.add(a, R.neg(a)) == 0);
            if (R.is_unit(a)) CHECK(R.mul(a, R.inv(a)) == R.one());
            if (a != 0) {
                // unit * pi^v reconstruction
                uint32_t v = R.valuation(a);
                CHECK(R.mul(R.unit_part(a), R.pi(v)) == a);
                CHECK(R.is_unit(R.unit_part(a)));
            }
        }
        // commutativity / associativity spot sweep
        for (uint32_t a = 0; a < R.size(); ++a)
            for (uint32_t b = 0; b < R.size(); ++b) {
                CHECK(R.add(a, b) == R.add(b, a));
                CHECK(R.mul(a, b) == R.mul(b, a));
                CHECK(R.mul(a, R.add(b, R.one())) == R.add(R.mul(a, b), a));
            }
    }
}

TEST_CASE("notation parses and round-trips") {
    for (const char* s : {"Z/4", "Z/9", "Z/8", "F2[t]/t^2", "F4[t]/t^2", "F9[t]/t"}) {
        auto R = RingSpec::parse(s);
        CHECK(RingSpec::parse(R.notation()) == R);
    }
    CHECK(RingSpec::parse("Z/2^3") == RingSpec::parse("Z/8"));
    CHECK(RingSpec::parse("F_4[t]/t^2") == RingSpec::parse("F4[t]/t^2"));
    CHECK_THROWS_AS(RingSpec::parse("Z/6"), usage_error);   // not a prime power
    CHECK_THROWS_AS(RingSpec::parse("Q/4"), usage_error);
    CHECK_THROWS_AS(RingSpec::parse("F6[t]/t"), usage_error);
}

TEST_CASE("elements from different rings do not mix") {
    RingElem a{1, RingSpec::parse("Z/4")};
    RingElem b{1, RingSpec::parse("Z/8")};
    CHECK_THROWS_AS(a + b, usage_error);
    RingElem c{3, RingSpec::parse("Z/4")};
    CHECK((a + c).code == 0);
    CHECK((a * c).code == 3);
    CHECK(c.inverse().code == 3);
}

TEST_CASE("shift_down and divrem are exact division by pi powers") {
    for (auto R : {RingSpec::parse("Z/8"), RingSpec::parse("F4[t]/t^2")}) {
        for (uint32_t a = 0; a < R.size(); ++a) {
            for (uint32_t k = 0; k <= R.valuation(a) && k < R.e(); ++k) {
                uint32_t y = R.shift_down(a, k);
                CHECK(R.mul(y, R.pi(k)) == a);
            }
            for (uint32_t k = 0; k <= R.e(); ++k) {
                uint32_t q, rem;
                R.divrem_pi(a, k, q, rem);
                CHECK(R.add(R.mul(q, R.pi(k)), rem) == a);
            }
        }
    }
}
