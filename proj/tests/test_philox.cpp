#include <catch2/catch_amalgamated.hpp>

#include "latentmotion/philox.hpp"

using lm::Philox;

TEST_CASE("philox4x32-10 known-answer vectors") {
    // Random123 reference vectors (Salmon et al., SC 2011 distribution).
    const auto zero = Philox::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});

    const auto pi = Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                  {0xa4093822u, 0x299f31d0u});
    CHECK(pi == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    Philox a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool same_ab = true, same_ac = true, same_ad = true;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u32();
        same_ab &= va == b.next_u32();
        same_ac &= va == c.next_u32();
        same_ad &= va == d.next_u32();
    }
    CHECK(same_ab);
    CHECK_FALSE(same_ac);
    CHECK_FALSE(same_ad);
}

TEST_CASE("uniform01 stays in [0, 1)") {
    Philox rng(1, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
}

TEST_CASE("gaussian moments are sane") {
    Philox rng(2, 0);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sumsq += g * g;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("student_t(3) is heavier-tailed than gaussian") {
    Philox rng(3, 0);
    const int n = 200000;
    int extreme = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(rng.student_t(3)) > 4.0) ++extreme;
    // P(|N(0,1)| > 4) ~ 6e-5; t(3) exceeds 4 about 1.4% of the time.
    CHECK(extreme > n / 500);
}
