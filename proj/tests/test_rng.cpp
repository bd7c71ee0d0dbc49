#include <cmath>
#include <vector>

#include "bdm/numerics.hpp"
#include "bdm/rng.hpp"
#include "doctest.h"

using namespace bdm;

TEST_CASE("equal (seed, stream_id) reproduce bit-identical sequences") {
    RngStream a(123456789, 42), b(123456789, 42);
    for (int i = 0; i < 1000000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
    // and identical double draws afterwards
    for (int i = 0; i < 1000; ++i) REQUIRE(a.uniform01() == b.uniform01());
}

TEST_CASE("distinct stream ids decorrelate") {
    RngStream a(9, 0), b(9, 1), c(10, 0);
    int same_ab = 0, same_ac = 0;
    for (int i = 0; i < 4096; ++i) {
        const std::uint64_t x = a.next_u64();
        if (x == b.next_u64()) ++same_ab;
        if (x == c.next_u64()) ++same_ac;
    }
    CHECK(same_ab == 0);
    CHECK(same_ac == 0);
}

TEST_CASE("uniform01 stays strictly inside (0,1)") {
    RngStream r(1, 7);
    double mn = 1.0, mx = 0.0, sum = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        const double u = r.uniform01();
        mn = std::min(mn, u);
        mx = std::max(mx, u);
        sum += u;
    }
    CHECK(mn > 0.0);
    CHECK(mx < 1.0);
    CHECK(sum / N == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal and gamma moments within 4 sigma") {
    RngStream r(2024, 3);
    const int N = 400000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        const double z = r.normal();
        s1 += z;
        s2 += z * z;
    }
    CHECK(std::fabs(s1 / N) <= 4.0 / std::sqrt(static_cast<double>(N)));
    CHECK(s2 / N == doctest::Approx(1.0).epsilon(0.02));

    const double shape = 2.5, rate = 1.5;
    double g1 = 0, g2 = 0;
    for (int i = 0; i < N; ++i) {
        const double g = r.gamma(shape, rate);
        g1 += g;
        g2 += g * g;
    }
    const double mean = g1 / N;
    const double var = g2 / N - mean * mean;
    const double se_mean = std::sqrt(shape / (rate * rate) / N);
    CHECK(std::fabs(mean - shape / rate) <= 4.0 * se_mean);
    CHECK(var == doctest::Approx(shape / (rate * rate)).epsilon(0.05));

    // shape < 1 branch
    double h1 = 0;
    for (int i = 0; i < N; ++i) h1 += r.gamma(0.4, 2.0);
    CHECK(h1 / N == doctest::Approx(0.2).epsilon(0.03));
}

TEST_CASE("exponential mean and domain") {
    RngStream r(5, 5);
    const int N = 200000;
    double s = 0;
    for (int i = 0; i < N; ++i) s += r.exponential(1.2);
    CHECK(s / N == doctest::Approx(1.2).epsilon(0.02));
    CHECK_THROWS_AS(r.exponential(0.0), DomainError);
    CHECK_THROWS_AS(r.gamma(-1.0, 1.0), DomainError);
}
