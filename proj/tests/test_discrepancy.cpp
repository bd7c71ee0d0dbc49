#include <cmath>
#include <random>

#include "bdm/discrepancy.hpp"
#include "doctest.h"

using namespace bdm;

TEST_CASE("exponential model golden deltas (theta_H = 2.4, xbar = 1.2)") {
    auto r6 = scalar_bdm(*exp_jeffreys_posterior(6, 7.2), 2.4);
    auto r12 = scalar_bdm(*exp_jeffreys_posterior(12, 14.4), 2.4);
    auto r24 = scalar_bdm(*exp_jeffreys_posterior(24, 28.8), 2.4);
    CHECK(std::fabs(r6.delta - 0.832) <= 0.005);    // paper
    CHECK(std::fabs(r12.delta - 0.960) <= 0.005);   // paper
    CHECK(std::fabs(r24.delta - 0.997) <= 0.003);   // paper
    CHECK(r6.delta == doctest::Approx(0.83223).epsilon(1e-3));
    CHECK(*r6.median == doctest::Approx(1.2698051713826883).epsilon(1e-9));
    // median < theta_H, so the external interval is the right tail
    CHECK(r6.external_interval->lo == doctest::Approx(2.4));
    CHECK(std::isinf(r6.external_interval->hi));
}

TEST_CASE("delta vanishes at the median and errors outside the support") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    auto r = scalar_bdm(*post, post->median());
    CHECK(r.delta <= 1e-9);
    CHECK_THROWS_AS(scalar_bdm(*post, -1.0), DomainError);
}

TEST_CASE("partition_bdm") {
    PartitionProbabilities pp;
    pp.p_a = 0.089;
    pp.p_b = 0.911;
    CHECK(partition_bdm(pp).delta == doctest::Approx(0.822).epsilon(1e-12));
    pp.p_a = 0.311;
    pp.p_b = 0.689;
    CHECK(partition_bdm(pp).delta == doctest::Approx(0.378).epsilon(1e-12));
    pp.p_a = 0.5;
    pp.p_b = 0.5;
    CHECK(partition_bdm(pp).delta == doctest::Approx(0.0).scale(1));
    pp.p_a = 0.7;
    pp.p_b = 0.7;
    CHECK_THROWS_AS(partition_bdm(pp), DomainError);
}

TEST_CASE("bdt_decide uses a strict inequality") {
    DiscrepancyResult r;
    r.delta = 0.960;
    CHECK(bdt_decide(r, Threshold::w95()) == Decision::reject);
    r.delta = 0.832;
    CHECK(bdt_decide(r, Threshold::w95()) == Decision::not_reject);
    r.delta = 0.95;
    CHECK(bdt_decide(r, Threshold::w95()) == Decision::not_reject);  // equality: keep H
    CHECK_THROWS_AS(Threshold(1.0), DomainError);
}

TEST_CASE("p-value relation") {
    CHECK(frequentist_pvalue_relation(0.832) == doctest::Approx(0.168).epsilon(1e-12));
    CHECK(frequentist_pvalue_relation(0.96) == doctest::Approx(0.04).epsilon(1e-12));
    CHECK(frequentist_pvalue_relation(0.0) == 1.0);
    CHECK_THROWS_AS(frequentist_pvalue_relation(-0.1), DomainError);
}

TEST_CASE("reparametrization invariance under the log transform (50 cases)") {
    std::mt19937_64 gen(2718);
    std::uniform_real_distribution<double> ushape(1.5, 20.0), uscale(0.5, 30.0), uq(0.02, 0.98);
    for (int i = 0; i < 50; ++i) {
        ScalarPosteriorPtr post;
        if (i % 2 == 0)
            post = make_inverse_gamma(ushape(gen), uscale(gen));
        else
            post = make_gamma(ushape(gen), uscale(gen));
        const double theta_H = post->quantile(uq(gen));

        MonotoneMap map;
        map.to_theta = [](double y) { return std::log(y); };
        map.from_theta = [](double l) { return std::exp(l); };
        map.log_abs_dy_dtheta = [](double l) { return l; };
        map.increasing = true;
        auto log_post = make_transformed(post, map);

        const double d1 = scalar_bdm(*post, theta_H).delta;
        const double d2 = scalar_bdm(*log_post, std::log(theta_H)).delta;
        CHECK(std::fabs(d1 - d2) <= 1e-8);
    }
}

TEST_CASE("discrepancy/external/tail formulations agree (50 cases)") {
    // 2 * mass(I_H) == 1 - 2 * mass(I_E) == 1 - 2 min{G, 1-G}
    std::mt19937_64 gen(314159);
    std::uniform_real_distribution<double> ushape(2.0, 15.0), uscale(1.0, 10.0), uq(0.05, 0.95);
    for (int i = 0; i < 50; ++i) {
        auto post = make_inverse_gamma(ushape(gen), uscale(gen));
        const double theta_H = post->quantile(uq(gen));
        const double m1 = post->median();
        auto dens = [&](double x) { return post->density(x); };

        const double ih = integrate(dens, Interval(std::min(m1, theta_H), std::max(m1, theta_H)),
                                    QuadratureSpec{1e-11, 1e-13, 60});
        const double via_IH = 2.0 * ih;

        Interval ie = theta_H >= m1 ? Interval(theta_H, kInf) : Interval(0.0, theta_H);
        const double via_IE = 1.0 - 2.0 * integrate(dens, ie, QuadratureSpec{1e-11, 1e-13, 60});

        const double via_tail = scalar_bdm(*post, theta_H).delta;

        CHECK(std::fabs(via_IH - via_tail) <= 1e-8);
        CHECK(std::fabs(via_IE - via_tail) <= 1e-8);
    }
}

TEST_CASE("delta grows with the median-to-hypothesis distance") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    const double m1 = post->median();
    double prev = -1.0;
    for (double t = m1 + 0.05; t < m1 + 4.0; t += 0.21) {
        const double d = scalar_bdm(*post, t).delta;
        CHECK(d > prev);
        prev = d;
    }
    prev = -1.0;
    for (double t = m1 - 0.02; t > 0.1; t -= 0.07) {
        const double d = scalar_bdm(*post, t).delta;
        CHECK(d > prev);
        prev = d;
    }
}
