#include <cmath>
#include <vector>

#include "bdm/discrepancy.hpp"
#include "bdm/fbst.hpp"
#include "doctest.h"

using namespace bdm;

namespace {

ReferenceFunction exp_prior_ref() {
    // Jeffreys prior for the exponential mean: g0 ∝ 1/theta
    return ReferenceFunction::prior_scalar([](double t) { return -std::log(t); });
}

ReferenceFunction ig_mean_prior_ref() {
    // g0 ∝ mu^{-3/2}
    return ReferenceFunction::prior_scalar([](double t) { return -1.5 * std::log(t); });
}

}  // namespace

TEST_CASE("surprise: flat equals density, prior cancels to the likelihood") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    auto log_post = [&](double t) { return post->log_density(t); };
    CHECK(surprise(log_post, ReferenceFunction::flat(), 2.4) ==
          doctest::Approx(post->density(2.4)).epsilon(1e-12));

    // s_prior(t1)/s_prior(t2) must equal the likelihood ratio t^-n e^{-s/t}
    auto ref = exp_prior_ref();
    const double t1 = 0.9, t2 = 2.2;
    const double ratio = surprise(log_post, ref, t1) / surprise(log_post, ref, t2);
    const double lik_ratio =
        std::exp(-6.0 * std::log(t1) - 7.2 / t1 - (-6.0 * std::log(t2) - 7.2 / t2));
    CHECK(ratio == doctest::Approx(lik_ratio).epsilon(1e-10));
}

TEST_CASE("e_value_scalar: exponential model e-values (n=6)") {
    auto post = exp_jeffreys_posterior(6, 7.2);

    auto f24 = e_value_scalar(*post, ReferenceFunction::flat(), 2.4);
    CHECK(std::fabs(f24.ev_bar - 0.909) <= 0.005);  // paper
    CHECK(f24.ev_bar == doctest::Approx(0.9087).epsilon(1e-3));

    auto p24 = e_value_scalar(*post, exp_prior_ref(), 2.4);
    CHECK(std::fabs(p24.ev_bar - 0.866) <= 0.005);  // paper
    CHECK(p24.ev_bar == doctest::Approx(0.8668).epsilon(1e-3));

    auto f07 = e_value_scalar(*post, ReferenceFunction::flat(), 0.7);
    CHECK(std::fabs(f07.ev_bar - 0.646) <= 0.005);  // paper
    CHECK(f07.ev_bar == doctest::Approx(0.6456).epsilon(1e-3));

    auto p07 = e_value_scalar(*post, exp_prior_ref(), 0.7);
    CHECK(std::fabs(p07.ev_bar - 0.847) <= 0.005);  // paper
    CHECK(p07.ev_bar == doctest::Approx(0.8474).epsilon(1e-3));

    // tangential interval sanity: theta_H is the edge away from the mode
    CHECK(f24.tangential->hi == doctest::Approx(2.4).epsilon(1e-9));
    CHECK(f07.tangential->lo == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("e_value_scalar: degenerate hypothesis at the surprise mode") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    const double flat_mode = 7.2 / 7.0;  // inverse-gamma mode
    auto r = e_value_scalar(*post, ReferenceFunction::flat(), flat_mode);
    CHECK(r.ev_bar <= 1e-6);
}

TEST_CASE("e_value_scalar: far-tail hypothesis drives ev_bar toward 1") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    auto r = e_value_scalar(*post, ReferenceFunction::flat(), 60.0);
    CHECK(r.ev_bar > 0.997);
}

TEST_CASE("symmetric unimodal posterior: ev_bar equals delta (20 probes)") {
    auto post = normal_approx_posterior(0.512, 14928);
    for (int i = 0; i < 20; ++i) {
        const double u = 0.02 + 0.96 * i / 19.0;
        const double theta_H = post->quantile(u);
        const double ev = e_value_scalar(*post, ReferenceFunction::flat(), theta_H).ev_bar;
        const double delta = scalar_bdm(*post, theta_H).delta;
        CHECK(std::fabs(ev - delta) <= 1e-6);
    }
}

TEST_CASE("positively skewed posterior orders ev_bar against delta by side") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    const double m1 = post->median();
    for (double theta_H : {m1 * 1.2, m1 * 1.7, m1 * 2.6}) {
        const double ev = e_value_scalar(*post, ReferenceFunction::flat(), theta_H).ev_bar;
        const double d = scalar_bdm(*post, theta_H).delta;
        CHECK(ev > d);  // m1 < theta_H
    }
    for (double theta_H : {m1 * 0.85, m1 * 0.6, m1 * 0.4}) {
        const double ev = e_value_scalar(*post, ReferenceFunction::flat(), theta_H).ev_bar;
        const double d = scalar_bdm(*post, theta_H).delta;
        CHECK(ev < d);  // theta_H < m1
    }
}

TEST_CASE("ig-mean model: Table-style deltas and exact level-set e-values") {
    auto post = ig_mean_posterior(8, 4.2, 5.0);
    CHECK(std::fabs(scalar_bdm(*post, 2.5).delta - 0.975) <= 0.005);   // paper delta
    CHECK(std::fabs(scalar_bdm(*post, 12.0).delta - 0.907) <= 0.005);  // paper delta

    // exact level-set values (paper's 0.848/1/1 cells are KDE artifacts; see ledger)
    auto fa = e_value_scalar(*post, ReferenceFunction::flat(), 2.5);
    CHECK(fa.ev_bar == doctest::Approx(0.8123).epsilon(2e-3));
    auto pa = e_value_scalar(*post, ig_mean_prior_ref(), 2.5);
    CHECK(pa.ev_bar == doctest::Approx(0.9481).epsilon(2e-3));
    auto fb = e_value_scalar(*post, ReferenceFunction::flat(), 12.0);
    CHECK(fb.ev_bar == doctest::Approx(0.9526).epsilon(2e-3));
    auto pb = e_value_scalar(*post, ig_mean_prior_ref(), 12.0);
    CHECK(pb.ev_bar == doctest::Approx(0.9374).epsilon(2e-3));
    // prior-reference tangential set is (2.545, 12)
    CHECK(pb.tangential->lo == doctest::Approx(2.545).epsilon(2e-3));
    CHECK(pb.tangential->hi == doctest::Approx(12.0).epsilon(1e-9));
}

TEST_CASE("e_value_mc agrees with e_value_scalar within 4 std errors") {
    auto post = exp_jeffreys_posterior(6, 7.2);
    auto joint = as_joint(post, [](double t) { return -std::log(t); });

    for (double theta_H : {0.7, 2.4}) {
        for (bool flat : {true, false}) {
            auto ref = flat ? ReferenceFunction::flat() : ReferenceFunction::prior(*joint);
            auto ref_scalar = flat ? ReferenceFunction::flat() : exp_prior_ref();
            const double exact = e_value_scalar(*post, ref_scalar, theta_H).ev_bar;

            NullCurve point;
            point.point = [theta_H](double, std::span<double> out) { out[0] = theta_H; };
            point.bracket = Interval(theta_H, theta_H);
            RngStream rng(11, static_cast<std::uint64_t>(theta_H * 100) + (flat ? 0 : 1));
            auto mc = e_value_mc(*joint, point, ref, 20000, rng);
            REQUIRE(mc.mc_std_err.has_value());
            CHECK(std::fabs(mc.ev_bar - exact) <= 4.0 * std::max(*mc.mc_std_err, 1e-4));
        }
    }
}

TEST_CASE("e_value_mc on the gamma joint reproduces the exact slice oracle") {
    // H_A (alpha = 2.5), flat reference: exact conditional-slice value 0.5462.
    auto joint = gamma_jeffreys_posterior(9, 2.8111111111111111, 2.1163104768026463);
    NullCurve line;
    line.point = [](double b, std::span<double> out) {
        out[0] = 2.5;
        out[1] = b;
    };
    line.bracket = Interval(1e-3, 12.0);
    RngStream rng(0, 17);
    auto r = e_value_mc(*joint, line, ReferenceFunction::flat(), 50000, rng);
    CHECK(std::fabs(r.ev_bar - 0.5462) <= 4.0 * *r.mc_std_err + 0.002);

    RngStream rng2(0, 18);
    auto rp = e_value_mc(*joint, line, ReferenceFunction::prior(*joint), 50000, rng2);
    CHECK(std::fabs(rp.ev_bar - 0.1820) <= 4.0 * *rp.mc_std_err + 0.002);
}

TEST_CASE("e_value_mc is reproducible for a fixed stream") {
    auto joint = normal_gamma_posterior(17.0, 10, 1.6);
    NullCurve curve;
    curve.point = [](double mu, std::span<double> out) {
        out[0] = mu;
        out[1] = 1.0 / (0.1 * 0.1 * mu * mu);
    };
    curve.bracket = Interval(5.0, 40.0);
    RngStream a(5, 5), b(5, 5);
    auto ra = e_value_mc(*joint, curve, ReferenceFunction::flat(), 10000, a);
    auto rb = e_value_mc(*joint, curve, ReferenceFunction::flat(), 10000, b);
    CHECK(ra.ev_bar == rb.ev_bar);
}

TEST_CASE("non-unimodal surprise is detected") {
    // Mixture of two well-separated normals as a hand-rolled ScalarPosterior
    // via the quadrature wrapper.
    auto bimodal = make_quadrature_posterior(
        [](double x) {
            const double a = std::exp(-0.5 * (x + 4.0) * (x + 4.0));
            const double b = std::exp(-0.5 * (x - 4.0) * (x - 4.0));
            return std::log(a + b);
        },
        Interval::real(), Interval(-6.0, 6.0));
    CHECK_THROWS_AS(e_value_scalar(*bimodal, ReferenceFunction::flat(), 0.5), DomainError);
}
