#include "bdm/fbst.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace bdm {

ReferenceFunction ReferenceFunction::flat() {
    ReferenceFunction r;
    r.kind = Kind::flat;
    r.log_r = [](std::span<const double>) { return 0.0; };
    return r;
}

ReferenceFunction ReferenceFunction::prior(const JointPosterior& joint) {
    ReferenceFunction r;
    r.kind = Kind::prior;
    r.log_r = [&joint](std::span<const double> t) { return joint.log_prior(t); };
    return r;
}

ReferenceFunction ReferenceFunction::prior_scalar(std::function<double(double)> log_g0) {
    ReferenceFunction r;
    r.kind = Kind::prior;
    r.log_r = [f = std::move(log_g0)](std::span<const double> t) { return f(t[0]); };
    return r;
}

double surprise(const std::function<double(double)>& log_post_density,
                const ReferenceFunction& ref, double theta) {
    return std::exp(log_post_density(theta) - ref.log_r_scalar(theta));
}

EValueResult e_value_scalar(const ScalarPosterior& post, const ReferenceFunction& ref,
                            double theta_H) {
    const Interval sup = post.support();
    if (std::isnan(theta_H) || theta_H < sup.lo || theta_H > sup.hi)
        throw DomainError("e_value_scalar: theta_H outside the support closure");

    auto log_s = [&](double t) { return post.log_density(t) - ref.log_r_scalar(t); };

    // Equal-mass scan grid over all but ~1e-9 of the posterior.
    const int kPoints = 64;
    std::vector<double> grid(kPoints), vals(kPoints);
    for (int i = 0; i < kPoints; ++i) {
        const double u = 1e-9 + (1.0 - 2e-9) * i / (kPoints - 1.0);
        grid[static_cast<size_t>(i)] = post.quantile(u);
        vals[static_cast<size_t>(i)] = log_s(grid[static_cast<size_t>(i)]);
    }
    int modes = 0, best = 0;
    for (int i = 0; i < kPoints; ++i) {
        if (vals[i] > vals[best]) best = i;
        if (i > 0 && i + 1 < kPoints) {
            const double slack = 1e-9 * (1.0 + std::fabs(vals[i]));
            if (vals[i] > vals[i - 1] + slack && vals[i] > vals[i + 1] + slack) ++modes;
        }
    }
    if (modes > 1)
        throw DomainError("e_value_scalar: surprise function is not unimodal on the scan grid");

    const double lo_b = grid[static_cast<size_t>(std::max(0, best - 1))];
    const double hi_b = grid[static_cast<size_t>(std::min(kPoints - 1, best + 1))];
    const MaxResult top = maximize_1d(log_s, Interval(lo_b, hi_b), 1e-12);
    const double mode = top.arg;
    const double log_s_max = std::max(top.value, vals[static_cast<size_t>(best)]);

    const double log_s_star = log_s(theta_H);

    EValueResult res;
    res.method = EValueResult::Method::level_set;
    res.s_star = std::exp(log_s_star);
    res.log_s_star = log_s_star;

    if (log_s_star >= log_s_max - 1e-12) {
        // theta_H sits at the surprise mode: empty tangential set.
        res.ev_bar = 0.0;
        res.tangential = Interval(theta_H, theta_H);
        return res;
    }

    auto level = [&](double t) { return log_s(t) - log_s_star; };

    double theta_l, theta_r;
    if (theta_H < mode) {
        theta_l = theta_H;
        // Walk the grid right of the mode until the surprise drops below s*.
        double lo = mode, hi = grid.back();
        bool found = false;
        for (int i = best; i < kPoints; ++i) {
            if (grid[static_cast<size_t>(i)] > mode && vals[static_cast<size_t>(i)] < log_s_star) {
                hi = grid[static_cast<size_t>(i)];
                lo = i > 0 ? std::max(mode, grid[static_cast<size_t>(i - 1)]) : mode;
                found = true;
                break;
            }
        }
        if (!found) {
            // Level set runs past the scan window; the missing mass is below 1e-9.
            theta_r = grid.back();
            if (level(theta_r) > 0) {
                res.ev_bar = post.cdf(theta_r) - post.cdf(theta_l);
                res.tangential = Interval(theta_l, theta_r);
                return res;
            }
            lo = mode;
            hi = theta_r;
        }
        theta_r = find_root(level, Interval(lo, hi), 1e-12 * (1.0 + std::fabs(hi)));
    } else {
        theta_r = theta_H;
        double lo = grid.front(), hi = mode;
        bool found = false;
        for (int i = best; i >= 0; --i) {
            if (grid[static_cast<size_t>(i)] < mode && vals[static_cast<size_t>(i)] < log_s_star) {
                lo = grid[static_cast<size_t>(i)];
                hi = std::min(mode, grid[static_cast<size_t>(i + 1)]);
                found = true;
                break;
            }
        }
        if (!found) {
            theta_l = grid.front();
            if (level(theta_l) > 0) {
                res.ev_bar = post.cdf(theta_r) - post.cdf(theta_l);
                res.tangential = Interval(theta_l, theta_r);
                return res;
            }
            lo = theta_l;
            hi = mode;
        }
        theta_l = find_root(level, Interval(lo, hi), 1e-12 * (1.0 + std::fabs(hi)));
    }

    res.ev_bar = std::clamp(post.cdf(theta_r) - post.cdf(theta_l), 0.0, 1.0);
    res.tangential = Interval(theta_l, theta_r);
    return res;
}

EValueResult e_value_mc(const JointPosterior& joint, const NullCurve& null_curve,
                        const ReferenceFunction& ref, long draws, RngStream& rng) {
    if (draws < 1) throw DomainError("e_value_mc: draws >= 1 required");
    const size_t d = static_cast<size_t>(joint.dim());
    std::vector<double> theta(d);

    auto log_s_at = [&](std::span<const double> t) {
        return joint.log_density(t) - ref.log_r(t);
    };
    auto on_curve = [&](double t) {
        std::vector<double> pt(d);
        null_curve.point(t, pt);
        return log_s_at(pt);
    };

    // Constrained supremum along the null curve: coarse scan, then refine.
    const MaxResult pre = prescan_max(on_curve, null_curve.bracket, 64);
    const double step = null_curve.bracket.width() / 63.0;
    const MaxResult top = maximize_1d(
        on_curve,
        Interval(std::max(null_curve.bracket.lo, pre.arg - step),
                 std::min(null_curve.bracket.hi, pre.arg + step)),
        1e-11);
    const double log_s_star = std::max(top.value, pre.value);
    if (!std::isfinite(log_s_star))
        throw NonConvergenceError("e_value_mc: constrained supremum is not finite",
                                  log_s_star, 0.0);

    long hits = 0;
    for (long i = 0; i < draws; ++i) {
        joint.sample(rng, theta);
        if (log_s_at(theta) > log_s_star) ++hits;
    }

    EValueResult res;
    res.method = EValueResult::Method::monte_carlo;
    res.ev_bar = static_cast<double>(hits) / static_cast<double>(draws);
    res.s_star = std::exp(log_s_star);
    res.log_s_star = log_s_star;
    res.draws = draws;
    res.mc_std_err = std::sqrt(res.ev_bar * (1.0 - res.ev_bar) / static_cast<double>(draws));
    return res;
}

}  // namespace bdm
