#pragma once

// Full Bayesian Significance Test comparator: surprise function, constrained
// supremum over the null set, tangential-set probability (the e-value),
// under flat and prior reference functions.

#include <functional>
#include <optional>
#include <span>

#include "bdm/posteriors.hpp"

namespace bdm {

// Reference function r(theta) for the surprise s = g1/r. Stored in log form;
// improper references are fine since the tangential set is invariant to the
// normalizing constant.
struct ReferenceFunction {
    enum class Kind { flat, prior } kind = Kind::flat;
    std::function<double(std::span<const double>)> log_r;

    double log_r_scalar(double theta) const {
        const double t[1] = {theta};
        return kind == Kind::flat ? 0.0 : log_r(std::span<const double>(t, 1));
    }

    static ReferenceFunction flat();
    // Joint prior of the given posterior (unnormalized Jeffreys).
    static ReferenceFunction prior(const JointPosterior& joint);
    // Scalar prior from a log-density evaluator.
    static ReferenceFunction prior_scalar(std::function<double(double)> log_g0);
};

struct EValueResult {
    double ev_bar = 0.0;   // evidence against H
    double s_star = 0.0;   // surprise supremum over the null set
    double log_s_star = 0.0;
    enum class Method { level_set, monte_carlo } method = Method::level_set;
    long draws = 0;
    std::optional<double> mc_std_err;
    std::optional<Interval> tangential;  // level-set path only

    double ev() const { return 1.0 - ev_bar; }
};

// s(theta) = exp(log_post(theta)) / r(theta).
double surprise(const std::function<double(double)>& log_post_density,
                const ReferenceFunction& ref, double theta);

// Scalar precise hypothesis: s* = s(theta_H); the level set {s > s*} of a
// unimodal surprise is an interval found by root finding on each side of the
// s-mode, and ev_bar is its posterior mass. Throws DomainError when a
// 64-point pre-scan sees more than one local maximum.
EValueResult e_value_scalar(const ScalarPosterior& post, const ReferenceFunction& ref,
                            double theta_H);

// One-parameter null set (curve or line) inside a joint parameter space.
struct NullCurve {
    // Fills theta for a given curve parameter t.
    std::function<void(double, std::span<double>)> point;
    Interval bracket;  // finite window containing the constrained maximizer
};

// Multivariate path: s* maximized along the null curve, ev_bar estimated as
// the fraction of posterior draws whose surprise exceeds s*.
EValueResult e_value_mc(const JointPosterior& joint, const NullCurve& null_curve,
                        const ReferenceFunction& ref, long draws, RngStream& rng);

}  // namespace bdm
