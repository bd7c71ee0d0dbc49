#pragma once

// Concrete posterior families (closed-form and quadrature-normalized) and
// the generic partition-probability machinery for partitioning hypotheses.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bdm/numerics.hpp"
#include "bdm/rng.hpp"

namespace bdm {

// ---------------------------------------------------------------------
// Scalar posteriors
// ---------------------------------------------------------------------

// One-dimensional, absolutely continuous posterior. Immutable after
// construction and safe to share across threads. cdf/sf clamp outside the
// support; quantile is the inverse of cdf on the interior.
class ScalarPosterior {
public:
    virtual ~ScalarPosterior() = default;

    virtual Interval support() const = 0;
    virtual double log_density(double theta) const = 0;
    virtual double cdf(double theta) const = 0;

    // Survival function 1 - cdf, overridden where a sharper form exists.
    virtual double sf(double theta) const { return 1.0 - cdf(theta); }

    virtual double quantile(double p) const;
    virtual double sample(RngStream& rng) const;

    double density(double theta) const { return std::exp(log_density(theta)); }
    double median() const { return quantile(0.5); }
};

using ScalarPosteriorPtr = std::shared_ptr<const ScalarPosterior>;

// Closed-form families.
ScalarPosteriorPtr make_inverse_gamma(double shape, double scale);
ScalarPosteriorPtr make_beta(double a, double b);
ScalarPosteriorPtr make_normal(double mean, double sd);
ScalarPosteriorPtr make_gamma(double shape, double rate);
// Location-scale Student t: location + sqrt(scale2) * T(df).
ScalarPosteriorPtr make_student_t(double location, double scale2, double df);

// Quadrature-normalized posterior from an unnormalized log density.
// scan_bracket is a finite window known to contain the mode.
ScalarPosteriorPtr make_quadrature_posterior(std::function<double(double)> log_unnorm,
                                             Interval support, Interval scan_bracket,
                                             const QuadratureSpec& spec = {});

// Monotone reparametrization theta = to_theta(y) of a base posterior over y.
// log_abs_dy_dtheta supplies log|d from_theta/d theta| for the density Jacobian.
struct MonotoneMap {
    std::function<double(double)> to_theta;
    std::function<double(double)> from_theta;
    std::function<double(double)> log_abs_dy_dtheta;
    bool increasing = true;
};
ScalarPosteriorPtr make_transformed(ScalarPosteriorPtr base, MonotoneMap map);

// --- Paper model constructors (sufficient statistics in, posterior out) ---

// Exponential mean under the Jeffreys prior 1/theta: InvGamma(n, sum_x).
ScalarPosteriorPtr exp_jeffreys_posterior(long n, double sum_x);

// Bernoulli proportion, conjugate Beta(a0 + successes, b0 + failures).
ScalarPosteriorPtr beta_posterior(long successes, long failures, double a0, double b0);

// Normal asymptotic approximation N(theta_hat, theta_hat(1-theta_hat)/n).
ScalarPosteriorPtr normal_approx_posterior(double theta_hat, long n);

// Gamma-model shape marginal under the Jeffreys prior:
//   m(alpha) ∝ sqrt(alpha psi1(alpha) - 1) Gamma(n alpha)/Gamma(alpha)^n (mg/(n xbar))^{n alpha}.
ScalarPosteriorPtr gamma_alpha_marginal(long n, double mean, double geo_mean);

// Conditional CDF P(beta <= at | alpha) = P(n alpha, n mean at).
double gamma_conditional_beta_cdf(double alpha, long n, double mean, double at);

// Inverse-Gaussian mean with known shape nu0:
//   g(mu) ∝ mu^{-3/2} exp{-n nu0 (xbar/(2 mu^2) - 1/mu)} on (0, inf).
ScalarPosteriorPtr ig_mean_posterior(long n, double mean, double nu0);

// ---------------------------------------------------------------------
// Joint posteriors and partitioning hypotheses
// ---------------------------------------------------------------------

struct BoxSupport {
    std::vector<Interval> dims;
};

enum class PhiKind {
    component,        // phi = theta[index]
    component_diff,   // phi = theta[index] - theta[index2]
    gamma_mean,       // phi = alpha / beta
    gamma_variance,   // phi = alpha / beta^2
    normal_cv,        // phi = 1 / (|mu| sqrt(phi_prec))
    ig_skewness,      // phi = 3 sqrt(mu / nu)
    custom,
};

// A scalar functional phi with a reference value phi_H; induces the
// three-way partition {phi < phi_H}, {phi = phi_H}, {phi > phi_H}.
struct PartitioningHypothesis {
    PhiKind kind = PhiKind::custom;
    int index = 0;
    int index2 = 0;
    double phi_H = 0.0;
    std::function<double(std::span<const double>)> phi;

    static PartitioningHypothesis component(int i, double h);
    static PartitioningHypothesis component_diff(int i, int j, double h);
    static PartitioningHypothesis gamma_mean(double h);
    static PartitioningHypothesis gamma_variance(double h);
    static PartitioningHypothesis normal_cv(double h);
    static PartitioningHypothesis ig_skewness(double h);
    static PartitioningHypothesis custom(std::function<double(std::span<const double>)> f,
                                         double h);
};

enum class PartitionMethod { quadrature, monte_carlo };

struct PartitionProbabilities {
    double p_a = 0.0;  // P(phi < phi_H | x)
    double p_b = 0.0;  // P(phi > phi_H | x)
    enum class Tag { closed_form, quadrature, monte_carlo } method = Tag::quadrature;
    std::optional<double> mc_std_err;
};

// 2- or 4-dimensional posterior over a box support with a seedable sampler.
class JointPosterior {
public:
    virtual ~JointPosterior() = default;

    virtual int dim() const = 0;
    virtual BoxSupport support() const = 0;
    virtual double log_density(std::span<const double> theta) const = 0;

    // Unnormalized log prior g0; used as the FBST reference function.
    virtual double log_prior(std::span<const double> theta) const = 0;

    virtual void sample(RngStream& rng, std::span<double> out) const = 0;

    // Closed-form 1-D marginal of component i, when one exists.
    virtual ScalarPosteriorPtr marginal(int /*i*/) const { return nullptr; }

    // Partition probabilities by 1-D outer quadrature over a closed-form
    // conditional; nullopt when this family cannot reduce the hypothesis.
    virtual std::optional<PartitionProbabilities> partition_quadrature(
        const PartitioningHypothesis& hyp) const {
        (void)hyp;
        return std::nullopt;
    }
};

using JointPosteriorPtr = std::shared_ptr<const JointPosterior>;

// Normal model, Jeffreys prior 1/phi: Normal-Gamma over (mu, phi).
JointPosteriorPtr normal_gamma_posterior(double x_bar, long n, double s2);

// Gamma model, Jeffreys prior, over (alpha, beta); beta|alpha ~ Gamma(n alpha, n xbar).
JointPosteriorPtr gamma_jeffreys_posterior(long n, double mean, double geo_mean);

// Inverse-Gaussian model over (mu, nu); nu|mu ~ Gamma((n+1)/2, R(mu)).
JointPosteriorPtr ig_posterior(long n, double mean, double harm_mean);

// Product of two independent posteriors (two-population problems).
JointPosteriorPtr product_posterior(JointPosteriorPtr first, JointPosteriorPtr second);

// 1-D adapter so scalar posteriors can ride the joint machinery
// (Monte-Carlo e-values and partitions). log_prior supplies g0.
JointPosteriorPtr as_joint(ScalarPosteriorPtr scalar, std::function<double(double)> log_prior);

// p_a = P(phi < phi_H | x), p_b = P(phi > phi_H | x).
// quadrature requires conditional structure (else DomainError); monte_carlo
// requires an RngStream and reports sqrt(p(1-p)/draws).
PartitionProbabilities partition_probabilities(const JointPosterior& joint,
                                               const PartitioningHypothesis& hyp,
                                               PartitionMethod method,
                                               RngStream* rng = nullptr, long draws = 5000);

}  // namespace bdm
