#pragma once

// Special functions, deterministic quadrature, root finding and scalar
// optimization. Everything downstream (posteriors, BDM, FBST, simulation)
// builds on this layer.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace bdm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval [lo, hi]; either endpoint may be +/-infinity.
struct Interval {
    double lo = -kInf;
    double hi = kInf;

    Interval() = default;
    Interval(double l, double h);

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
    bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }

    static Interval positive() { return {0.0, kInf}; }
    static Interval real() { return {-kInf, kInf}; }
    static Interval unit() { return {0.0, 1.0}; }
};

struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    int max_depth = 60;

    void validate() const;
};

// Domain violations (bad arguments, value outside support).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Bracket does not straddle a sign change.
class BracketError : public std::runtime_error {
public:
    explicit BracketError(const std::string& what) : std::runtime_error(what) {}
};

// Quadrature ran out of depth; carries the best estimate and its bound.
class NonConvergenceError : public std::runtime_error {
public:
    NonConvergenceError(const std::string& what, double estimate, double error_bound)
        : std::runtime_error(what), best_estimate(estimate), error_bound(error_bound) {}
    double best_estimate;
    double error_bound;
};

// ---------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------

// ln Gamma(x), x > 0.
double log_gamma(double x);

// psi^(1)(x) = sum_{j>=0} (x+j)^-2, x > 0.  Absolute error <= 1e-12.
double trigamma(double x);

// Regularized incomplete gamma P(a,x) and Q(a,x) = 1 - P(a,x).
double reg_gamma_lower(double shape, double x);
double reg_gamma_upper(double shape, double x);

// x such that reg_gamma_upper(shape, x) = q, q in (0,1).
double inv_reg_gamma_upper(double shape, double q);

// Regularized incomplete beta I_x(a, b) and its inverse in x.
double reg_inc_beta(double a, double b, double x);
double inv_reg_inc_beta(double a, double b, double p);

// Standard normal CDF and quantile.
double std_normal_cdf(double z);
double std_normal_quantile(double p);

// CDF of Student's t with nu degrees of freedom.
double student_t_cdf(double x, double nu);

// ---------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------

struct IntegrateResult {
    double value = 0.0;
    double error = 0.0;   // estimated bound
    int evaluations = 0;
};

// Adaptive Gauss-Kronrod (G7,K15) with interval bisection. Semi-infinite
// and doubly infinite domains are mapped onto finite ones by the monotone
// substitutions x = lo + t/(1-t), x = hi - t/(1-t), x = t/(1-t^2).
// Throws NonConvergenceError when max_depth is exhausted before the
// tolerance max(abs_tol, rel_tol*|I|) is met.
IntegrateResult integrate_full(const std::function<double(double)>& f,
                               Interval domain, const QuadratureSpec& spec = {});
double integrate(const std::function<double(double)>& f,
                 Interval domain, const QuadratureSpec& spec = {});

// ---------------------------------------------------------------------
// Root finding and 1-D maximization
// ---------------------------------------------------------------------

// Brent's method on [bracket.lo, bracket.hi]; requires a sign change.
double find_root(const std::function<double(double)>& f, Interval bracket, double tol);

struct MaxResult {
    double arg = 0.0;
    double value = 0.0;
};

// Brent parabolic/golden maximization of a unimodal f (caller asserts
// unimodality; see the pre-scan helper below for bracket selection).
MaxResult maximize_1d(const std::function<double(double)>& f, Interval bracket, double tol);

// Coarse grid scan over a finite bracket; returns the best grid point.
// local_maxima (optional out) counts strict interior local maxima.
MaxResult prescan_max(const std::function<double(double)>& f, Interval bracket,
                      int points = 64, int* local_maxima = nullptr);

}  // namespace bdm
