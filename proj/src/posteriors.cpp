#include "bdm/posteriors.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <utility>

namespace bdm {

namespace {

constexpr double kLogDrop = 350.0;  // exp(-350) ~ 1e-152, far below any tolerance

double sqr(double x) { return x * x; }

// Jeffreys factor for the Gamma shape: sqrt(alpha * psi1(alpha) - 1).
double gamma_shape_jeffreys(double alpha) {
    const double t = alpha * trigamma(alpha) - 1.0;
    return std::sqrt(std::max(t, 0.0));
}

}  // namespace

// ---------------------------------------------------------------------
// ScalarPosterior defaults
// ---------------------------------------------------------------------

double ScalarPosterior::quantile(double p) const {
    if (!(p > 0) || !(p < 1))
        throw DomainError("quantile: p must be in (0,1)");
    const Interval sup = support();
    double a, b;
    if (sup.finite()) {
        a = sup.lo;
        b = sup.hi;
    } else {
        double x0 = 0.0;
        if (!sup.contains(0.0)) x0 = std::isfinite(sup.lo) ? sup.lo + 1.0 : sup.hi - 1.0;
        double step = 1.0;
        a = b = x0;
        while (std::isfinite(sup.lo) ? false : cdf(a) > p) { a -= step; step *= 2.0; }
        if (std::isfinite(sup.lo)) a = sup.lo;
        step = 1.0;
        while (std::isfinite(sup.hi) ? false : cdf(b) < p) { b += step; step *= 2.0; }
        if (std::isfinite(sup.hi)) b = sup.hi;
    }
    return find_root([&](double x) { return cdf(x) - p; }, Interval(a, b),
                     1e-12 * (1.0 + std::fabs(b - a)));
}

double ScalarPosterior::sample(RngStream& rng) const { return quantile(rng.uniform01()); }

// ---------------------------------------------------------------------
// Closed-form families
// ---------------------------------------------------------------------

namespace {

class InverseGammaPosterior final : public ScalarPosterior {
public:
    InverseGammaPosterior(double shape, double scale) : a_(shape), s_(scale) {
        if (!(shape > 0) || !(scale > 0))
            throw DomainError("inverse gamma: shape and scale must be positive");
    }
    Interval support() const override { return Interval::positive(); }
    double log_density(double t) const override {
        if (!(t > 0)) return -kInf;
        return a_ * std::log(s_) - log_gamma(a_) - (a_ + 1.0) * std::log(t) - s_ / t;
    }
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        return reg_gamma_upper(a_, s_ / t);
    }
    double sf(double t) const override {
        if (t <= 0) return 1.0;
        return reg_gamma_lower(a_, s_ / t);
    }
    double quantile(double p) const override { return s_ / inv_reg_gamma_upper(a_, p); }
    double sample(RngStream& rng) const override { return 1.0 / rng.gamma(a_, s_); }

private:
    double a_, s_;
};

class BetaPosterior final : public ScalarPosterior {
public:
    BetaPosterior(double a, double b) : a_(a), b_(b) {
        if (!(a > 0) || !(b > 0)) throw DomainError("beta: a and b must be positive");
        lbeta_ = log_gamma(a) + log_gamma(b) - log_gamma(a + b);
    }
    Interval support() const override { return Interval::unit(); }
    double log_density(double t) const override {
        if (!(t > 0) || !(t < 1)) return -kInf;
        return (a_ - 1.0) * std::log(t) + (b_ - 1.0) * std::log1p(-t) - lbeta_;
    }
    double cdf(double t) const override {
        if (t <= 0) return 0.0;
        if (t >= 1) return 1.0;
        return reg_inc_beta(a_, b_, t);
    }
    double sf(double t) const override {
        if (t <= 0) return 1.0;
        if (t >= 1) return 0.0;
        return reg_inc_beta(b_, a_, 1.0 - t);
    }
    double quantile(double p) const override { return inv_reg_inc_beta(a_, b_, p); }
    double sample(RngStream& rng) const override {
        const double x = rng.gamma(a_, 1.0), y = rng.gamma(b_, 1.0);
        return x / (x + y);
    }

private:
    double a_, b_, lbeta_;
};

class NormalPosterior final : public ScalarPosterior {
public:
    NormalPosterior(double mean, double sd) : m_(mean), sd_(sd) {
        if (!(sd > 0)) throw DomainError("normal: sd must be positive");
    }
    Interval support() const override { return Interval::real(); }
    double log_density(double t) const override {
        const double z = (t - m_) / sd_;
        return -0.5 * z * z - std::log(sd_) - 0.5 * std::log(2.0 * M_PI);
    }
    double cdf(double t) const override { return std_normal_cdf((t - m_) / sd_); }
    double sf(double t) const override { return std_normal_cdf((m_ - t) / sd_); }
    double quantile(double p) const override { return m_ + sd_ * std_normal_quantile(p); }
    double sample(RngStream& rng) const override { return m_ + sd_ * rng.normal(); }

private:
    double m_, sd_;
};

class GammaPosterior final : public ScalarPosterior {
public:
    GammaPosterior(double shape, double rate) : k_(shape), r_(rate) {
        if (!(shape > 0) || !(rate > 0))
            throw DomainError("gamma: shape and rate must be positive");
    }
    Interval support() const override { return Interval::positive(); }
    double log_density(double t) const override {
        if (!(t > 0)) return -kInf;
        return k_ * std::log(r_) - log_gamma(k_) + (k_ - 1.0) * std::log(t) - r_ * t;
    }
    double cdf(double t) const override { return t <= 0 ? 0.0 : reg_gamma_lower(k_, r_ * t); }
    double sf(double t) const override { return t <= 0 ? 1.0 : reg_gamma_upper(k_, r_ * t); }
    double quantile(double p) const override { return inv_reg_gamma_upper(k_, 1.0 - p) / r_; }
    double sample(RngStream& rng) const override { return rng.gamma(k_, r_); }

private:
    double k_, r_;
};

class StudentTPosterior final : public ScalarPosterior {
public:
    StudentTPosterior(double loc, double scale2, double df)
        : loc_(loc), sc_(std::sqrt(scale2)), df_(df) {
        if (!(scale2 > 0) || !(df > 0))
            throw DomainError("student t: scale2 and df must be positive");
        lnorm_ = log_gamma(0.5 * (df_ + 1.0)) - log_gamma(0.5 * df_) -
                 0.5 * std::log(df_ * M_PI) - std::log(sc_);
    }
    Interval support() const override { return Interval::real(); }
    double log_density(double t) const override {
        const double z = (t - loc_) / sc_;
        return lnorm_ - 0.5 * (df_ + 1.0) * std::log1p(z * z / df_);
    }
    double cdf(double t) const override { return student_t_cdf((t - loc_) / sc_, df_); }
    double sf(double t) const override { return student_t_cdf((loc_ - t) / sc_, df_); }
    double quantile(double p) const override {
        if (p == 0.5) return loc_;
        const double tail = p < 0.5 ? p : 1.0 - p;
        const double w = inv_reg_inc_beta(0.5 * df_, 0.5, 2.0 * tail);
        const double z = std::sqrt(df_ * (1.0 - w) / w);
        return loc_ + sc_ * (p < 0.5 ? -z : z);
    }

private:
    double loc_, sc_, df_, lnorm_;
};

// ---------------------------------------------------------------------
// Quadrature-normalized scalar posterior
// ---------------------------------------------------------------------

class QuadratureNormalized1D final : public ScalarPosterior {
public:
    QuadratureNormalized1D(std::function<double(double)> log_unnorm, Interval support,
                           Interval scan, QuadratureSpec spec)
        : f_(std::move(log_unnorm)), support_(support), spec_(spec) {
        // Locate the mode with a coarse scan, then refine.
        MaxResult pre = prescan_max(f_, scan, 64);
        const double step = scan.width() / 63.0;
        MaxResult ref = maximize_1d(f_, Interval(std::max(support.lo, pre.arg - step),
                                                 std::min(support.hi, pre.arg + step)),
                                    1e-11);
        mode_ = ref.arg;
        shift_ = ref.value;
        eff_ = effective_range();
        const auto zr = integrate_full([this](double x) { return unnorm(x); }, eff_, spec_);
        z_ = zr.value;
        if (!(z_ > 0) || !std::isfinite(z_))
            throw NonConvergenceError("quadrature posterior: normalization failed", z_, zr.error);
        log_z_ = std::log(z_);
    }

    Interval support() const override { return support_; }
    Interval effective_support() const { return eff_; }
    double mode() const { return mode_; }

    double log_density(double t) const override {
        if (!support_.contains(t)) return -kInf;
        return f_(t) - shift_ - log_z_;
    }

    double cdf(double t) const override {
        if (t <= eff_.lo) return 0.0;
        if (t >= eff_.hi) return 1.0;
        const double lower = integrate([this](double x) { return unnorm(x); },
                                       Interval(eff_.lo, t), spec_);
        const double upper = integrate([this](double x) { return unnorm(x); },
                                       Interval(t, eff_.hi), spec_);
        return lower / (lower + upper);
    }

    double sf(double t) const override {
        if (t <= eff_.lo) return 1.0;
        if (t >= eff_.hi) return 0.0;
        const double lower = integrate([this](double x) { return unnorm(x); },
                                       Interval(eff_.lo, t), spec_);
        const double upper = integrate([this](double x) { return unnorm(x); },
                                       Interval(t, eff_.hi), spec_);
        return upper / (lower + upper);
    }

    double quantile(double p) const override {
        if (!(p > 0) || !(p < 1)) throw DomainError("quantile: p must be in (0,1)");
        return find_root([&](double x) { return cdf(x) - p; }, eff_,
                         1e-12 * (1.0 + eff_.width()));
    }

    double sample(RngStream& rng) const override {
        std::call_once(table_once_, [this] { build_table(); });
        const double u = rng.uniform01();
        return inverse_cdf_table(u);
    }

private:
    double unnorm(double x) const { return std::exp(f_(x) - shift_); }

    Interval effective_range() const {
        const double target = shift_ - kLogDrop;
        double lo;
        if (std::isfinite(support_.lo)) {
            // March toward the endpoint; stop where log density crosses the floor.
            double probe = support_.lo + (mode_ - support_.lo) * 1e-14;
            if (probe == support_.lo || f_(probe) >= target) {
                lo = support_.lo;
            } else {
                lo = find_root([&](double x) { return f_(x) - target; },
                               Interval(probe, mode_), 1e-11 * (1.0 + mode_ - support_.lo));
            }
        } else {
            double s = std::max(1.0, std::fabs(mode_));
            while (f_(mode_ - s) >= target) {
                s *= 2.0;
                if (!std::isfinite(s))
                    throw NonConvergenceError("quadrature posterior: no left decay", mode_, 0);
            }
            lo = find_root([&](double x) { return f_(x) - target; },
                           Interval(mode_ - s, mode_), 1e-11 * (1.0 + s));
        }
        double hi;
        if (std::isfinite(support_.hi)) {
            double probe = support_.hi - (support_.hi - mode_) * 1e-14;
            if (probe == support_.hi || f_(probe) >= target) {
                hi = support_.hi;
            } else {
                hi = find_root([&](double x) { return f_(x) - target; },
                               Interval(mode_, probe), 1e-11 * (1.0 + support_.hi - mode_));
            }
        } else {
            double s = std::max(1.0, std::fabs(mode_));
            while (f_(mode_ + s) >= target) {
                s *= 2.0;
                if (!std::isfinite(s))
                    throw NonConvergenceError("quadrature posterior: no right decay", mode_, 0);
            }
            hi = find_root([&](double x) { return f_(x) - target; },
                           Interval(mode_, mode_ + s), 1e-11 * (1.0 + s));
        }
        return Interval(lo, hi);
    }

    // 4096-segment cumulative table with monotone Hermite inverse interpolation.
    void build_table() const {
        const int K = 4096;
        ys_.resize(K + 1);
        Fs_.resize(K + 1);
        slopes_.resize(K + 1);
        const double h = eff_.width() / K;
        for (int i = 0; i <= K; ++i) ys_[i] = eff_.lo + h * i;
        Fs_[0] = 0.0;
        QuadratureSpec seg_spec{1e-9, 1e-14, 24};
        for (int i = 0; i < K; ++i)
            Fs_[i + 1] = Fs_[i] + integrate([this](double x) { return unnorm(x); },
                                            Interval(ys_[i], ys_[i + 1]), seg_spec);
        const double total = Fs_[K];
        for (auto& v : Fs_) v /= total;
        for (int i = 0; i <= K; ++i) {
            const double pdf = unnorm(ys_[i]) / total;
            slopes_[i] = pdf > 1e-300 ? 1.0 / pdf : 0.0;
        }
        // Fritsch-Carlson limiting keeps the interpolant monotone.
        for (int i = 0; i < K; ++i) {
            const double dF = Fs_[i + 1] - Fs_[i];
            if (dF <= 0) continue;
            const double sec = h / dF;
            slopes_[i] = std::clamp(slopes_[i], 0.0, 3.0 * sec);
            slopes_[i + 1] = std::clamp(slopes_[i + 1], 0.0, 3.0 * sec);
        }
    }

    double inverse_cdf_table(double u) const {
        const auto it = std::upper_bound(Fs_.begin(), Fs_.end(), u);
        size_t i = it == Fs_.begin() ? 0 : static_cast<size_t>(it - Fs_.begin()) - 1;
        if (i >= Fs_.size() - 1) i = Fs_.size() - 2;
        const double dF = Fs_[i + 1] - Fs_[i];
        if (dF <= 0) return ys_[i];
        const double t = (u - Fs_[i]) / dF;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * ys_[i] + h10 * dF * slopes_[i] + h01 * ys_[i + 1] +
               h11 * dF * slopes_[i + 1];
    }

    std::function<double(double)> f_;
    Interval support_;
    QuadratureSpec spec_;
    double mode_ = 0, shift_ = 0, z_ = 0, log_z_ = 0;
    Interval eff_;
    mutable std::once_flag table_once_;
    mutable std::vector<double> ys_, Fs_, slopes_;
};

// ---------------------------------------------------------------------
// Monotone reparametrization
// ---------------------------------------------------------------------

class TransformedPosterior final : public ScalarPosterior {
public:
    TransformedPosterior(ScalarPosteriorPtr base, MonotoneMap map, Interval support)
        : base_(std::move(base)), map_(std::move(map)), support_(support) {}

    Interval support() const override { return support_; }
    double log_density(double t) const override {
        if (!support_.contains(t)) return -kInf;
        return base_->log_density(map_.from_theta(t)) + map_.log_abs_dy_dtheta(t);
    }
    double cdf(double t) const override {
        if (t <= support_.lo) return 0.0;
        if (t >= support_.hi) return 1.0;
        const double y = map_.from_theta(t);
        return map_.increasing ? base_->cdf(y) : base_->sf(y);
    }
    double sf(double t) const override {
        if (t <= support_.lo) return 1.0;
        if (t >= support_.hi) return 0.0;
        const double y = map_.from_theta(t);
        return map_.increasing ? base_->sf(y) : base_->cdf(y);
    }
    double quantile(double p) const override {
        return map_.to_theta(base_->quantile(map_.increasing ? p : 1.0 - p));
    }
    double sample(RngStream& rng) const override { return map_.to_theta(base_->sample(rng)); }

private:
    ScalarPosteriorPtr base_;
    MonotoneMap map_;
    Interval support_;
};

}  // namespace

ScalarPosteriorPtr make_inverse_gamma(double shape, double scale) {
    return std::make_shared<InverseGammaPosterior>(shape, scale);
}
ScalarPosteriorPtr make_beta(double a, double b) {
    return std::make_shared<BetaPosterior>(a, b);
}
ScalarPosteriorPtr make_normal(double mean, double sd) {
    return std::make_shared<NormalPosterior>(mean, sd);
}
ScalarPosteriorPtr make_gamma(double shape, double rate) {
    return std::make_shared<GammaPosterior>(shape, rate);
}
ScalarPosteriorPtr make_student_t(double location, double scale2, double df) {
    return std::make_shared<StudentTPosterior>(location, scale2, df);
}
ScalarPosteriorPtr make_quadrature_posterior(std::function<double(double)> log_unnorm,
                                             Interval support, Interval scan_bracket,
                                             const QuadratureSpec& spec) {
    return std::make_shared<QuadratureNormalized1D>(std::move(log_unnorm), support,
                                                    scan_bracket, spec);
}
ScalarPosteriorPtr make_transformed(ScalarPosteriorPtr base, MonotoneMap map) {
    // Map the base support through the transform; callers with limits at
    // infinity get them preserved by the monotone map convention below.
    const Interval bs = base->support();
    const double e1 = std::isfinite(bs.lo) ? map.to_theta(bs.lo)
                                           : (map.increasing ? -kInf : kInf);
    const double e2 = std::isfinite(bs.hi) ? map.to_theta(bs.hi)
                                           : (map.increasing ? kInf : -kInf);
    return std::make_shared<TransformedPosterior>(std::move(base), std::move(map),
                                                  Interval(std::min(e1, e2), std::max(e1, e2)));
}

// ---------------------------------------------------------------------
// Paper model constructors
// ---------------------------------------------------------------------

ScalarPosteriorPtr exp_jeffreys_posterior(long n, double sum_x) {
    if (n < 1) throw DomainError("exp_jeffreys_posterior: n >= 1 required");
    if (!(sum_x > 0)) throw DomainError("exp_jeffreys_posterior: sum_x must be positive");
    return make_inverse_gamma(static_cast<double>(n), sum_x);
}

ScalarPosteriorPtr beta_posterior(long successes, long failures, double a0, double b0) {
    if (successes < 0 || failures < 0)
        throw DomainError("beta_posterior: counts must be nonnegative");
    if (!(a0 > 0) || !(b0 > 0))
        throw DomainError("beta_posterior: a0 and b0 must be positive");
    return make_beta(a0 + static_cast<double>(successes), b0 + static_cast<double>(failures));
}

ScalarPosteriorPtr normal_approx_posterior(double theta_hat, long n) {
    if (!(theta_hat > 0) || !(theta_hat < 1))
        throw DomainError("normal_approx_posterior: theta_hat must be in (0,1)");
    if (n < 1) throw DomainError("normal_approx_posterior: n >= 1 required");
    return make_normal(theta_hat, std::sqrt(theta_hat * (1.0 - theta_hat) / n));
}

ScalarPosteriorPtr gamma_alpha_marginal(long n, double mean, double geo_mean) {
    if (n < 2) throw DomainError("gamma_alpha_marginal: n >= 2 required");
    if (!(geo_mean > 0) || !(geo_mean <= mean))
        throw DomainError("gamma_alpha_marginal: need 0 < geo_mean <= mean (AM-GM)");
    const double nn = static_cast<double>(n);
    const double log_ratio = std::log(geo_mean / (nn * mean));
    auto logf = [nn, log_ratio](double a) {
        if (!(a > 0)) return -kInf;
        const double w = gamma_shape_jeffreys(a);
        if (!(w > 0)) return -kInf;
        return std::log(w) + log_gamma(nn * a) - nn * log_gamma(a) + nn * a * log_ratio;
    };
    // Coarse log-spaced mode hunt picks the scan window.
    double best = 1.0, bestv = -kInf;
    for (int i = 0; i <= 80; ++i) {
        const double a = std::exp(-9.0 + 18.0 * i / 80.0);
        const double v = logf(a);
        if (v > bestv) { bestv = v; best = a; }
    }
    return make_quadrature_posterior(logf, Interval::positive(),
                                     Interval(best / 4.0, best * 4.0));
}

double gamma_conditional_beta_cdf(double alpha, long n, double mean, double at) {
    if (!(alpha > 0) || n < 1 || !(mean > 0) || !(at > 0))
        throw DomainError("gamma_conditional_beta_cdf: positive arguments required");
    if (std::isinf(at)) return 1.0;
    const double nn = static_cast<double>(n);
    return reg_gamma_lower(nn * alpha, nn * mean * at);
}

ScalarPosteriorPtr ig_mean_posterior(long n, double mean, double nu0) {
    if (n < 1 || !(mean > 0) || !(nu0 > 0))
        throw DomainError("ig_mean_posterior: n >= 1, mean > 0, nu0 > 0 required");
    // Internally parametrized by v = mu^{-1/2}: the density in v is
    // proportional to exp(-c v^4 + d v^2), smooth with fast decay, which
    // sidesteps the mu^{-3/2} heavy tail entirely.
    const double c = 0.5 * n * nu0 * mean;
    const double d = static_cast<double>(n) * nu0;
    auto logf = [c, d](double v) {
        if (!(v > 0)) return -kInf;
        const double v2 = v * v;
        return -c * v2 * v2 + d * v2;
    };
    const double vstar = std::sqrt(d / (2.0 * c));  // = 1/sqrt(mean)
    auto base = make_quadrature_posterior(logf, Interval::positive(),
                                          Interval(vstar / 8.0, vstar * 6.0 + 2.0));
    MonotoneMap map;
    map.to_theta = [](double v) { return 1.0 / (v * v); };
    map.from_theta = [](double t) { return 1.0 / std::sqrt(t); };
    map.log_abs_dy_dtheta = [](double t) { return std::log(0.5) - 1.5 * std::log(t); };
    map.increasing = false;
    return make_transformed(std::move(base), std::move(map));
}

// ---------------------------------------------------------------------
// Partitioning hypotheses
// ---------------------------------------------------------------------

PartitioningHypothesis PartitioningHypothesis::component(int i, double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::component;
    hyp.index = i;
    hyp.phi_H = h;
    hyp.phi = [i](std::span<const double> t) { return t[static_cast<size_t>(i)]; };
    return hyp;
}
PartitioningHypothesis PartitioningHypothesis::component_diff(int i, int j, double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::component_diff;
    hyp.index = i;
    hyp.index2 = j;
    hyp.phi_H = h;
    hyp.phi = [i, j](std::span<const double> t) {
        return t[static_cast<size_t>(i)] - t[static_cast<size_t>(j)];
    };
    return hyp;
}
PartitioningHypothesis PartitioningHypothesis::gamma_mean(double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::gamma_mean;
    hyp.phi_H = h;
    hyp.phi = [](std::span<const double> t) { return t[0] / t[1]; };
    return hyp;
}
PartitioningHypothesis PartitioningHypothesis::gamma_variance(double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::gamma_variance;
    hyp.phi_H = h;
    hyp.phi = [](std::span<const double> t) { return t[0] / (t[1] * t[1]); };
    return hyp;
}
PartitioningHypothesis PartitioningHypothesis::normal_cv(double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::normal_cv;
    hyp.phi_H = h;
    hyp.phi = [](std::span<const double> t) {
        return 1.0 / (std::fabs(t[0]) * std::sqrt(t[1]));
    };
    return hyp;
}
PartitioningHypothesis PartitioningHypothesis::ig_skewness(double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::ig_skewness;
    hyp.phi_H = h;
    hyp.phi = [](std::span<const double> t) { return 3.0 * std::sqrt(t[0] / t[1]); };
    return hyp;
}
PartitioningHypothesis PartitioningHypothesis::custom(
    std::function<double(std::span<const double>)> f, double h) {
    PartitioningHypothesis hyp;
    hyp.kind = PhiKind::custom;
    hyp.phi_H = h;
    hyp.phi = std::move(f);
    return hyp;
}

// ---------------------------------------------------------------------
// Joint posteriors
// ---------------------------------------------------------------------

namespace {

// Quantile window holding all but 1e-13 of the marginal mass; outer
// quadrature for partition integrals runs over this finite range.
Interval mass_window(const ScalarPosterior& p) {
    return Interval(p.quantile(1e-13), p.quantile(1.0 - 1e-13));
}

// Window covering all but ~1e-13 of a Gamma(shape, rate) conditional.
Interval gamma_tail_window(double shape, double rate) {
    const double hi = (shape + 45.0 * std::sqrt(shape) + 45.0) / rate;
    return Interval(0.0, hi);
}

// Construction-time sanity check for 2-D joints: iterated quadrature of
// exp(log_density) over the support must come back as 1 within 1e-6.
// inner_window anchors the conditional bump, which can sit at a scale the
// generic infinite-domain map would never sample.
void check_joint_normalization(const JointPosterior& joint, Interval outer_window,
                               const std::function<Interval(double)>& inner_window) {
    const QuadratureSpec outer_spec{1e-9, 1e-12, 60};
    const QuadratureSpec inner_spec{1e-10, 1e-13, 60};
    const double z = integrate(
        [&](double x0) {
            return integrate(
                [&](double x1) {
                    const double t[2] = {x0, x1};
                    return std::exp(joint.log_density(std::span<const double>(t, 2)));
                },
                inner_window(x0), inner_spec);
        },
        outer_window, outer_spec);
    if (std::fabs(z - 1.0) > 1e-6)
        throw NonConvergenceError("joint posterior fails the normalization check", z,
                                  std::fabs(z - 1.0));
}

PartitionProbabilities from_component(const ScalarPosterior& m, double h,
                                      PartitionProbabilities::Tag tag) {
    PartitionProbabilities pp;
    pp.p_a = m.cdf(h);
    pp.p_b = m.sf(h);
    pp.method = tag;
    return pp;
}

class NormalGammaPosterior final : public JointPosterior {
public:
    NormalGammaPosterior(double x_bar, long n, double s2) {
        if (n < 2) throw DomainError("normal_gamma_posterior: n >= 2 required");
        if (!(s2 > 0)) throw DomainError("normal_gamma_posterior: s2 must be positive");
        eta_ = x_bar;
        nu_ = static_cast<double>(n);
        alpha_ = 0.5 * (nu_ - 1.0);
        beta_ = 0.5 * nu_ * s2;
        lnorm_ = alpha_ * std::log(beta_) + 0.5 * std::log(nu_) - log_gamma(alpha_) -
                 0.5 * std::log(2.0 * M_PI);
        check_joint_normalization(*this, mass_window(*marginal(0)), [this](double mu) {
            return gamma_tail_window(alpha_ + 0.5, beta_ + 0.5 * nu_ * sqr(mu - eta_));
        });
    }

    int dim() const override { return 2; }
    BoxSupport support() const override {
        return {{Interval::real(), Interval::positive()}};
    }
    double log_density(std::span<const double> t) const override {
        const double mu = t[0], phi = t[1];
        if (!(phi > 0)) return -kInf;
        return lnorm_ + (alpha_ - 0.5) * std::log(phi) -
               phi * (beta_ + 0.5 * nu_ * sqr(mu - eta_));
    }
    double log_prior(std::span<const double> t) const override {
        return -std::log(t[1]);
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        const double phi = rng.gamma(alpha_, beta_);
        out[1] = phi;
        out[0] = eta_ + rng.normal() / std::sqrt(nu_ * phi);
    }
    ScalarPosteriorPtr marginal(int i) const override {
        if (i == 0) return make_student_t(eta_, beta_ / (nu_ * alpha_), 2.0 * alpha_);
        if (i == 1) return make_gamma(alpha_, beta_);
        return nullptr;
    }
    std::optional<PartitionProbabilities> partition_quadrature(
        const PartitioningHypothesis& hyp) const override {
        if (hyp.kind == PhiKind::component)
            return from_component(*marginal(hyp.index), hyp.phi_H,
                                  PartitionProbabilities::Tag::closed_form);
        if (hyp.kind != PhiKind::normal_cv) return std::nullopt;
        // psi = 1/(|mu| sqrt(phi)); given phi, the event psi < psi_H is
        // |mu| > 1/(psi_H sqrt(phi)), a two-sided normal tail.
        const double psiH = hyp.phi_H;
        auto gamma_logpdf = [this](double phi) {
            return alpha_ * std::log(beta_) - log_gamma(alpha_) +
                   (alpha_ - 1.0) * std::log(phi) - beta_ * phi;
        };
        auto win = mass_window(*marginal(1));
        auto integrand = [&](double phi, bool below) {
            const double cutoff = 1.0 / (psiH * std::sqrt(phi));
            const double s = std::sqrt(nu_ * phi);
            const double inside = std_normal_cdf((cutoff - eta_) * s) -
                                  std_normal_cdf((-cutoff - eta_) * s);
            const double w = std::exp(gamma_logpdf(phi));
            return w * (below ? 1.0 - inside : inside);
        };
        PartitionProbabilities pp;
        pp.p_a = integrate([&](double p) { return integrand(p, true); }, win);
        pp.p_b = integrate([&](double p) { return integrand(p, false); }, win);
        pp.method = PartitionProbabilities::Tag::quadrature;
        return pp;
    }

    double eta() const { return eta_; }
    double nu() const { return nu_; }
    double shape() const { return alpha_; }
    double rate() const { return beta_; }

private:
    double eta_, nu_, alpha_, beta_, lnorm_;
};

class GammaJeffreysPosterior final : public JointPosterior {
public:
    GammaJeffreysPosterior(long n, double mean, double geo_mean)
        : n_(static_cast<double>(n)), xbar_(mean), c_(n_ * mean) {
        marg_ = gamma_alpha_marginal(n, mean, geo_mean);
        check_joint_normalization(*this, mass_window(*marg_), [this](double a) {
            return gamma_tail_window(n_ * a, c_);
        });
    }

    int dim() const override { return 2; }
    BoxSupport support() const override {
        return {{Interval::positive(), Interval::positive()}};
    }
    double log_density(std::span<const double> t) const override {
        const double a = t[0], b = t[1];
        if (!(a > 0) || !(b > 0)) return -kInf;
        return marg_->log_density(a) + n_ * a * std::log(c_) - log_gamma(n_ * a) +
               (n_ * a - 1.0) * std::log(b) - c_ * b;
    }
    double log_prior(std::span<const double> t) const override {
        const double w = gamma_shape_jeffreys(t[0]);
        return std::log(w) - std::log(t[1]);
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        const double a = marg_->sample(rng);
        out[0] = a;
        out[1] = rng.gamma(n_ * a, c_);
    }
    ScalarPosteriorPtr marginal(int i) const override { return i == 0 ? marg_ : nullptr; }
    std::optional<PartitionProbabilities> partition_quadrature(
        const PartitioningHypothesis& hyp) const override {
        if (hyp.kind == PhiKind::component && hyp.index == 0)
            return from_component(*marg_, hyp.phi_H, PartitionProbabilities::Tag::quadrature);
        if (hyp.kind != PhiKind::gamma_mean && hyp.kind != PhiKind::gamma_variance)
            return std::nullopt;
        // mean = a/b < h  <=>  b > a/h ; variance = a/b^2 < h  <=>  b > sqrt(a/h).
        const double h = hyp.phi_H;
        const bool is_mean = hyp.kind == PhiKind::gamma_mean;
        auto cut = [h, is_mean](double a) {
            return is_mean ? a / h : std::sqrt(a / h);
        };
        auto win = mass_window(*marg_);
        auto part = [&](bool below_h) {
            return integrate(
                [&](double a) {
                    const double tail = below_h ? reg_gamma_upper(n_ * a, c_ * cut(a))
                                                : reg_gamma_lower(n_ * a, c_ * cut(a));
                    return marg_->density(a) * tail;
                },
                win);
        };
        PartitionProbabilities pp;
        pp.p_a = part(true);
        pp.p_b = part(false);
        pp.method = PartitionProbabilities::Tag::quadrature;
        return pp;
    }

    double n() const { return n_; }
    double xbar() const { return xbar_; }

private:
    double n_, xbar_, c_;
    ScalarPosteriorPtr marg_;
};

class IgJointPosterior final : public JointPosterior {
public:
    IgJointPosterior(long n, double mean, double harm_mean)
        : n_(static_cast<double>(n)), xbar_(mean), a_(harm_mean),
          kshape_(0.5 * (n_ + 1.0)) {
        if (n < 2) throw DomainError("ig_posterior: n >= 2 required");
        if (!(harm_mean > 0) || !(harm_mean < mean))
            throw DomainError("ig_posterior: need 0 < harm_mean < mean (AM-HM), "
                              "otherwise the conditional rate degenerates");
        // mu marginal ∝ mu^{-3/2} R(mu)^{-(n+1)/2}; in v = mu^{-1/2} the
        // density is bounded and fast-decaying.
        auto logf_v = [this](double v) {
            if (!(v > 0)) return -kInf;
            return -kshape_ * std::log(rate_of_v(v));
        };
        const double vstar = 1.0 / std::sqrt(mean);
        base_v_ = make_quadrature_posterior(logf_v, Interval::positive(),
                                            Interval(vstar / 8.0, vstar * 6.0 + 2.0));
        MonotoneMap map;
        map.to_theta = [](double v) { return 1.0 / (v * v); };
        map.from_theta = [](double t) { return 1.0 / std::sqrt(t); };
        map.log_abs_dy_dtheta = [](double t) { return std::log(0.5) - 1.5 * std::log(t); };
        map.increasing = false;
        marg_mu_ = make_transformed(base_v_, std::move(map));
        // Normalization check runs in the v coordinate: the mu marginal's
        // mu^{-3/2} tail would defeat a direct outer quadrature.
        const QuadratureSpec outer_spec{1e-9, 1e-12, 60};
        const QuadratureSpec inner_spec{1e-10, 1e-13, 60};
        const double z = integrate(
            [&](double v) {
                const double mu = 1.0 / (v * v);
                const double jac = 2.0 / (v * v * v);
                return jac * integrate(
                                 [&](double nu) {
                                     const double t[2] = {mu, nu};
                                     return std::exp(log_density(std::span<const double>(t, 2)));
                                 },
                                 gamma_tail_window(kshape_, rate(mu)), inner_spec);
            },
            mass_window(*base_v_), outer_spec);
        if (std::fabs(z - 1.0) > 1e-6)
            throw NonConvergenceError("ig joint posterior fails the normalization check", z,
                                      std::fabs(z - 1.0));
    }

    double rate(double mu) const {
        return 0.5 * n_ * (xbar_ / (mu * mu) - 2.0 / mu + 1.0 / a_);
    }

    int dim() const override { return 2; }
    BoxSupport support() const override {
        return {{Interval::positive(), Interval::positive()}};
    }
    double log_density(std::span<const double> t) const override {
        const double mu = t[0], nu = t[1];
        if (!(mu > 0) || !(nu > 0)) return -kInf;
        const double R = rate(mu);
        return marg_mu_->log_density(mu) + kshape_ * std::log(R) - log_gamma(kshape_) +
               (kshape_ - 1.0) * std::log(nu) - R * nu;
    }
    double log_prior(std::span<const double> t) const override {
        return -1.5 * std::log(t[0]) - 0.5 * std::log(t[1]);
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        const double mu = marg_mu_->sample(rng);
        out[0] = mu;
        out[1] = rng.gamma(kshape_, rate(mu));
    }
    ScalarPosteriorPtr marginal(int i) const override { return i == 0 ? marg_mu_ : nullptr; }
    std::optional<PartitionProbabilities> partition_quadrature(
        const PartitioningHypothesis& hyp) const override {
        if (hyp.kind == PhiKind::component && hyp.index == 0)
            return from_component(*marg_mu_, hyp.phi_H,
                                  PartitionProbabilities::Tag::quadrature);
        if (hyp.kind != PhiKind::ig_skewness) return std::nullopt;
        // gamma = 3 sqrt(mu/nu) > g  <=>  nu < 9 mu / g^2; outer integral in v.
        const double g2 = sqr(hyp.phi_H);
        auto win = mass_window(*base_v_);
        auto part = [&](bool below_h) {
            return integrate(
                [&](double v) {
                    const double mu = 1.0 / (v * v);
                    const double thr = rate_of_v(v) * 9.0 * mu / g2;
                    const double tail = below_h ? reg_gamma_upper(kshape_, thr)
                                                : reg_gamma_lower(kshape_, thr);
                    return base_v_->density(v) * tail;
                },
                win);
        };
        PartitionProbabilities pp;
        pp.p_a = part(true);
        pp.p_b = part(false);
        pp.method = PartitionProbabilities::Tag::quadrature;
        return pp;
    }

private:
    double rate_of_v(double v) const {
        const double v2 = v * v;
        return 0.5 * n_ * (xbar_ * v2 * v2 - 2.0 * v2 + 1.0 / a_);
    }

    double n_, xbar_, a_, kshape_;
    ScalarPosteriorPtr base_v_;
    ScalarPosteriorPtr marg_mu_;
};

class ScalarAsJoint final : public JointPosterior {
public:
    ScalarAsJoint(ScalarPosteriorPtr scalar, std::function<double(double)> log_prior)
        : p_(std::move(scalar)), prior_(std::move(log_prior)) {}

    int dim() const override { return 1; }
    BoxSupport support() const override { return {{p_->support()}}; }
    double log_density(std::span<const double> t) const override {
        return p_->log_density(t[0]);
    }
    double log_prior(std::span<const double> t) const override { return prior_(t[0]); }
    void sample(RngStream& rng, std::span<double> out) const override {
        out[0] = p_->sample(rng);
    }
    ScalarPosteriorPtr marginal(int i) const override { return i == 0 ? p_ : nullptr; }
    std::optional<PartitionProbabilities> partition_quadrature(
        const PartitioningHypothesis& hyp) const override {
        if (hyp.kind == PhiKind::component && hyp.index == 0)
            return from_component(*p_, hyp.phi_H, PartitionProbabilities::Tag::closed_form);
        return std::nullopt;
    }

private:
    ScalarPosteriorPtr p_;
    std::function<double(double)> prior_;
};

class ProductPosterior final : public JointPosterior {
public:
    ProductPosterior(JointPosteriorPtr first, JointPosteriorPtr second)
        : f_(std::move(first)), s_(std::move(second)), d1_(f_->dim()), d2_(s_->dim()) {}

    int dim() const override { return d1_ + d2_; }
    BoxSupport support() const override {
        BoxSupport b = f_->support();
        const BoxSupport b2 = s_->support();
        b.dims.insert(b.dims.end(), b2.dims.begin(), b2.dims.end());
        return b;
    }
    double log_density(std::span<const double> t) const override {
        return f_->log_density(t.subspan(0, static_cast<size_t>(d1_))) +
               s_->log_density(t.subspan(static_cast<size_t>(d1_)));
    }
    double log_prior(std::span<const double> t) const override {
        return f_->log_prior(t.subspan(0, static_cast<size_t>(d1_))) +
               s_->log_prior(t.subspan(static_cast<size_t>(d1_)));
    }
    void sample(RngStream& rng, std::span<double> out) const override {
        f_->sample(rng, out.subspan(0, static_cast<size_t>(d1_)));
        s_->sample(rng, out.subspan(static_cast<size_t>(d1_)));
    }
    ScalarPosteriorPtr marginal(int i) const override {
        return i < d1_ ? f_->marginal(i) : s_->marginal(i - d1_);
    }
    std::optional<PartitionProbabilities> partition_quadrature(
        const PartitioningHypothesis& hyp) const override {
        if (hyp.kind == PhiKind::component) {
            auto m = marginal(hyp.index);
            if (!m) return std::nullopt;
            return from_component(*m, hyp.phi_H, PartitionProbabilities::Tag::quadrature);
        }
        if (hyp.kind != PhiKind::component_diff) return std::nullopt;
        auto mi = marginal(hyp.index);
        auto mj = marginal(hyp.index2);
        if (!mi || !mj) return std::nullopt;
        // P(theta_i - theta_j < h) = ∫ f_j(t) F_i(t + h) dt.
        const double h = hyp.phi_H;
        auto win = mass_window(*mj);
        PartitionProbabilities pp;
        pp.p_a = integrate([&](double t) { return mj->density(t) * mi->cdf(t + h); }, win);
        pp.p_b = integrate([&](double t) { return mj->density(t) * mi->sf(t + h); }, win);
        pp.method = PartitionProbabilities::Tag::quadrature;
        return pp;
    }

private:
    JointPosteriorPtr f_, s_;
    int d1_, d2_;
};

}  // namespace

JointPosteriorPtr normal_gamma_posterior(double x_bar, long n, double s2) {
    return std::make_shared<NormalGammaPosterior>(x_bar, n, s2);
}
JointPosteriorPtr gamma_jeffreys_posterior(long n, double mean, double geo_mean) {
    return std::make_shared<GammaJeffreysPosterior>(n, mean, geo_mean);
}
JointPosteriorPtr ig_posterior(long n, double mean, double harm_mean) {
    return std::make_shared<IgJointPosterior>(n, mean, harm_mean);
}
JointPosteriorPtr product_posterior(JointPosteriorPtr first, JointPosteriorPtr second) {
    return std::make_shared<ProductPosterior>(std::move(first), std::move(second));
}
JointPosteriorPtr as_joint(ScalarPosteriorPtr scalar, std::function<double(double)> log_prior) {
    return std::make_shared<ScalarAsJoint>(std::move(scalar), std::move(log_prior));
}

PartitionProbabilities partition_probabilities(const JointPosterior& joint,
                                               const PartitioningHypothesis& hyp,
                                               PartitionMethod method, RngStream* rng,
                                               long draws) {
    if (method == PartitionMethod::quadrature) {
        auto pp = joint.partition_quadrature(hyp);
        if (!pp)
            throw DomainError(
                "partition_probabilities: no conditional reduction for this "
                "hypothesis/posterior pair; use the monte-carlo method");
        pp->p_a = std::clamp(pp->p_a, 0.0, 1.0);
        pp->p_b = std::clamp(pp->p_b, 0.0, 1.0);
        return *pp;
    }
    if (!rng) throw DomainError("partition_probabilities: monte-carlo needs an RngStream");
    if (draws < 1) throw DomainError("partition_probabilities: draws >= 1 required");
    std::vector<double> theta(static_cast<size_t>(joint.dim()));
    long below = 0, above = 0;
    for (long i = 0; i < draws; ++i) {
        joint.sample(*rng, theta);
        const double v = hyp.phi(theta);
        if (v < hyp.phi_H) ++below;
        else if (v > hyp.phi_H) ++above;
    }
    PartitionProbabilities pp;
    pp.p_a = static_cast<double>(below) / static_cast<double>(draws);
    pp.p_b = static_cast<double>(above) / static_cast<double>(draws);
    pp.method = PartitionProbabilities::Tag::monte_carlo;
    pp.mc_std_err = std::sqrt(pp.p_a * (1.0 - pp.p_a) / static_cast<double>(draws));
    return pp;
}

}  // namespace bdm
