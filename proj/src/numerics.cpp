#include "bdm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace bdm {

Interval::Interval(double l, double h) : lo(l), hi(h) {
    if (std::isnan(l) || std::isnan(h) || l > h)
        throw DomainError("Interval: need lo <= hi, got [" + std::to_string(l) + ", " +
                          std::to_string(h) + "]");
}

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0) || max_depth < 1)
        throw DomainError("QuadratureSpec: rel_tol > 0, abs_tol > 0, max_depth >= 1 required");
}

// ---------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------

double log_gamma(double x) {
    if (!(x > 0) || !std::isfinite(x))
        throw DomainError("log_gamma: x must be positive and finite");
    return std::lgamma(x);
}

double trigamma(double x) {
    if (!(x > 0))
        throw DomainError("trigamma: x must be positive");
    // Recurrence up to x >= 8, then the asymptotic series
    //   1/x + 1/(2x^2) + sum B_2k / x^(2k+1).
    double acc = 0.0;
    while (x < 8.0) {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double series = inv + 0.5 * inv2 +
                    inv2 * inv * (1.0 / 6.0 +
                                  inv2 * (-1.0 / 30.0 +
                                          inv2 * (1.0 / 42.0 +
                                                  inv2 * (-1.0 / 30.0 +
                                                          inv2 * (5.0 / 66.0 - inv2 * 691.0 / 2730.0)))));
    return acc + series;
}

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 2000000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw NonConvergenceError("reg_gamma_lower: series failed to converge", 0.0, 1.0);
}

// Continued fraction for Q(a,x), valid for x >= a+1 (modified Lentz).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 2000000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16)
            return h * std::exp(-x + a * std::log(x) - log_gamma(a));
    }
    throw NonConvergenceError("reg_gamma_upper: continued fraction failed to converge", 0.0, 1.0);
}

}  // namespace

double reg_gamma_lower(double shape, double x) {
    if (!(shape > 0) || !std::isfinite(shape))
        throw DomainError("reg_gamma_lower: shape must be positive");
    if (std::isnan(x) || x < 0)
        throw DomainError("reg_gamma_lower: x must be nonnegative");
    if (x == 0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < shape + 1.0) return gamma_p_series(shape, x);
    return 1.0 - gamma_q_cf(shape, x);
}

double reg_gamma_upper(double shape, double x) {
    if (!(shape > 0) || !std::isfinite(shape))
        throw DomainError("reg_gamma_upper: shape must be positive");
    if (std::isnan(x) || x < 0)
        throw DomainError("reg_gamma_upper: x must be nonnegative");
    if (x == 0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < shape + 1.0) return 1.0 - gamma_p_series(shape, x);
    return gamma_q_cf(shape, x);
}

double inv_reg_gamma_upper(double shape, double q) {
    if (!(q > 0) || !(q < 1))
        throw DomainError("inv_reg_gamma_upper: q must be in (0,1)");
    // Bracket around the mean, then bisect/Newton via find_root.
    double lo = shape, hi = shape;
    while (reg_gamma_upper(shape, lo) < q) {
        lo *= 0.5;
        if (lo < 1e-308) return 0.0;
    }
    while (reg_gamma_upper(shape, hi) > q) {
        hi *= 2.0;
        if (hi > 1e300) throw NonConvergenceError("inv_reg_gamma_upper: no bracket", hi, 1.0);
    }
    return find_root([&](double x) { return reg_gamma_upper(shape, x) - q; },
                     Interval(lo * 0.5, hi), 1e-14);
}

namespace {

double log_beta_fn(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 1000000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) return h;
    }
    throw NonConvergenceError("reg_inc_beta: continued fraction failed to converge", 0.0, 1.0);
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0))
        throw DomainError("reg_inc_beta: a, b must be positive");
    if (std::isnan(x) || x < 0 || x > 1)
        throw DomainError("reg_inc_beta: x must be in [0,1]");
    if (x == 0) return 0.0;
    if (x == 1) return 1.0;
    const double front =
        std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta_fn(a, b));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta_fn(a, b)) *
                     beta_cf(b, a, 1.0 - x) / b;
}

double inv_reg_inc_beta(double a, double b, double p) {
    if (!(p >= 0) || !(p <= 1))
        throw DomainError("inv_reg_inc_beta: p must be in [0,1]");
    if (p == 0) return 0.0;
    if (p == 1) return 1.0;
    return find_root([&](double x) { return reg_inc_beta(a, b, x) - p; },
                     Interval(0.0, 1.0), 1e-15);
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double std_normal_quantile(double p) {
    if (!(p > 0) || !(p < 1))
        throw DomainError("std_normal_quantile: p must be in (0,1)");
    // Acklam's rational approximation, then one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = std_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

double student_t_cdf(double x, double nu) {
    if (!(nu > 0))
        throw DomainError("student_t_cdf: nu must be positive");
    const double ib = reg_inc_beta(0.5 * nu, 0.5, nu / (x * x + nu));
    return x >= 0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

// ---------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------

namespace {

// Kronrod-15 nodes/weights on [-1,1]; Gauss-7 weights at the odd nodes.
const double kXgk[8] = {0.991455371120813, 0.949107912342759, 0.864864423359769,
                        0.741531185599394, 0.586087235467691, 0.405845151377397,
                        0.207784955007898, 0.0};
const double kWgk[8] = {0.022935322010529, 0.063092092629979, 0.104790010322250,
                        0.140653259715525, 0.169004726639267, 0.190350578064785,
                        0.204432940075298, 0.209482141084728};
const double kWg[4] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                       0.417959183673469};

struct Segment {
    double a, b;
    double value, error;
    int depth;
    bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b, int depth,
             int* evals) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    *evals += 15;
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::fabs(resk);
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x), f2 = f(c + x);
        const double fsum = f1 + f2;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;
        resk += kWgk[j] * fsum;
        resabs += kWgk[j] * (std::fabs(f1) + std::fabs(f2));
    }
    double err = std::fabs((resk - resg) * h);
    // QUADPACK-style rescaling tames overly optimistic raw estimates.
    if (resabs * h > 0 && err > 0)
        err = resabs * h * std::min(1.0, std::pow(200.0 * err / (resabs * h), 1.5));
    if (!std::isfinite(resk))
        throw DomainError("integrate: non-finite integrand value");
    return {a, b, resk * h, err, depth};
}

}  // namespace

IntegrateResult integrate_full(const std::function<double(double)>& f, Interval domain,
                               const QuadratureSpec& spec) {
    spec.validate();
    if (domain.lo == domain.hi) return {0.0, 0.0, 0};

    // Map infinite domains onto (0,1) or (-1,1).
    std::function<double(double)> g = f;
    double a = domain.lo, b = domain.hi;
    const bool lo_inf = std::isinf(domain.lo), hi_inf = std::isinf(domain.hi);
    if (lo_inf && hi_inf) {
        g = [&f](double t) {
            const double om = 1.0 - t * t;
            return f(t / om) * (1.0 + t * t) / (om * om);
        };
        a = -1.0;
        b = 1.0;
    } else if (hi_inf) {
        const double lo = domain.lo;
        g = [&f, lo](double t) {
            const double om = 1.0 - t;
            return f(lo + t / om) / (om * om);
        };
        a = 0.0;
        b = 1.0;
    } else if (lo_inf) {
        const double hi = domain.hi;
        g = [&f, hi](double t) {
            const double om = 1.0 - t;
            return f(hi - t / om) / (om * om);
        };
        a = 0.0;
        b = 1.0;
    }

    int evals = 0;
    std::priority_queue<Segment> queue;
    queue.push(gk15(g, a, b, 0, &evals));
    double total = queue.top().value, toterr = queue.top().error;

    // Split the worst segment until the global tolerance is met.
    const int max_segments = 1 << 14;
    int segments = 1;
    while (toterr > std::max(spec.abs_tol, spec.rel_tol * std::fabs(total))) {
        const Segment worst = queue.top();
        if (worst.depth >= spec.max_depth || segments >= max_segments)
            throw NonConvergenceError("integrate: tolerance not met at max_depth", total, toterr);
        queue.pop();
        total -= worst.value;
        toterr -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        Segment left = gk15(g, worst.a, mid, worst.depth + 1, &evals);
        Segment right = gk15(g, mid, worst.b, worst.depth + 1, &evals);
        total += left.value + right.value;
        toterr += left.error + right.error;
        queue.push(left);
        queue.push(right);
        ++segments;
    }
    return {total, toterr, evals};
}

double integrate(const std::function<double(double)>& f, Interval domain,
                 const QuadratureSpec& spec) {
    return integrate_full(f, domain, spec).value;
}

// ---------------------------------------------------------------------
// Brent root finding
// ---------------------------------------------------------------------

double find_root(const std::function<double(double)>& f, Interval bracket, double tol) {
    double a = bracket.lo, b = bracket.hi;
    if (!std::isfinite(a) || !std::isfinite(b))
        throw BracketError("find_root: bracket must be finite");
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0)
        throw BracketError("find_root: f(lo) and f(hi) do not straddle zero");
    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0 || std::fabs(fb) <= tol * 1e-3)
            return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::fabs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return b;
}

// ---------------------------------------------------------------------
// Brent 1-D maximization
// ---------------------------------------------------------------------

MaxResult maximize_1d(const std::function<double(double)>& f, Interval bracket, double tol) {
    if (!bracket.finite())
        throw DomainError("maximize_1d: bracket must be finite");
    const double gold = 0.3819660112501051;
    double a = bracket.lo, b = bracket.hi;
    double x = a + gold * (b - a), w = x, v = x;
    double fx = -f(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * std::fabs(x) + 1e-14;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::fabs(e) > tol1) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0) p = -p;
            q = std::fabs(q);
            const double etemp = e;
            e = d;
            if (!(std::fabs(p) >= std::fabs(0.5 * q * etemp) || p <= q * (a - x) ||
                  p >= q * (b - x))) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = xm > x ? tol1 : -tol1;
                golden = false;
            }
        }
        if (golden) {
            e = x >= xm ? a - x : b - x;
            d = gold * e;
        }
        const double u = std::fabs(d) >= tol1 ? x + d : x + (d > 0 ? tol1 : -tol1);
        const double fu = -f(u);
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; w = x; x = u;
            fv = fw; fw = fx; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; w = u;
                fv = fw; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return {x, -fx};
}

MaxResult prescan_max(const std::function<double(double)>& f, Interval bracket, int points,
                      int* local_maxima) {
    if (!bracket.finite())
        throw DomainError("prescan_max: bracket must be finite");
    if (points < 3)
        throw DomainError("prescan_max: need at least 3 points");
    std::vector<double> xs(points), fs(points);
    for (int i = 0; i < points; ++i) {
        xs[i] = bracket.lo + (bracket.hi - bracket.lo) * i / (points - 1.0);
        fs[i] = f(xs[i]);
    }
    int best = 0;
    for (int i = 1; i < points; ++i)
        if (fs[i] > fs[best]) best = i;
    if (local_maxima) {
        int count = 0;
        for (int i = 1; i + 1 < points; ++i) {
            const double slack = 1e-9 * (1.0 + std::fabs(fs[i]));
            if (fs[i] > fs[i - 1] + slack && fs[i] > fs[i + 1] + slack) ++count;
        }
        // A maximum at either end of the grid counts as one mode too.
        if (fs[0] > fs[1] + 1e-9 * (1.0 + std::fabs(fs[0]))) ++count;
        if (fs[points - 1] > fs[points - 2] + 1e-9 * (1.0 + std::fabs(fs[points - 1]))) ++count;
        *local_maxima = count;
    }
    return {xs[best], fs[best]};
}

}  // namespace bdm
