#include "bdm/discrepancy.hpp"

#include <algorithm>
#include <cmath>

namespace bdm {

Threshold::Threshold(double w) : omega(w) {
    if (!(w > 0) || !(w < 1)) throw DomainError("Threshold: omega must be in (0,1)");
}

DiscrepancyResult scalar_bdm(const ScalarPosterior& post, double theta_H) {
    const Interval sup = post.support();
    if (std::isnan(theta_H) || theta_H < sup.lo || theta_H > sup.hi)
        throw DomainError("scalar_bdm: theta_H outside the support closure");

    const double G = post.cdf(theta_H);
    const double upper = post.sf(theta_H);
    const double tail = std::min(G, upper);

    DiscrepancyResult r;
    r.delta = std::max(0.0, 1.0 - 2.0 * tail);
    r.median = post.quantile(0.5);
    // External interval: the tail beyond theta_H away from the median.
    if (theta_H > *r.median)
        r.external_interval = Interval(theta_H, sup.hi);
    else if (theta_H < *r.median)
        r.external_interval = Interval(sup.lo, theta_H);
    else
        r.external_interval = Interval(theta_H, sup.hi);
    return r;
}

DiscrepancyResult partition_bdm(const PartitionProbabilities& pp) {
    if (pp.p_a < 0 || pp.p_a > 1 || pp.p_b < 0 || pp.p_b > 1 || pp.p_a + pp.p_b > 1.0 + 1e-9)
        throw DomainError("partition_bdm: invalid partition probabilities");
    DiscrepancyResult r;
    r.delta = std::clamp(1.0 - 2.0 * std::min(pp.p_a, pp.p_b), 0.0, 1.0);
    r.partition = pp;
    return r;
}

Decision bdt_decide(const DiscrepancyResult& result, Threshold threshold) {
    return result.delta > threshold.omega ? Decision::reject : Decision::not_reject;
}

double frequentist_pvalue_relation(double delta) {
    if (!(delta >= 0) || !(delta <= 1))
        throw DomainError("frequentist_pvalue_relation: delta must be in [0,1]");
    return 1.0 - delta;
}

}  // namespace bdm
