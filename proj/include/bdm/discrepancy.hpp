#pragma once

// The BDM/BDT core: discrepancy measure for scalar and partition-form
// hypotheses, the threshold test, and the matching-prior p-value relation.

#include <optional>

#include "bdm/posteriors.hpp"

namespace bdm {

struct Threshold {
    double omega = 0.95;

    Threshold() = default;
    explicit Threshold(double w);

    static Threshold w95() { return Threshold(0.95); }
    static Threshold w99() { return Threshold(0.99); }
    static Threshold w995() { return Threshold(0.995); }
    static Threshold w999() { return Threshold(0.999); }
};

enum class Decision { reject, not_reject };

// delta = 1 - 2 min{G(theta_H), 1 - G(theta_H)}; lives in [0,1) for interior
// hypotheses and attains 1 only in the degenerate support-boundary limit.
// Scalar-case results carry the posterior median and the external interval
// (tail beyond theta_H on the side away from the median; a median tie is
// reported as the right tail by convention).
struct DiscrepancyResult {
    double delta = 0.0;
    std::optional<double> median;
    std::optional<Interval> external_interval;
    std::optional<PartitionProbabilities> partition;

    bool reject_at(Threshold t) const { return delta > t.omega; }
};

DiscrepancyResult scalar_bdm(const ScalarPosterior& post, double theta_H);
DiscrepancyResult partition_bdm(const PartitionProbabilities& pp);
Decision bdt_decide(const DiscrepancyResult& result, Threshold threshold);

// p-value = 1 - delta; exact for matching priors (diagnostic only).
double frequentist_pvalue_relation(double delta);

}  // namespace bdm
