#pragma once

#include <cstdint>
#include <vector>

#include "patchdet/aggregation.hpp"
#include "patchdet/label.hpp"

namespace patchdet {

struct LabeledScore {
    double score = 0.0;
    Verdict truth = Verdict::Real;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocResult {
    double auc = 0.0;
    std::vector<RocPoint> curve;  // from (0,0) to (1,1), both rates non-decreasing
    double tpr_at_zero = 0.0;
    double fpr_at_zero = 0.0;
};

/// AUC as the Mann-Whitney statistic (ties count one half), computed via tied
/// ranks in O(n log n); the curve sweeps every distinct score as a threshold.
/// Throws SingleClass when a class is absent.
RocResult compute_auc(const std::vector<LabeledScore>& samples);

struct ConfusionCounts {
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t true_negatives = 0;
    std::size_t false_negatives = 0;
};

struct ConfusionResult {
    double tpr = 0.0;
    double fpr = 0.0;
    ConfusionCounts counts;
};

/// Synthetic is the positive class; score >= threshold counts as synthetic,
/// matching classify().
ConfusionResult confusion_at(const std::vector<LabeledScore>& samples, double threshold = 0.0);

struct HistogramResult {
    double min = 0.0;
    double max = 0.0;
    double bin_width = 0.0;
    std::vector<std::size_t> real_counts;
    std::vector<std::size_t> synthetic_counts;
};

/// Equal-width bins over the combined score range, counted per class.
HistogramResult histogram(const std::vector<LabeledScore>& samples, int bin_count);

/// Synthetic stand-in for trained-CNN patch score distributions: real patches
/// draw from Normal(mu_real, sigma); each patch of a synthetic image draws
/// from Normal(mu_synthetic, sigma) with probability signal_fraction and from
/// the real distribution otherwise.
struct SimulationSpec {
    int images_per_class = 500;
    int patches_per_image = 100;
    double mu_real = -2.0;
    double mu_synthetic = 2.0;
    double sigma = 0.5;
    double signal_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PolicyComparisonRow {
    AggregationPolicy policy;
    double auc = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

/// Generate per-image patch score vectors once, aggregate them with each
/// policy and evaluate AUC plus the threshold-0 confusion. Deterministic
/// under spec.seed; per-image streams make the result schedule-independent.
std::vector<PolicyComparisonRow> simulate_policy_comparison(
    const SimulationSpec& spec, const std::vector<AggregationPolicy>& policies);

}  // namespace patchdet
