#include "patchdet/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "patchdet/error.hpp"
#include "patchdet/rng.hpp"

namespace patchdet {

void SimulationSpec::validate() const {
    require(images_per_class >= 1, ErrorCode::SpecError, "images_per_class must be >= 1");
    require(patches_per_image >= 1, ErrorCode::SpecError, "patches_per_image must be >= 1");
    require(sigma > 0.0, ErrorCode::SpecError, "sigma must be positive");
    require(signal_fraction > 0.0 && signal_fraction <= 1.0, ErrorCode::SpecError,
            "signal_fraction must be in (0, 1]");
    require(std::isfinite(mu_real) && std::isfinite(mu_synthetic), ErrorCode::SpecError,
            "score means must be finite");
}

namespace {

struct ClassTotals {
    std::size_t synthetic = 0;
    std::size_t real = 0;
};

ClassTotals count_classes(const std::vector<LabeledScore>& samples) {
    ClassTotals totals;
    for (const auto& sample : samples) {
        if (sample.truth == Verdict::Synthetic)
            ++totals.synthetic;
        else
            ++totals.real;
    }
    return totals;
}

void require_both_classes(const ClassTotals& totals) {
    require(totals.synthetic > 0 && totals.real > 0, ErrorCode::SingleClass,
            "need at least one sample of each class");
}

}  // namespace

RocResult compute_auc(const std::vector<LabeledScore>& samples) {
    for (const auto& sample : samples)
        require(std::isfinite(sample.score), ErrorCode::InvalidParameter,
                "scores must be finite");
    const ClassTotals totals = count_classes(samples);
    require_both_classes(totals);

    // Tied-rank Mann-Whitney: AUC = (rank sum of synthetic - ns(ns+1)/2) / (ns * nr).
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&samples](std::size_t a, std::size_t b) {
        return samples[a].score < samples[b].score;
    });

    double synthetic_rank_sum = 0.0;
    std::size_t index = 0;
    while (index < order.size()) {
        std::size_t end = index + 1;
        while (end < order.size() &&
               samples[order[end]].score == samples[order[index]].score)
            ++end;
        // 1-based average rank of the tie group [index, end).
        const double avg_rank = static_cast<double>(index + 1 + end) / 2.0;
        for (std::size_t k = index; k < end; ++k)
            if (samples[order[k]].truth == Verdict::Synthetic)
                synthetic_rank_sum += avg_rank;
        index = end;
    }

    const double ns = static_cast<double>(totals.synthetic);
    const double nr = static_cast<double>(totals.real);

    RocResult result;
    result.auc = (synthetic_rank_sum - ns * (ns + 1.0) / 2.0) / (ns * nr);

    // Curve: sweep thresholds from +inf down through every distinct score;
    // each step classifies one tie group as synthetic.
    result.curve.push_back({0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t pos = order.size();
    while (pos > 0) {
        std::size_t start = pos;
        const double score = samples[order[pos - 1]].score;
        while (start > 0 && samples[order[start - 1]].score == score)
            --start;
        for (std::size_t k = start; k < pos; ++k) {
            if (samples[order[k]].truth == Verdict::Synthetic)
                ++tp;
            else
                ++fp;
        }
        result.curve.push_back({static_cast<double>(fp) / nr, static_cast<double>(tp) / ns});
        pos = start;
    }

    const ConfusionResult at_zero = confusion_at(samples, 0.0);
    result.tpr_at_zero = at_zero.tpr;
    result.fpr_at_zero = at_zero.fpr;
    return result;
}

ConfusionResult confusion_at(const std::vector<LabeledScore>& samples, double threshold) {
    const ClassTotals totals = count_classes(samples);
    require_both_classes(totals);

    ConfusionResult result;
    for (const auto& sample : samples) {
        const bool predicted_synthetic = sample.score >= threshold;
        if (sample.truth == Verdict::Synthetic) {
            if (predicted_synthetic)
                ++result.counts.true_positives;
            else
                ++result.counts.false_negatives;
        } else {
            if (predicted_synthetic)
                ++result.counts.false_positives;
            else
                ++result.counts.true_negatives;
        }
    }
    result.tpr = static_cast<double>(result.counts.true_positives) /
                 static_cast<double>(totals.synthetic);
    result.fpr = static_cast<double>(result.counts.false_positives) /
                 static_cast<double>(totals.real);
    return result;
}

HistogramResult histogram(const std::vector<LabeledScore>& samples, int bin_count) {
    require(bin_count >= 1, ErrorCode::InvalidParameter, "bin_count must be >= 1");
    require(!samples.empty(), ErrorCode::InvalidParameter, "histogram needs samples");

    HistogramResult result;
    result.min = samples.front().score;
    result.max = samples.front().score;
    for (const auto& sample : samples) {
        result.min = std::min(result.min, sample.score);
        result.max = std::max(result.max, sample.score);
    }
    result.real_counts.assign(static_cast<std::size_t>(bin_count), 0);
    result.synthetic_counts.assign(static_cast<std::size_t>(bin_count), 0);
    result.bin_width = (result.max - result.min) / bin_count;

    for (const auto& sample : samples) {
        int bin = 0;
        if (result.bin_width > 0.0) {
            bin = static_cast<int>((sample.score - result.min) / result.bin_width);
            bin = std::clamp(bin, 0, bin_count - 1);
        }
        if (sample.truth == Verdict::Synthetic)
            ++result.synthetic_counts[static_cast<std::size_t>(bin)];
        else
            ++result.real_counts[static_cast<std::size_t>(bin)];
    }
    return result;
}

std::vector<PolicyComparisonRow> simulate_policy_comparison(
    const SimulationSpec& spec, const std::vector<AggregationPolicy>& policies) {
    spec.validate();
    require(!policies.empty(), ErrorCode::SpecError, "no aggregation policies requested");

    const Rng root(spec.seed);
    const auto simulate_image = [&spec, &root](Verdict truth, int image_index) {
        const std::uint64_t klass = truth == Verdict::Synthetic ? 1 : 0;
        Rng stream = root.derive((klass << 32) | static_cast<std::uint64_t>(image_index));
        std::vector<double> scores(static_cast<std::size_t>(spec.patches_per_image));
        for (auto& score : scores) {
            const bool signal =
                truth == Verdict::Synthetic && stream.bernoulli(spec.signal_fraction);
            score = stream.normal(signal ? spec.mu_synthetic : spec.mu_real, spec.sigma);
        }
        return scores;
    };

    // Patch vectors are generated once and shared across policies so the
    // comparison isolates the aggregation rule.
    std::vector<std::vector<double>> real_images;
    std::vector<std::vector<double>> synthetic_images;
    real_images.reserve(static_cast<std::size_t>(spec.images_per_class));
    synthetic_images.reserve(static_cast<std::size_t>(spec.images_per_class));
    for (int i = 0; i < spec.images_per_class; ++i) {
        real_images.push_back(simulate_image(Verdict::Real, i));
        synthetic_images.push_back(simulate_image(Verdict::Synthetic, i));
    }

    std::vector<PolicyComparisonRow> rows;
    rows.reserve(policies.size());
    for (const auto& policy : policies) {
        std::vector<LabeledScore> labeled;
        labeled.reserve(real_images.size() + synthetic_images.size());
        for (const auto& scores : real_images)
            labeled.push_back({aggregate(scores, policy), Verdict::Real});
        for (const auto& scores : synthetic_images)
            labeled.push_back({aggregate(scores, policy), Verdict::Synthetic});

        const RocResult roc = compute_auc(labeled);
        rows.push_back({policy, roc.auc, roc.tpr_at_zero, roc.fpr_at_zero});
    }
    return rows;
}

}  // namespace patchdet
