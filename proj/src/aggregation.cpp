#include "patchdet/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "patchdet/error.hpp"
#include "patchdet/rng.hpp"

namespace patchdet {

std::string AggregationPolicy::name() const {
    switch (kind) {
        case Kind::AlarmAny: return "alarm-any";
        case Kind::AlarmCount: return "alarm-count:" + std::to_string(min_positives);
        case Kind::Mean: return "mean";
        case Kind::Median: return "median";
    }
    return "unknown";
}

AggregationPolicy AggregationPolicy::parse(const std::string& name) {
    if (name == "alarm-any")
        return alarm_any();
    if (name == "mean")
        return mean();
    if (name == "median")
        return median();
    if (name.rfind("alarm-count:", 0) == 0) {
        int k = 0;
        try {
            k = std::stoi(name.substr(12));
        } catch (const std::exception&) {
            raise(ErrorCode::InvalidParameter, "bad alarm-count policy '" + name + "'");
        }
        require(k >= 1, ErrorCode::InvalidParameter, "alarm-count k must be >= 1");
        return alarm_count(k);
    }
    raise(ErrorCode::InvalidParameter,
          "unknown aggregation policy '" + name +
              "' (expected alarm-any, alarm-count:<k>, mean or median)");
}

double aggregate(const std::vector<double>& scores, const AggregationPolicy& policy) {
    require(!scores.empty(), ErrorCode::EmptyScores, "cannot aggregate an empty score vector");

    switch (policy.kind) {
        case AggregationPolicy::Kind::AlarmAny:
        case AggregationPolicy::Kind::AlarmCount: {
            const int needed =
                policy.kind == AggregationPolicy::Kind::AlarmAny ? 1 : policy.min_positives;
            require(needed >= 1, ErrorCode::InvalidParameter, "alarm threshold must be >= 1");
            const auto positives = static_cast<int>(
                std::count_if(scores.begin(), scores.end(), [](double s) { return s >= 0.0; }));
            if (positives >= needed)
                return *std::max_element(scores.begin(), scores.end());
            return *std::min_element(scores.begin(), scores.end());
        }
        case AggregationPolicy::Kind::Mean: {
            // Sum in sorted order so the result is exactly permutation
            // invariant despite floating-point non-associativity.
            std::vector<double> sorted = scores;
            std::sort(sorted.begin(), sorted.end());
            return std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                   static_cast<double>(sorted.size());
        }
        case AggregationPolicy::Kind::Median: {
            std::vector<double> sorted = scores;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t mid = sorted.size() / 2;
            if (sorted.size() % 2 == 1)
                return sorted[mid];
            return (sorted[mid - 1] + sorted[mid]) / 2.0;
        }
    }
    raise(ErrorCode::InvalidParameter, "unknown aggregation policy kind");
}

double aggregate(const PatchScoreVector& scores, const AggregationPolicy& policy) {
    return aggregate(scores.scores, policy);
}

double fuse_ensemble(const std::vector<double>& image_scores) {
    require(!image_scores.empty(), ErrorCode::EmptyEnsemble,
            "ensemble fusion needs at least one scorer");
    return std::accumulate(image_scores.begin(), image_scores.end(), 0.0) /
           static_cast<double>(image_scores.size());
}

Verdict classify(double score, double threshold) {
    require(std::isfinite(score), ErrorCode::InvalidParameter, "score must be finite");
    return score < threshold ? Verdict::Real : Verdict::Synthetic;
}

const char* verdict_name(Verdict verdict) {
    return verdict == Verdict::Real ? "real" : "synthetic";
}

ImageVerdict run_ensemble(const ImageBuffer& image, const EnsembleConfig& config,
                          std::uint64_t seed) {
    require(!config.members.empty(), ErrorCode::EmptyEnsemble, "ensemble has no members");

    ImageVerdict verdict;
    std::vector<double> image_scores;
    image_scores.reserve(config.members.size());

    for (std::size_t index = 0; index < config.members.size(); ++index) {
        const auto& member = config.members[index];
        require(member.scorer != nullptr, ErrorCode::ConfigError, "ensemble member has no scorer");

        SamplingPolicy sampling = member.sampling;
        sampling.seed = derive_seed(seed, static_cast<std::uint64_t>(index));

        const auto regions = sample_patches(image, sampling);
        std::vector<ImageBuffer> patches;
        patches.reserve(regions.size());
        for (const auto& region : regions)
            patches.push_back(crop(image, region));

        const PatchScoreVector scores = score_patches(*member.scorer, patches, regions);
        const double image_score = aggregate(scores, member.aggregation);
        image_scores.push_back(image_score);
        verdict.per_scorer.push_back({member.scorer->id(), image_score, member.aggregation});
    }

    verdict.fused_score = fuse_ensemble(image_scores);
    verdict.label = classify(verdict.fused_score, config.threshold);
    return verdict;
}

}  // namespace patchdet
