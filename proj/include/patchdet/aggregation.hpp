#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "patchdet/label.hpp"
#include "patchdet/scoring.hpp"

namespace patchdet {

/// How per-patch scores collapse into one image score.
///
/// AlarmAny: if every patch scores negative the image score is the minimum
/// (most-real evidence); as soon as one patch scores >= 0 the image score is
/// the maximum (most-synthetic evidence). AlarmCount generalizes the trigger
/// to "at least k patches score >= 0"; when fewer do, the minimum is returned.
struct AggregationPolicy {
    enum class Kind { AlarmAny, AlarmCount, Mean, Median };

    Kind kind = Kind::AlarmAny;
    int min_positives = 1;  // AlarmCount only

    static AggregationPolicy alarm_any() { return {Kind::AlarmAny, 1}; }
    static AggregationPolicy alarm_count(int k) { return {Kind::AlarmCount, k}; }
    static AggregationPolicy mean() { return {Kind::Mean, 1}; }
    static AggregationPolicy median() { return {Kind::Median, 1}; }

    std::string name() const;
    static AggregationPolicy parse(const std::string& name);

    bool operator==(const AggregationPolicy&) const = default;
};

double aggregate(const std::vector<double>& scores, const AggregationPolicy& policy);
double aggregate(const PatchScoreVector& scores, const AggregationPolicy& policy);

/// Arithmetic mean of the per-scorer image scores. Throws EmptyEnsemble.
double fuse_ensemble(const std::vector<double>& image_scores);

/// Real iff score < threshold; a score exactly at the threshold is synthetic.
Verdict classify(double score, double threshold = 0.0);

struct ScorerVerdict {
    ScorerId id;
    double score = 0.0;
    AggregationPolicy policy;
};

struct ImageVerdict {
    double fused_score = 0.0;
    Verdict label = Verdict::Real;
    std::vector<ScorerVerdict> per_scorer;
};

/// One ensemble member: a scorer plus how its patches are sampled and
/// aggregated.
struct EnsembleMember {
    std::shared_ptr<const PatchScorer> scorer;
    SamplingPolicy sampling;
    AggregationPolicy aggregation;
};

struct EnsembleConfig {
    std::vector<EnsembleMember> members;
    double threshold = 0.0;
};

/// Full per-image pipeline: sample each member's patches, score, aggregate,
/// fuse. Member streams derive from (seed, member index), so results do not
/// depend on scheduling. Throws ImageTooSmall / EmptyEnsemble / scorer errors.
ImageVerdict run_ensemble(const ImageBuffer& image, const EnsembleConfig& config,
                          std::uint64_t seed);

}  // namespace patchdet
