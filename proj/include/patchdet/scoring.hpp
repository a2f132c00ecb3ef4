#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "patchdet/image.hpp"
#include "patchdet/patching.hpp"

namespace patchdet {

using ScorerId = std::string;

/// One signed score per patch: negative = real, positive = synthetic.
/// Implementations must be pure per patch (a patch's score cannot depend on
/// batch composition or order) and safely callable from multiple threads.
class PatchScorer {
public:
    virtual ~PatchScorer() = default;
    virtual const ScorerId& id() const = 0;
    virtual std::vector<double> score_batch(std::span<const ImageBuffer> patches) const = 0;
};

/// Scores of one scorer over the patches of one image, parallel to `regions`.
struct PatchScoreVector {
    ScorerId scorer;
    std::vector<double> scores;
    std::vector<PatchRegion> regions;
};

enum class OutputConvention {
    /// Model emits one scalar, already a signed logit.
    Logit,
    /// Model emits [real, synthetic] scores; the patch score is their difference.
    ClassPairDiff,
};

struct ModelBackendConfig {
    std::string model_path;
    int input_size = kDefaultPatchSize;
    std::vector<double> channel_mean = {0.5, 0.5, 0.5};
    std::vector<double> channel_std = {0.5, 0.5, 0.5};
    OutputConvention output_convention = OutputConvention::Logit;
    std::optional<ScorerId> id;  // defaults to the artifact filename
};

/// Load a serialized feed-forward scorer (JSON weight file, see README) and
/// wrap it behind the PatchScorer contract: pixels are normalized per config,
/// the network is evaluated per patch and the output is mapped to the signed
/// score convention. Throws ModelLoadError / ShapeMismatch.
std::shared_ptr<PatchScorer> load_model_backend(const ModelBackendConfig& config);

struct AnalyticScorerSpec {
    enum class Kind { ConstantScore, LumaThreshold, PlantedSignal };

    Kind kind = Kind::ConstantScore;
    ScorerId id;  // defaults to a kind-derived name when empty

    // ConstantScore
    double value = 0.0;
    // LumaThreshold: gain * (mean luma - pivot), luma in [0, 1]
    double pivot = 0.5;
    double gain = 1.0;
    // PlantedSignal: gain * normalized cross-correlation with the template
    ImageBuffer pattern;
};

/// Deterministic scorers with closed-form outputs; the test oracles for
/// everything downstream of scoring.
std::shared_ptr<PatchScorer> make_analytic_scorer(const AnalyticScorerSpec& spec);

/// Run one scorer over an image's patches. Validates the scorer contract
/// (length, finiteness) and wraps scorer failures as ScoringError.
PatchScoreVector score_patches(const PatchScorer& scorer,
                               std::span<const ImageBuffer> patches,
                               std::vector<PatchRegion> regions);

/// Zero-mean normalized cross-correlation over all samples of two same-sized
/// images, in [-1, 1]; 0 when either side has no variance.
double normalized_cross_correlation(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace patchdet
