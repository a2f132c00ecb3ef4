#include "patchdet/scoring.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "patchdet/error.hpp"

namespace patchdet {

using nlohmann::json;

double normalized_cross_correlation(const ImageBuffer& a, const ImageBuffer& b) {
    require(a.width() == b.width() && a.height() == b.height(), ErrorCode::ShapeMismatch,
            "cross-correlation requires equal dimensions");
    const auto& da = a.data();
    const auto& db = b.data();
    const double n = static_cast<double>(da.size());

    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        mean_a += da[i];
        mean_b += db[i];
    }
    mean_a /= n;
    mean_b /= n;

    double cross = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double xa = da[i] - mean_a;
        const double xb = db[i] - mean_b;
        cross += xa * xb;
        var_a += xa * xa;
        var_b += xb * xb;
    }
    if (var_a <= 0.0 || var_b <= 0.0)
        return 0.0;
    return cross / std::sqrt(var_a * var_b);
}

namespace {

class ConstantScorer final : public PatchScorer {
public:
    ConstantScorer(ScorerId id, double value) : id_(std::move(id)), value_(value) {}
    const ScorerId& id() const override { return id_; }
    std::vector<double> score_batch(std::span<const ImageBuffer> patches) const override {
        return std::vector<double>(patches.size(), value_);
    }

private:
    ScorerId id_;
    double value_;
};

class LumaThresholdScorer final : public PatchScorer {
public:
    LumaThresholdScorer(ScorerId id, double pivot, double gain)
        : id_(std::move(id)), pivot_(pivot), gain_(gain) {}
    const ScorerId& id() const override { return id_; }
    std::vector<double> score_batch(std::span<const ImageBuffer> patches) const override {
        std::vector<double> scores;
        scores.reserve(patches.size());
        for (const auto& patch : patches)
            scores.push_back(gain_ * (mean_luma(patch) - pivot_));
        return scores;
    }

private:
    ScorerId id_;
    double pivot_;
    double gain_;
};

class PlantedSignalScorer final : public PatchScorer {
public:
    PlantedSignalScorer(ScorerId id, ImageBuffer pattern, double gain)
        : id_(std::move(id)), pattern_(std::move(pattern)), gain_(gain) {}
    const ScorerId& id() const override { return id_; }
    std::vector<double> score_batch(std::span<const ImageBuffer> patches) const override {
        std::vector<double> scores;
        scores.reserve(patches.size());
        for (const auto& patch : patches)
            scores.push_back(gain_ * normalized_cross_correlation(patch, pattern_));
        return scores;
    }

private:
    ScorerId id_;
    ImageBuffer pattern_;
    double gain_;
};

enum class FeatureKind { ChannelMean, ChannelMeanStd, Flatten };

struct DenseLayer {
    std::vector<std::vector<double>> weights;  // [out][in]
    std::vector<double> bias;
    enum class Activation { None, Relu, Tanh } activation = Activation::None;
};

/// Feed-forward scorer loaded from a JSON weight artifact. Patches are
/// normalized per channel, reduced to the artifact's feature vector and
/// pushed through the dense layers; the head is mapped to one signed score.
class MlpBackendScorer final : public PatchScorer {
public:
    MlpBackendScorer(ScorerId id, ModelBackendConfig config, FeatureKind features,
                     std::vector<DenseLayer> layers)
        : id_(std::move(id)),
          config_(std::move(config)),
          features_(features),
          layers_(std::move(layers)) {}

    const ScorerId& id() const override { return id_; }

    std::vector<double> score_batch(std::span<const ImageBuffer> patches) const override {
        std::vector<double> scores;
        scores.reserve(patches.size());
        for (std::size_t index = 0; index < patches.size(); ++index) {
            const auto& patch = patches[index];
            if (patch.width() != config_.input_size || patch.height() != config_.input_size)
                raise(ErrorCode::ShapeMismatch,
                      "patch " + std::to_string(index) + " is " + std::to_string(patch.width()) +
                          "x" + std::to_string(patch.height()) + " but model '" + id_ +
                          "' expects " + std::to_string(config_.input_size) + "x" +
                          std::to_string(config_.input_size));
            scores.push_back(score_one(patch));
        }
        return scores;
    }

private:
    double score_one(const ImageBuffer& patch) const {
        std::vector<double> values = extract_features(patch);
        for (const auto& layer : layers_) {
            std::vector<double> next(layer.weights.size(), 0.0);
            for (std::size_t row = 0; row < layer.weights.size(); ++row) {
                double acc = layer.bias[row];
                const auto& weights = layer.weights[row];
                for (std::size_t col = 0; col < weights.size(); ++col)
                    acc += weights[col] * values[col];
                switch (layer.activation) {
                    case DenseLayer::Activation::Relu: acc = acc > 0.0 ? acc : 0.0; break;
                    case DenseLayer::Activation::Tanh: acc = std::tanh(acc); break;
                    case DenseLayer::Activation::None: break;
                }
                next[row] = acc;
            }
            values = std::move(next);
        }
        if (config_.output_convention == OutputConvention::ClassPairDiff)
            return values[1] - values[0];
        return values[0];
    }

    std::vector<double> extract_features(const ImageBuffer& patch) const {
        const auto& data = patch.data();
        const std::size_t pixels = data.size() / 3;
        const auto normalize = [this](std::uint8_t v, int c) {
            return (static_cast<double>(v) / 255.0 - config_.channel_mean[c]) /
                   config_.channel_std[c];
        };

        if (features_ == FeatureKind::Flatten) {
            std::vector<double> out(data.size());
            for (std::size_t i = 0; i < data.size(); ++i)
                out[i] = normalize(data[i], static_cast<int>(i % 3));
            return out;
        }

        std::vector<double> mean(3, 0.0);
        for (std::size_t i = 0; i < data.size(); i += 3)
            for (int c = 0; c < 3; ++c)
                mean[c] += normalize(data[i + c], c);
        for (auto& m : mean)
            m /= static_cast<double>(pixels);
        if (features_ == FeatureKind::ChannelMean)
            return mean;

        std::vector<double> var(3, 0.0);
        for (std::size_t i = 0; i < data.size(); i += 3)
            for (int c = 0; c < 3; ++c) {
                const double d = normalize(data[i + c], c) - mean[c];
                var[c] += d * d;
            }
        std::vector<double> out = mean;
        for (int c = 0; c < 3; ++c)
            out.push_back(std::sqrt(var[c] / static_cast<double>(pixels)));
        return out;
    }

    ScorerId id_;
    ModelBackendConfig config_;
    FeatureKind features_;
    std::vector<DenseLayer> layers_;
};

FeatureKind parse_feature_kind(const std::string& name) {
    if (name == "channel_mean")
        return FeatureKind::ChannelMean;
    if (name == "channel_mean_std")
        return FeatureKind::ChannelMeanStd;
    if (name == "flatten")
        return FeatureKind::Flatten;
    raise(ErrorCode::ModelLoadError, "unknown feature extractor '" + name + "'");
}

std::size_t feature_dimension(FeatureKind kind, int input_size) {
    switch (kind) {
        case FeatureKind::ChannelMean: return 3;
        case FeatureKind::ChannelMeanStd: return 6;
        case FeatureKind::Flatten:
            return static_cast<std::size_t>(input_size) * static_cast<std::size_t>(input_size) * 3;
    }
    return 0;
}

}  // namespace

std::shared_ptr<PatchScorer> load_model_backend(const ModelBackendConfig& config) {
    require(config.input_size >= 1, ErrorCode::InvalidParameter, "input_size must be >= 1");
    require(config.channel_mean.size() == 3 && config.channel_std.size() == 3,
            ErrorCode::InvalidParameter, "normalization must list 3 channel means and stds");
    for (double s : config.channel_std)
        require(s > 0.0, ErrorCode::InvalidParameter, "channel std must be positive");

    std::ifstream in(config.model_path);
    if (!in)
        raise(ErrorCode::ModelLoadError, "cannot open model artifact " + config.model_path);

    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        raise(ErrorCode::ModelLoadError,
              "malformed model artifact " + config.model_path + ": " + e.what());
    }

    try {
        const std::string format = doc.at("format").get<std::string>();
        if (format != "patchdet-mlp/1")
            raise(ErrorCode::ModelLoadError, "unsupported model format '" + format + "'");

        const int declared_size = doc.at("input_size").get<int>();
        if (declared_size != config.input_size)
            raise(ErrorCode::ShapeMismatch,
                  "model expects " + std::to_string(declared_size) + "x" +
                      std::to_string(declared_size) + " patches, config requests " +
                      std::to_string(config.input_size));

        const FeatureKind features =
            parse_feature_kind(doc.value("features", std::string("channel_mean_std")));

        std::vector<DenseLayer> layers;
        std::size_t current_dim = feature_dimension(features, config.input_size);
        for (const auto& layer_doc : doc.at("layers")) {
            DenseLayer layer;
            layer.weights = layer_doc.at("weights").get<std::vector<std::vector<double>>>();
            layer.bias = layer_doc.at("bias").get<std::vector<double>>();
            const std::string act = layer_doc.value("activation", std::string("none"));
            if (act == "relu")
                layer.activation = DenseLayer::Activation::Relu;
            else if (act == "tanh")
                layer.activation = DenseLayer::Activation::Tanh;
            else if (act != "none")
                raise(ErrorCode::ModelLoadError, "unknown activation '" + act + "'");

            require(!layer.weights.empty(), ErrorCode::ModelLoadError, "layer has no rows");
            require(layer.bias.size() == layer.weights.size(), ErrorCode::ModelLoadError,
                    "bias length must equal layer row count");
            for (const auto& row : layer.weights)
                if (row.size() != current_dim)
                    raise(ErrorCode::ModelLoadError,
                          "layer row width " + std::to_string(row.size()) +
                              " does not match incoming dimension " + std::to_string(current_dim));
            current_dim = layer.weights.size();
            layers.push_back(std::move(layer));
        }
        require(!layers.empty(), ErrorCode::ModelLoadError, "model declares no layers");

        const std::size_t expected_outputs =
            config.output_convention == OutputConvention::ClassPairDiff ? 2 : 1;
        if (current_dim != expected_outputs)
            raise(ErrorCode::ModelLoadError,
                  "model emits " + std::to_string(current_dim) + " outputs, expected " +
                      std::to_string(expected_outputs) + " for the configured output convention");

        ScorerId id = config.id.value_or(
            std::filesystem::path(config.model_path).stem().string());
        return std::make_shared<MlpBackendScorer>(std::move(id), config, features,
                                                  std::move(layers));
    } catch (const json::exception& e) {
        raise(ErrorCode::ModelLoadError,
              "invalid model artifact " + config.model_path + ": " + e.what());
    }
}

std::shared_ptr<PatchScorer> make_analytic_scorer(const AnalyticScorerSpec& spec) {
    require(std::isfinite(spec.value) && std::isfinite(spec.pivot) && std::isfinite(spec.gain),
            ErrorCode::InvalidParameter, "analytic scorer parameters must be finite");
    switch (spec.kind) {
        case AnalyticScorerSpec::Kind::ConstantScore:
            return std::make_shared<ConstantScorer>(spec.id.empty() ? "constant" : spec.id,
                                                    spec.value);
        case AnalyticScorerSpec::Kind::LumaThreshold:
            return std::make_shared<LumaThresholdScorer>(
                spec.id.empty() ? "luma_threshold" : spec.id, spec.pivot, spec.gain);
        case AnalyticScorerSpec::Kind::PlantedSignal:
            require(spec.pattern.width() >= 1 && spec.pattern.height() >= 1,
                    ErrorCode::InvalidParameter, "planted-signal scorer needs a pattern");
            return std::make_shared<PlantedSignalScorer>(
                spec.id.empty() ? "planted_signal" : spec.id, spec.pattern, spec.gain);
    }
    raise(ErrorCode::InvalidParameter, "unknown analytic scorer kind");
}

PatchScoreVector score_patches(const PatchScorer& scorer,
                               std::span<const ImageBuffer> patches,
                               std::vector<PatchRegion> regions) {
    require(!patches.empty(), ErrorCode::EmptyScores, "cannot score an empty patch list");
    require(patches.size() == regions.size(), ErrorCode::InvalidParameter,
            "regions must parallel patches");

    std::vector<double> scores;
    try {
        scores = scorer.score_batch(patches);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ScoringError)
            throw;
        raise(ErrorCode::ScoringError, std::string("scorer '") + scorer.id() + "' failed: " +
                                           e.what());
    }
    require(scores.size() == patches.size(), ErrorCode::ScoringError,
            "scorer '" + scorer.id() + "' returned " + std::to_string(scores.size()) +
                " scores for " + std::to_string(patches.size()) + " patches");
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!std::isfinite(scores[i]))
            raise(ErrorCode::ScoringError, "scorer '" + scorer.id() +
                                               "' produced a non-finite score at patch " +
                                               std::to_string(i));
    return PatchScoreVector{scorer.id(), std::move(scores), std::move(regions)};
}

}  // namespace patchdet
