#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "patchdet/image.hpp"
#include "patchdet/rng.hpp"

namespace patchdet {

/// Stochastic training-augmentation pipeline. Operations run in a fixed
/// order, each gated by its own probability: hflip, vflip, rot90, hist_eq,
/// blur, brightness, contrast, color, saturation, down_up_scale, jpeg.
struct AugmentationConfig {
    double hflip_prob = 0.5;
    double vflip_prob = 0.5;
    double rot90_prob = 0.5;
    double hist_eq_prob = 0.5;
    double blur_prob = 0.5;
    double brightness_prob = 0.5;
    double contrast_prob = 0.5;
    double color_prob = 0.5;
    double saturation_prob = 0.5;
    double down_up_prob = 0.5;
    double jpeg_prob = 0.7;

    int jpeg_quality_min = 30;
    int jpeg_quality_max = 100;
    int blur_radius_min = 1;
    int blur_radius_max = 3;
    double brightness_delta = 0.2;
    double contrast_delta = 0.2;
    double color_delta = 0.2;
    double saturation_delta = 0.2;
    double downscale_min = 0.25;
    double downscale_max = 0.5;

    std::uint64_t seed = 0;

    void validate() const;

    bool operator==(const AugmentationConfig&) const = default;
};

/// One gate decision. `params` holds whatever the operation sampled
/// (k, radius, delta, factor, quality); empty when not applied or parameterless.
struct AugmentationStep {
    std::string op;
    bool applied = false;
    std::map<std::string, double> params;

    bool operator==(const AugmentationStep&) const = default;
};

/// Ordered record of every gate decision of one pipeline run. Replaying the
/// applied steps on the original image reproduces the output bit-exactly.
using AugmentationLog = std::vector<AugmentationStep>;

struct AugmentationResult {
    ImageBuffer image;
    AugmentationLog log;
};

AugmentationResult apply_pipeline(const ImageBuffer& image, const AugmentationConfig& config,
                                  Rng& stream);
/// Convenience overload seeding the stream from config.seed.
AugmentationResult apply_pipeline(const ImageBuffer& image, const AugmentationConfig& config);

/// Re-run the applied operations of a log, with their recorded parameters.
ImageBuffer replay_log(const ImageBuffer& image, const AugmentationLog& log);

// Deterministic transforms underlying the pipeline.
ImageBuffer hflip(const ImageBuffer& image);
ImageBuffer vflip(const ImageBuffer& image);
ImageBuffer rot90(const ImageBuffer& image, int quarter_turns);
ImageBuffer hist_eq(const ImageBuffer& image);
ImageBuffer blur(const ImageBuffer& image, int radius);
ImageBuffer brightness(const ImageBuffer& image, double delta);
ImageBuffer contrast(const ImageBuffer& image, double delta);
ImageBuffer color_shift(const ImageBuffer& image, double delta);
ImageBuffer saturation(const ImageBuffer& image, double delta);
ImageBuffer down_up_scale(const ImageBuffer& image, double factor);
ImageBuffer jpeg_roundtrip(const ImageBuffer& image, int quality);

/// Bilinear resize with pixel-center sampling; identity when dims are unchanged.
ImageBuffer resize_bilinear(const ImageBuffer& image, int out_width, int out_height);

}  // namespace patchdet
