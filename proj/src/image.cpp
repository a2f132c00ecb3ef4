#include "patchdet/image.hpp"

#include <algorithm>
#include <cmath>

#include "patchdet/error.hpp"
#include "patchdet/rng.hpp"

namespace patchdet {

ImageBuffer::ImageBuffer(int width, int height)
    : width_(width), height_(height) {
    require(width >= 1 && height >= 1, ErrorCode::InvalidParameter,
            "image dimensions must be at least 1x1");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3, 0);
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require(width >= 1 && height >= 1, ErrorCode::InvalidParameter,
            "image dimensions must be at least 1x1");
    require(data_.size() == static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3,
            ErrorCode::InvalidParameter,
            "pixel data length must equal width * height * 3");
}

ImageBuffer make_constant_image(int width, int height,
                                std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    ImageBuffer image(width, height);
    auto& data = image.data();
    for (std::size_t i = 0; i < data.size(); i += 3) {
        data[i] = r;
        data[i + 1] = g;
        data[i + 2] = b;
    }
    return image;
}

ImageBuffer make_checker_image(int width, int height, int period,
                               std::uint8_t dark, std::uint8_t light) {
    require(period >= 1, ErrorCode::InvalidParameter, "checker period must be >= 1");
    ImageBuffer image(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const bool on = ((x / period) + (y / period)) % 2 == 0;
            const std::uint8_t v = on ? light : dark;
            image.set(x, y, 0, v);
            image.set(x, y, 1, v);
            image.set(x, y, 2, v);
        }
    }
    return image;
}

ImageBuffer make_textured_image(int width, int height, std::uint64_t seed) {
    ImageBuffer image(width, height);
    Rng noise(seed);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double fx = static_cast<double>(x) / std::max(1, width - 1);
            const double fy = static_cast<double>(y) / std::max(1, height - 1);
            const double texture = 24.0 * std::sin(fx * 41.0) * std::cos(fy * 29.0);
            const double ramp_r = 60.0 + 140.0 * fx;
            const double ramp_g = 80.0 + 110.0 * fy;
            const double ramp_b = 90.0 + 90.0 * (1.0 - fx) * fy;
            const double jitter = noise.uniform_double(-12.0, 12.0);
            auto clamp8 = [](double v) {
                return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : std::llround(v)));
            };
            image.set(x, y, 0, clamp8(ramp_r + texture + jitter));
            image.set(x, y, 1, clamp8(ramp_g + texture + jitter));
            image.set(x, y, 2, clamp8(ramp_b - texture + jitter));
        }
    }
    return image;
}

double pixel_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

double mean_luma(const ImageBuffer& image) {
    const auto& data = image.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); i += 3)
        sum += pixel_luma(data[i], data[i + 1], data[i + 2]);
    return sum / (static_cast<double>(image.width()) * static_cast<double>(image.height()));
}

double mean_squared_error(const ImageBuffer& a, const ImageBuffer& b) {
    require(a.width() == b.width() && a.height() == b.height(), ErrorCode::InvalidParameter,
            "MSE requires equal dimensions");
    const auto& da = a.data();
    const auto& db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double diff = static_cast<double>(da[i]) - static_cast<double>(db[i]);
        sum += diff * diff;
    }
    return sum / static_cast<double>(da.size());
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::CodecFailure: return "CodecFailure";
        case ErrorCode::ModelLoadError: return "ModelLoadError";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::ScoringError: return "ScoringError";
        case ErrorCode::EmptyScores: return "EmptyScores";
        case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::UnknownRecipe: return "UnknownRecipe";
        case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
        case ErrorCode::SpecError: return "SpecError";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace patchdet
