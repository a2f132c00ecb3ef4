#include "patchdet/augmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>

#include "patchdet/codec.hpp"
#include "patchdet/error.hpp"

namespace patchdet {

namespace {

std::uint8_t clamp8(double v) {
    if (v <= 0.0)
        return 0;
    if (v >= 255.0)
        return 255;
    return static_cast<std::uint8_t>(std::llround(v));
}

double gray_value(const std::uint8_t* px) {
    return 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
}

void check_prob(double p, const char* name) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidParameter,
            std::string(name) + " probability must be in [0, 1]");
}

}  // namespace

void AugmentationConfig::validate() const {
    check_prob(hflip_prob, "hflip");
    check_prob(vflip_prob, "vflip");
    check_prob(rot90_prob, "rot90");
    check_prob(hist_eq_prob, "hist_eq");
    check_prob(blur_prob, "blur");
    check_prob(brightness_prob, "brightness");
    check_prob(contrast_prob, "contrast");
    check_prob(color_prob, "color");
    check_prob(saturation_prob, "saturation");
    check_prob(down_up_prob, "down_up_scale");
    check_prob(jpeg_prob, "jpeg");
    require(jpeg_quality_min >= 1 && jpeg_quality_max <= 100 &&
                jpeg_quality_min <= jpeg_quality_max,
            ErrorCode::InvalidParameter, "JPEG quality range must satisfy 1 <= low <= high <= 100");
    require(blur_radius_min >= 1 && blur_radius_min <= blur_radius_max,
            ErrorCode::InvalidParameter, "blur radius range must satisfy 1 <= low <= high");
    require(brightness_delta >= 0.0 && brightness_delta <= 1.0 &&
                contrast_delta >= 0.0 && contrast_delta <= 1.0 &&
                color_delta >= 0.0 && color_delta <= 1.0 &&
                saturation_delta >= 0.0 && saturation_delta <= 1.0,
            ErrorCode::InvalidParameter, "jitter deltas must be in [0, 1]");
    require(downscale_min > 0.0 && downscale_min <= downscale_max && downscale_max <= 1.0,
            ErrorCode::InvalidParameter, "downscale range must satisfy 0 < low <= high <= 1");
}

ImageBuffer hflip(const ImageBuffer& image) {
    ImageBuffer out(image.width(), image.height());
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            for (int c = 0; c < 3; ++c)
                out.set(x, y, c, image.at(image.width() - 1 - x, y, c));
    return out;
}

ImageBuffer vflip(const ImageBuffer& image) {
    ImageBuffer out(image.width(), image.height());
    const std::size_t row_bytes = static_cast<std::size_t>(image.width()) * 3;
    for (int y = 0; y < image.height(); ++y)
        std::memcpy(out.data().data() + out.pixel_offset(0, image.height() - 1 - y),
                    image.data().data() + image.pixel_offset(0, y), row_bytes);
    return out;
}

ImageBuffer rot90(const ImageBuffer& image, int quarter_turns) {
    require(quarter_turns >= 0, ErrorCode::InvalidParameter, "rotation count must be >= 0");
    const int k = quarter_turns % 4;
    if (k == 0)
        return image;
    if (k == 2)
        return hflip(vflip(image));

    // k = 1: 90 degrees counterclockwise, dest(x, y) = src(W-1-y, x).
    // k = 3: clockwise, dest(x, y) = src(y, H-1-x).
    ImageBuffer out(image.height(), image.width());
    for (int y = 0; y < out.height(); ++y) {
        for (int x = 0; x < out.width(); ++x) {
            const int sx = (k == 1) ? image.width() - 1 - y : y;
            const int sy = (k == 1) ? x : image.height() - 1 - x;
            for (int c = 0; c < 3; ++c)
                out.set(x, y, c, image.at(sx, sy, c));
        }
    }
    return out;
}

ImageBuffer hist_eq(const ImageBuffer& image) {
    ImageBuffer out(image.width(), image.height());
    const std::size_t pixels =
        static_cast<std::size_t>(image.width()) * static_cast<std::size_t>(image.height());
    for (int c = 0; c < 3; ++c) {
        std::array<std::size_t, 256> hist{};
        for (std::size_t i = 0; i < pixels; ++i)
            ++hist[image.data()[i * 3 + c]];

        std::array<std::size_t, 256> cdf{};
        std::size_t running = 0;
        std::size_t cdf_min = 0;
        bool seen = false;
        for (int v = 0; v < 256; ++v) {
            running += hist[v];
            cdf[v] = running;
            if (!seen && hist[v] > 0) {
                cdf_min = running;
                seen = true;
            }
        }

        std::array<std::uint8_t, 256> lut{};
        if (pixels == cdf_min) {
            // Constant channel: equalization has nothing to spread.
            for (int v = 0; v < 256; ++v)
                lut[v] = static_cast<std::uint8_t>(v);
        } else {
            const double denom = static_cast<double>(pixels - cdf_min);
            for (int v = 0; v < 256; ++v) {
                const double num = cdf[v] >= cdf_min ? static_cast<double>(cdf[v] - cdf_min) : 0.0;
                lut[v] = clamp8(num * 255.0 / denom);
            }
        }
        for (std::size_t i = 0; i < pixels; ++i)
            out.data()[i * 3 + c] = lut[image.data()[i * 3 + c]];
    }
    return out;
}

ImageBuffer blur(const ImageBuffer& image, int radius) {
    require(radius >= 1 && radius <= 64, ErrorCode::InvalidParameter,
            "blur radius must be in [1, 64]");
    const int w = image.width();
    const int h = image.height();
    const int k = 2 * radius + 1;
    const std::uint32_t window = static_cast<std::uint32_t>(k) * static_cast<std::uint32_t>(k);

    // Separable box sums with clamp-to-edge borders; one division at the end
    // keeps the result exactly equal to the direct 2D window mean.
    std::vector<std::uint32_t> row_sums(static_cast<std::size_t>(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint32_t acc[3] = {0, 0, 0};
            for (int dx = -radius; dx <= radius; ++dx) {
                const int sx = std::clamp(x + dx, 0, w - 1);
                const std::size_t off = image.pixel_offset(sx, y);
                acc[0] += image.data()[off];
                acc[1] += image.data()[off + 1];
                acc[2] += image.data()[off + 2];
            }
            const std::size_t off = (static_cast<std::size_t>(y) * w + x) * 3;
            row_sums[off] = acc[0];
            row_sums[off + 1] = acc[1];
            row_sums[off + 2] = acc[2];
        }
    }

    ImageBuffer out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint32_t acc[3] = {0, 0, 0};
            for (int dy = -radius; dy <= radius; ++dy) {
                const int sy = std::clamp(y + dy, 0, h - 1);
                const std::size_t off = (static_cast<std::size_t>(sy) * w + x) * 3;
                acc[0] += row_sums[off];
                acc[1] += row_sums[off + 1];
                acc[2] += row_sums[off + 2];
            }
            for (int c = 0; c < 3; ++c)
                out.set(x, y, c,
                        static_cast<std::uint8_t>((acc[c] + window / 2) / window));
        }
    }
    return out;
}

ImageBuffer brightness(const ImageBuffer& image, double delta) {
    require(delta >= -1.0 && delta <= 1.0, ErrorCode::InvalidParameter,
            "brightness delta must be in [-1, 1]");
    ImageBuffer out(image.width(), image.height());
    const double shift = 255.0 * delta;
    for (std::size_t i = 0; i < image.data().size(); ++i)
        out.data()[i] = clamp8(image.data()[i] + shift);
    return out;
}

ImageBuffer contrast(const ImageBuffer& image, double delta) {
    require(delta >= -1.0 && delta <= 1.0, ErrorCode::InvalidParameter,
            "contrast delta must be in [-1, 1]");
    const std::size_t pixels =
        static_cast<std::size_t>(image.width()) * static_cast<std::size_t>(image.height());
    double mean = 0.0;
    for (std::size_t i = 0; i < pixels; ++i)
        mean += gray_value(image.data().data() + i * 3);
    mean /= static_cast<double>(pixels);

    const double gain = 1.0 + delta;
    ImageBuffer out(image.width(), image.height());
    for (std::size_t i = 0; i < image.data().size(); ++i)
        out.data()[i] = clamp8(mean + gain * (image.data()[i] - mean));
    return out;
}

ImageBuffer color_shift(const ImageBuffer& image, double delta) {
    require(delta >= -1.0 && delta <= 1.0, ErrorCode::InvalidParameter,
            "color delta must be in [-1, 1]");
    // Warm/cool cast: push red one way and blue the other.
    const double shift = 255.0 * delta;
    ImageBuffer out(image.width(), image.height());
    for (std::size_t i = 0; i < image.data().size(); i += 3) {
        out.data()[i] = clamp8(image.data()[i] + shift);
        out.data()[i + 1] = image.data()[i + 1];
        out.data()[i + 2] = clamp8(image.data()[i + 2] - shift);
    }
    return out;
}

ImageBuffer saturation(const ImageBuffer& image, double delta) {
    require(delta >= -1.0 && delta <= 1.0, ErrorCode::InvalidParameter,
            "saturation delta must be in [-1, 1]");
    const double gain = 1.0 + delta;
    ImageBuffer out(image.width(), image.height());
    for (std::size_t i = 0; i < image.data().size(); i += 3) {
        const double gray = gray_value(image.data().data() + i);
        for (int c = 0; c < 3; ++c)
            out.data()[i + c] = clamp8(gray + gain * (image.data()[i + c] - gray));
    }
    return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& image, int out_width, int out_height) {
    require(out_width >= 1 && out_height >= 1, ErrorCode::InvalidParameter,
            "resize target must be at least 1x1");
    if (out_width == image.width() && out_height == image.height())
        return image;

    ImageBuffer out(out_width, out_height);
    const double scale_x = static_cast<double>(image.width()) / out_width;
    const double scale_y = static_cast<double>(image.height()) / out_height;
    for (int y = 0; y < out_height; ++y) {
        const double sy = (y + 0.5) * scale_y - 0.5;
        const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, image.height() - 1);
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double fy = std::clamp(sy - y0, 0.0, 1.0);
        for (int x = 0; x < out_width; ++x) {
            const double sx = (x + 0.5) * scale_x - 0.5;
            const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, image.width() - 1);
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double fx = std::clamp(sx - x0, 0.0, 1.0);
            for (int c = 0; c < 3; ++c) {
                const double top = image.at(x0, y0, c) * (1.0 - fx) + image.at(x1, y0, c) * fx;
                const double bottom = image.at(x0, y1, c) * (1.0 - fx) + image.at(x1, y1, c) * fx;
                out.set(x, y, c, clamp8(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    return out;
}

ImageBuffer down_up_scale(const ImageBuffer& image, double factor) {
    require(factor > 0.0 && factor <= 1.0, ErrorCode::InvalidParameter,
            "downscale factor must be in (0, 1]");
    const int down_w = std::max(1, static_cast<int>(std::llround(image.width() * factor)));
    const int down_h = std::max(1, static_cast<int>(std::llround(image.height() * factor)));
    if (down_w == image.width() && down_h == image.height())
        return image;
    return resize_bilinear(resize_bilinear(image, down_w, down_h), image.width(), image.height());
}

ImageBuffer jpeg_roundtrip(const ImageBuffer& image, int quality) {
    return jpeg_decode(jpeg_encode(image, quality));
}

namespace {

ImageBuffer apply_step(const ImageBuffer& image, const AugmentationStep& step) {
    const auto param = [&step](const char* key) {
        const auto it = step.params.find(key);
        require(it != step.params.end(), ErrorCode::InvalidParameter,
                "augmentation step '" + step.op + "' is missing parameter '" + key + "'");
        return it->second;
    };

    if (step.op == "hflip")
        return hflip(image);
    if (step.op == "vflip")
        return vflip(image);
    if (step.op == "rot90")
        return rot90(image, static_cast<int>(param("k")));
    if (step.op == "hist_eq")
        return hist_eq(image);
    if (step.op == "blur")
        return blur(image, static_cast<int>(param("radius")));
    if (step.op == "brightness")
        return brightness(image, param("delta"));
    if (step.op == "contrast")
        return contrast(image, param("delta"));
    if (step.op == "color")
        return color_shift(image, param("delta"));
    if (step.op == "saturation")
        return saturation(image, param("delta"));
    if (step.op == "down_up_scale")
        return down_up_scale(image, param("factor"));
    if (step.op == "jpeg")
        return jpeg_roundtrip(image, static_cast<int>(param("quality")));
    raise(ErrorCode::InvalidParameter, "unknown augmentation op '" + step.op + "'");
}

}  // namespace

AugmentationResult apply_pipeline(const ImageBuffer& image, const AugmentationConfig& config,
                                  Rng& stream) {
    config.validate();
    require(image.width() >= 1 && image.height() >= 1, ErrorCode::InvalidParameter,
            "cannot augment an empty image");

    AugmentationResult result{image, {}};
    result.log.reserve(11);

    const auto gate = [&](const char* op, double prob) {
        AugmentationStep step{op, stream.bernoulli(prob), {}};
        return step;
    };
    const auto run = [&](AugmentationStep step) {
        if (step.applied)
            result.image = apply_step(result.image, step);
        result.log.push_back(std::move(step));
    };

    run(gate("hflip", config.hflip_prob));
    run(gate("vflip", config.vflip_prob));

    {
        auto step = gate("rot90", config.rot90_prob);
        if (step.applied)
            step.params["k"] = static_cast<double>(stream.uniform_int(1, 3));
        run(std::move(step));
    }

    run(gate("hist_eq", config.hist_eq_prob));

    {
        auto step = gate("blur", config.blur_prob);
        if (step.applied)
            step.params["radius"] = static_cast<double>(
                stream.uniform_int(config.blur_radius_min, config.blur_radius_max));
        run(std::move(step));
    }
    {
        auto step = gate("brightness", config.brightness_prob);
        if (step.applied)
            step.params["delta"] =
                stream.uniform_double(-config.brightness_delta, config.brightness_delta);
        run(std::move(step));
    }
    {
        auto step = gate("contrast", config.contrast_prob);
        if (step.applied)
            step.params["delta"] =
                stream.uniform_double(-config.contrast_delta, config.contrast_delta);
        run(std::move(step));
    }
    {
        auto step = gate("color", config.color_prob);
        if (step.applied)
            step.params["delta"] = stream.uniform_double(-config.color_delta, config.color_delta);
        run(std::move(step));
    }
    {
        auto step = gate("saturation", config.saturation_prob);
        if (step.applied)
            step.params["delta"] =
                stream.uniform_double(-config.saturation_delta, config.saturation_delta);
        run(std::move(step));
    }
    {
        auto step = gate("down_up_scale", config.down_up_prob);
        if (step.applied)
            step.params["factor"] =
                stream.uniform_double(config.downscale_min, config.downscale_max);
        run(std::move(step));
    }
    {
        auto step = gate("jpeg", config.jpeg_prob);
        if (step.applied)
            step.params["quality"] = static_cast<double>(
                stream.uniform_int(config.jpeg_quality_min, config.jpeg_quality_max));
        run(std::move(step));
    }

    return result;
}

AugmentationResult apply_pipeline(const ImageBuffer& image, const AugmentationConfig& config) {
    Rng stream(config.seed);
    return apply_pipeline(image, config, stream);
}

ImageBuffer replay_log(const ImageBuffer& image, const AugmentationLog& log) {
    ImageBuffer current = image;
    for (const auto& step : log)
        if (step.applied)
            current = apply_step(current, step);
    return current;
}

}  // namespace patchdet
