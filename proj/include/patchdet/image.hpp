#pragma once

#include <cstdint>
#include <vector>

namespace patchdet {

/// 8-bit RGB image, row-major, interleaved. The only pixel container the
/// library works with; file decoding converts everything to this layout.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height);
    ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    static constexpr int channels() noexcept { return 3; }

    std::size_t size_bytes() const noexcept { return data_.size(); }
    const std::vector<std::uint8_t>& data() const noexcept { return data_; }
    std::vector<std::uint8_t>& data() noexcept { return data_; }

    std::uint8_t at(int x, int y, int channel) const {
        return data_[pixel_offset(x, y) + static_cast<std::size_t>(channel)];
    }
    void set(int x, int y, int channel, std::uint8_t value) {
        data_[pixel_offset(x, y) + static_cast<std::size_t>(channel)] = value;
    }

    std::size_t pixel_offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) * 3;
    }

    bool operator==(const ImageBuffer& other) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Solid-color image, handy for tests and degenerate cases.
ImageBuffer make_constant_image(int width, int height,
                                std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Checkerboard with the given cell period; used by planted-signal scorers.
ImageBuffer make_checker_image(int width, int height, int period,
                               std::uint8_t dark = 0, std::uint8_t light = 255);

/// Deterministic photograph-like test content: smooth gradients, a sinusoidal
/// texture band and hashed per-pixel noise. Gives JPEG something realistic to
/// chew on without shipping binary fixtures.
ImageBuffer make_textured_image(int width, int height, std::uint64_t seed);

/// Rec.601 luma of one pixel, normalized to [0, 1].
double pixel_luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

/// Mean of the normalized luma over the whole image.
double mean_luma(const ImageBuffer& image);

/// Mean squared error over all samples of two same-sized images.
double mean_squared_error(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace patchdet
