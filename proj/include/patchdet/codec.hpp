#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "patchdet/image.hpp"

namespace patchdet {

/// Baseline JFIF encode at the given quality (1..100). Throws CodecFailure.
std::vector<std::uint8_t> jpeg_encode(const ImageBuffer& image, int quality);

/// Decode to RGB regardless of the file's color space.
ImageBuffer jpeg_decode(const std::vector<std::uint8_t>& bytes);

void png_write_file(const std::string& path, const ImageBuffer& image);

struct DecodedImage {
    ImageBuffer image;
    /// Channel count as stored in the file (1 = grayscale, 4 = had alpha);
    /// anything other than 3 means the pixels were converted to RGB.
    int source_channels = 3;
};

/// Load a PNG or JPEG file, sniffing the format from magic bytes.
DecodedImage load_image(const std::string& path);

}  // namespace patchdet
