#pragma once

#include <cstdint>
#include <vector>

#include "patchdet/image.hpp"

namespace patchdet {

constexpr int kJpegGridStep = 8;
constexpr int kDefaultPatchSize = 128;

/// Square crop location within an image. `aligned` records that the region
/// was produced on the 8x8 JPEG block grid (and then x, y are multiples of 8).
struct PatchRegion {
    int x = 0;
    int y = 0;
    int size = 0;
    bool aligned = false;

    bool operator==(const PatchRegion&) const = default;
};

enum class SamplingMode { Random, GridAligned };

struct SamplingPolicy {
    SamplingMode mode = SamplingMode::Random;
    int count = 1;
    int size = kDefaultPatchSize;
    std::uint64_t seed = 0;
};

/// All grid-aligned top-left corners where a size x size patch fits, row-major
/// (y outer, x inner). Throws ImageTooSmall if the image cannot host a patch.
std::vector<PatchRegion> enumerate_aligned_positions(const ImageBuffer& image, int size);

/// Draw min(policy.count, available) distinct regions, uniformly without
/// replacement, deterministically under policy.seed. Random mode draws from
/// every valid offset; GridAligned mode draws from the 8x8 lattice. When the
/// request covers all available positions they are returned in row-major
/// order.
std::vector<PatchRegion> sample_patches(const ImageBuffer& image, const SamplingPolicy& policy);

/// Bit-exact copy of the region's pixels. Throws OutOfBounds.
ImageBuffer crop(const ImageBuffer& image, const PatchRegion& region);

}  // namespace patchdet
