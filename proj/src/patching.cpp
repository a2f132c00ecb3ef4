#include "patchdet/patching.hpp"

#include <algorithm>
#include <cstring>
#include <string>
#include <unordered_set>

#include "patchdet/error.hpp"
#include "patchdet/rng.hpp"

namespace patchdet {

namespace {

void check_fits(const ImageBuffer& image, int size) {
    require(size >= 1, ErrorCode::InvalidParameter, "patch size must be >= 1");
    if (image.width() < size || image.height() < size)
        raise(ErrorCode::ImageTooSmall,
              "image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                  " cannot host a " + std::to_string(size) + "x" + std::to_string(size) + " patch");
}

/// Draw `count` distinct indices from [0, total), uniformly without
/// replacement, in draw order. Partial Fisher-Yates when the population is
/// small relative to the request, rejection sampling otherwise; both are
/// fully determined by the stream.
std::vector<std::uint64_t> draw_distinct(Rng& rng, std::uint64_t total, std::uint64_t count) {
    std::vector<std::uint64_t> picks;
    picks.reserve(count);
    if (total <= 4 * count || total <= (1u << 16)) {
        std::vector<std::uint64_t> pool(total);
        for (std::uint64_t i = 0; i < total; ++i)
            pool[i] = i;
        for (std::uint64_t i = 0; i < count; ++i) {
            const std::uint64_t j = rng.uniform_u64(i, total - 1);
            std::swap(pool[i], pool[j]);
            picks.push_back(pool[i]);
        }
    } else {
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(count * 2);
        while (picks.size() < count) {
            const std::uint64_t candidate = rng.uniform_u64(0, total - 1);
            if (seen.insert(candidate).second)
                picks.push_back(candidate);
        }
    }
    return picks;
}

}  // namespace

std::vector<PatchRegion> enumerate_aligned_positions(const ImageBuffer& image, int size) {
    check_fits(image, size);
    std::vector<PatchRegion> regions;
    for (int y = 0; y + size <= image.height(); y += kJpegGridStep)
        for (int x = 0; x + size <= image.width(); x += kJpegGridStep)
            regions.push_back(PatchRegion{x, y, size, true});
    return regions;
}

std::vector<PatchRegion> sample_patches(const ImageBuffer& image, const SamplingPolicy& policy) {
    require(policy.count >= 1, ErrorCode::InvalidParameter, "patch count must be >= 1");
    check_fits(image, policy.size);
    Rng rng(policy.seed);

    if (policy.mode == SamplingMode::GridAligned) {
        std::vector<PatchRegion> all = enumerate_aligned_positions(image, policy.size);
        if (all.size() <= static_cast<std::size_t>(policy.count))
            return all;
        const auto picks = draw_distinct(rng, all.size(), static_cast<std::uint64_t>(policy.count));
        std::vector<PatchRegion> regions;
        regions.reserve(picks.size());
        for (const auto index : picks)
            regions.push_back(all[index]);
        return regions;
    }

    const std::uint64_t span_x = static_cast<std::uint64_t>(image.width() - policy.size + 1);
    const std::uint64_t span_y = static_cast<std::uint64_t>(image.height() - policy.size + 1);
    const std::uint64_t total = span_x * span_y;
    const std::uint64_t wanted = std::min<std::uint64_t>(total, static_cast<std::uint64_t>(policy.count));

    std::vector<PatchRegion> regions;
    regions.reserve(wanted);
    if (wanted == total) {
        for (std::uint64_t y = 0; y < span_y; ++y)
            for (std::uint64_t x = 0; x < span_x; ++x)
                regions.push_back(PatchRegion{static_cast<int>(x), static_cast<int>(y),
                                              policy.size, false});
        return regions;
    }
    const auto picks = draw_distinct(rng, total, wanted);
    for (const auto index : picks)
        regions.push_back(PatchRegion{static_cast<int>(index % span_x),
                                      static_cast<int>(index / span_x), policy.size, false});
    return regions;
}

ImageBuffer crop(const ImageBuffer& image, const PatchRegion& region) {
    require(region.size >= 1, ErrorCode::InvalidParameter, "region size must be >= 1");
    if (region.x < 0 || region.y < 0 || region.x + region.size > image.width() ||
        region.y + region.size > image.height())
        raise(ErrorCode::OutOfBounds,
              "region (" + std::to_string(region.x) + "," + std::to_string(region.y) + ","
                  + std::to_string(region.size) + ") exceeds image "
                  + std::to_string(image.width()) + "x" + std::to_string(image.height()));

    ImageBuffer patch(region.size, region.size);
    const std::size_t row_bytes = static_cast<std::size_t>(region.size) * 3;
    for (int row = 0; row < region.size; ++row) {
        const std::size_t src = image.pixel_offset(region.x, region.y + row);
        const std::size_t dst = patch.pixel_offset(0, row);
        std::memcpy(patch.data().data() + dst, image.data().data() + src, row_bytes);
    }
    return patch;
}

}  // namespace patchdet
