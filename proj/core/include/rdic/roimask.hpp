#pragma once

#include <cstdint>
#include <vector>

#include "rdic/image.hpp"
#include "rdic/lrp.hpp"

namespace rdic {

// Per-pixel binary mask, row-major, bits in {0,1}.
struct RoiMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    RoiMask() = default;
    RoiMask(int w, int h);

    std::uint8_t& at(int x, int y) { return bits[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const RoiMask&) const = default;
};

// Pixel mask projected onto the 8x8 block grid; flags are 1 for RoI blocks.
struct BlockQualityMap {
    int blocks_w = 0;
    int blocks_h = 0;
    std::vector<std::uint8_t> roi;

    bool is_roi(int bx, int by) const {
        return roi[static_cast<std::size_t>(by) * blocks_w + bx] != 0;
    }
};

// Marks pixels whose absolute relevance is at least the mean absolute
// relevance over the whole map. Multi-channel maps are summed over channels
// first. The result always has at least one set bit.
RoiMask threshold_mask(const FloatPlane& relevance);
RoiMask threshold_mask(const RelevanceMap& relevance);

// Binary dilation with a square structuring element of side 2*radius+1,
// applied `iterations` times. radius 0 or iterations 0 is the identity.
RoiMask dilate(const RoiMask& mask, int radius, int iterations);

// A block is RoI iff any of its pixels (partial edge blocks included) is set.
BlockQualityMap block_project(const RoiMask& mask);

double coverage_fraction(const RoiMask& mask);
double roi_block_fraction(const BlockQualityMap& blocks);

// Mask file form: grayscale raster with samples in {0,255}.
Image mask_to_image(const RoiMask& mask);
RoiMask mask_from_image(const Image& img);

} // namespace rdic
