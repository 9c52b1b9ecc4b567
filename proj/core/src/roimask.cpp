#include "rdic/roimask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rdic {

RoiMask::RoiMask(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw Error("mask: dimensions must be at least 1x1, got " + std::to_string(w) + "x" +
                    std::to_string(h));
    bits.assign(static_cast<std::size_t>(w) * h, 0);
}

RoiMask threshold_mask(const FloatPlane& relevance) {
    relevance.require_finite("threshold_mask");
    double sum_abs = 0.0;
    for (double v : relevance.data)
        sum_abs += std::abs(v);
    const double mean_abs = sum_abs / static_cast<double>(relevance.size());

    RoiMask mask(relevance.width, relevance.height);
    for (std::size_t i = 0; i < relevance.data.size(); ++i)
        mask.bits[i] = std::abs(relevance.data[i]) >= mean_abs ? 1 : 0;
    return mask;
}

RoiMask threshold_mask(const RelevanceMap& relevance) {
    return threshold_mask(relevance.summed());
}

namespace {

// One dilation by a square element, as two 1-d window-max passes over
// prefix counts.
RoiMask dilate_once(const RoiMask& mask, int radius) {
    const int w = mask.width, h = mask.height;
    RoiMask horiz(w, h);
    std::vector<int> prefix(static_cast<std::size_t>(w) + 1);
    for (int y = 0; y < h; ++y) {
        prefix[0] = 0;
        for (int x = 0; x < w; ++x)
            prefix[x + 1] = prefix[x] + mask.at(x, y);
        for (int x = 0; x < w; ++x) {
            const int lo = std::max(0, x - radius);
            const int hi = std::min(w - 1, x + radius);
            horiz.at(x, y) = prefix[hi + 1] - prefix[lo] > 0 ? 1 : 0;
        }
    }
    RoiMask out(w, h);
    std::vector<int> col_prefix(static_cast<std::size_t>(h) + 1);
    for (int x = 0; x < w; ++x) {
        col_prefix[0] = 0;
        for (int y = 0; y < h; ++y)
            col_prefix[y + 1] = col_prefix[y] + horiz.at(x, y);
        for (int y = 0; y < h; ++y) {
            const int lo = std::max(0, y - radius);
            const int hi = std::min(h - 1, y + radius);
            out.at(x, y) = col_prefix[hi + 1] - col_prefix[lo] > 0 ? 1 : 0;
        }
    }
    return out;
}

} // namespace

RoiMask dilate(const RoiMask& mask, int radius, int iterations) {
    if (radius < 0)
        throw Error("dilate: radius must be non-negative");
    if (iterations < 0)
        throw Error("dilate: iteration count must be non-negative");
    if (radius == 0 || iterations == 0)
        return mask;
    RoiMask cur = mask;
    for (int i = 0; i < iterations; ++i)
        cur = dilate_once(cur, radius);
    return cur;
}

BlockQualityMap block_project(const RoiMask& mask) {
    BlockQualityMap blocks;
    blocks.blocks_w = (mask.width + 7) / 8;
    blocks.blocks_h = (mask.height + 7) / 8;
    blocks.roi.assign(static_cast<std::size_t>(blocks.blocks_w) * blocks.blocks_h, 0);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.at(x, y))
                blocks.roi[static_cast<std::size_t>(y / 8) * blocks.blocks_w + x / 8] = 1;
    return blocks;
}

double coverage_fraction(const RoiMask& mask) {
    std::size_t set = 0;
    for (std::uint8_t b : mask.bits)
        set += b;
    return static_cast<double>(set) / static_cast<double>(mask.bits.size());
}

double roi_block_fraction(const BlockQualityMap& blocks) {
    std::size_t set = 0;
    for (std::uint8_t b : blocks.roi)
        set += b;
    return static_cast<double>(set) / static_cast<double>(blocks.roi.size());
}

Image mask_to_image(const RoiMask& mask) {
    Image img(mask.width, mask.height, 1);
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        img.data[i] = mask.bits[i] ? 255 : 0;
    return img;
}

RoiMask mask_from_image(const Image& img) {
    if (img.channels != 1)
        throw ParseError("mask: expected a grayscale raster, got " +
                         std::to_string(img.channels) + " channels");
    RoiMask mask(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        if (img.data[i] != 0 && img.data[i] != 255)
            throw ParseError("mask: sample " + std::to_string(i) + " is " +
                             std::to_string(img.data[i]) + ", expected 0 or 255");
        mask.bits[i] = img.data[i] ? 1 : 0;
    }
    return mask;
}

} // namespace rdic
