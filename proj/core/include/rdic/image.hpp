#pragma once

#include <cstddef>
#include <cstdint>
#include <tuple>
#include <vector>

#include "rdic/error.hpp"

namespace rdic {

// 8-bit raster, row-major, samples interleaved per pixel.
// channels is 1 (grayscale) or 3 (RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int ch);

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t sample_count() const {
        return static_cast<std::size_t>(width) * height * channels;
    }

    bool operator==(const Image&) const = default;
};

// Single-channel plane of real values. Carrier for relevance maps and
// intermediate codec planes; values must stay finite.
struct FloatPlane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    FloatPlane() = default;
    FloatPlane(int w, int h);

    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return static_cast<std::size_t>(width) * height; }

    // Throws Error if any value is NaN or infinite.
    void require_finite(const char* context) const;
};

// Full-range JFIF color transform, 4:4:4. Output planes are unclamped reals.
std::tuple<FloatPlane, FloatPlane, FloatPlane> rgb_to_ycbcr(const Image& img);

// Inverse transform; samples rounded half away from zero and clamped to [0,255].
Image ycbcr_to_rgb(const FloatPlane& y, const FloatPlane& cb, const FloatPlane& cr);

} // namespace rdic
