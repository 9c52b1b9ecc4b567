#include "rdic/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rdic {

Image::Image(int w, int h, int ch) : width(w), height(h), channels(ch) {
    if (w < 1 || h < 1)
        throw Error("image: dimensions must be at least 1x1, got " + std::to_string(w) + "x" +
                    std::to_string(h));
    if (ch != 1 && ch != 3)
        throw Error("image: channel count must be 1 or 3, got " + std::to_string(ch));
    data.assign(sample_count(), 0);
}

FloatPlane::FloatPlane(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw Error("plane: dimensions must be at least 1x1, got " + std::to_string(w) + "x" +
                    std::to_string(h));
    data.assign(size(), 0.0);
}

void FloatPlane::require_finite(const char* context) const {
    for (double v : data)
        if (!std::isfinite(v))
            throw Error(std::string(context) + ": plane contains a non-finite value");
}

std::tuple<FloatPlane, FloatPlane, FloatPlane> rgb_to_ycbcr(const Image& img) {
    if (img.channels != 3)
        throw Error("rgb_to_ycbcr: expected 3 channels, got " + std::to_string(img.channels));

    FloatPlane y(img.width, img.height);
    FloatPlane cb(img.width, img.height);
    FloatPlane cr(img.width, img.height);

    const std::uint8_t* p = img.data.data();
    for (std::size_t i = 0, n = static_cast<std::size_t>(img.width) * img.height; i < n; ++i) {
        const double r = p[3 * i];
        const double g = p[3 * i + 1];
        const double b = p[3 * i + 2];
        y.data[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        cb.data[i] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
        cr.data[i] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    }
    return {std::move(y), std::move(cb), std::move(cr)};
}

namespace {

std::uint8_t clamp_u8(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(std::clamp(r, 0L, 255L));
}

} // namespace

Image ycbcr_to_rgb(const FloatPlane& y, const FloatPlane& cb, const FloatPlane& cr) {
    if (y.width != cb.width || y.width != cr.width || y.height != cb.height ||
        y.height != cr.height)
        throw Error("ycbcr_to_rgb: plane dimensions differ");

    Image img(y.width, y.height, 3);
    for (std::size_t i = 0, n = y.size(); i < n; ++i) {
        const double yy = y.data[i];
        const double cbv = cb.data[i] - 128.0;
        const double crv = cr.data[i] - 128.0;
        // R and B invert the chroma rows directly; G is solved from the Y
        // row so the matrix stays an exact inverse in double precision.
        const double r = yy + 1.402 * crv;
        const double b = yy + 1.772 * cbv;
        const double g = (yy - 0.299 * r - 0.114 * b) / 0.587;
        img.data[3 * i] = clamp_u8(r);
        img.data[3 * i + 1] = clamp_u8(g);
        img.data[3 * i + 2] = clamp_u8(b);
    }
    return img;
}

} // namespace rdic
