#include "rdic/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace rdic {

double psnr_from_mse(double mse) {
    if (mse <= 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

RegionMetrics region_metrics(const Image& original, const Image& decoded, const RoiMask* mask) {
    if (original.width != decoded.width || original.height != decoded.height)
        throw Error("region_metrics: image dimensions differ");
    if (original.channels != decoded.channels)
        throw Error("region_metrics: channel counts differ");
    if (mask && (mask->width != original.width || mask->height != original.height))
        throw Error("region_metrics: mask dimensions do not match the images");

    std::uint64_t sse_total = 0;
    std::uint64_t sse_roi = 0;
    std::uint64_t n_roi = 0;
    std::uint64_t n_bg = 0;

    const int ch = original.channels;
    for (int y = 0; y < original.height; ++y) {
        for (int x = 0; x < original.width; ++x) {
            std::uint64_t sse = 0;
            for (int c = 0; c < ch; ++c) {
                const int d = static_cast<int>(original.at(x, y, c)) -
                              static_cast<int>(decoded.at(x, y, c));
                sse += static_cast<std::uint64_t>(d) * d;
            }
            sse_total += sse;
            if (mask) {
                if (mask->at(x, y)) {
                    sse_roi += sse;
                    n_roi += ch;
                } else {
                    n_bg += ch;
                }
            }
        }
    }

    RegionMetrics m;
    m.n_total = original.sample_count();
    m.n_roi = n_roi;
    m.n_bg = n_bg;
    m.mse_total = static_cast<double>(sse_total) / static_cast<double>(m.n_total);
    m.mse_roi = n_roi ? static_cast<double>(sse_roi) / static_cast<double>(n_roi) : 0.0;
    m.mse_bg = n_bg ? static_cast<double>(sse_total - sse_roi) / static_cast<double>(n_bg) : 0.0;
    m.psnr_total_db = psnr_from_mse(m.mse_total);
    m.psnr_roi_db = psnr_from_mse(m.mse_roi);
    m.psnr_bg_db = psnr_from_mse(m.mse_bg);
    return m;
}

} // namespace rdic
