#pragma once

#include <cstdint>

#include "rdic/image.hpp"
#include "rdic/roimask.hpp"

namespace rdic {

// Region-wise fidelity of a decoded image against its original. MSE is in
// 8-bit sample units squared; PSNR is +infinity exactly when MSE is zero
// (serialized as "inf" in reports). Empty regions report zero samples and
// zero MSE.
struct RegionMetrics {
    double mse_total = 0.0;
    double mse_roi = 0.0;
    double mse_bg = 0.0;
    double psnr_total_db = 0.0;
    double psnr_roi_db = 0.0;
    double psnr_bg_db = 0.0;
    std::uint64_t n_total = 0;
    std::uint64_t n_roi = 0;
    std::uint64_t n_bg = 0;
};

// 10*log10(255^2 / mse); +infinity when mse == 0.
double psnr_from_mse(double mse);

// RoI region = mask 1-pixels, BG = mask 0-pixels; without a mask only the
// total is populated and both regions are empty. Counts are in samples
// (pixels x channels).
RegionMetrics region_metrics(const Image& original, const Image& decoded,
                             const RoiMask* mask = nullptr);

} // namespace rdic
