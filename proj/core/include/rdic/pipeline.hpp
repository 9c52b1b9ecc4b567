#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rdic/image.hpp"
#include "rdic/jpeg.hpp"
#include "rdic/lrp.hpp"
#include "rdic/metrics.hpp"
#include "rdic/nn.hpp"
#include "rdic/roimask.hpp"

namespace rdic {

struct RdicConfig {
    int q_roi = 100;
    int q_bg = 50;
    Epsilon epsilon{0.01};
    int dilate_radius = 1;
    int dilate_iterations = 2;
    SeedSpec seed;

    // Throws Error unless 1 <= q_bg <= q_roi <= 100 and the morphology
    // parameters are non-negative.
    void validate() const;
};

struct CompressionReport {
    std::int64_t input_bytes = 0;
    std::int64_t output_bytes = 0;
    double compression_ratio = 0.0; // output / input
    double mask_coverage_fraction = 0.0;
    double roi_block_fraction = 0.0;
    double psnr_total_db = 0.0;
    double psnr_roi_db = 0.0;
    double psnr_bg_db = 0.0;
    int q_roi = 0;
    int q_bg = 0;
    std::vector<std::pair<std::string, double>> timings; // stage -> milliseconds
};

struct RdicResult {
    JpegStream stream;
    RoiMask mask;
    CompressionReport report;
};

// Full chain: forward pass, relevance propagation, mask, dilation, block
// projection, region-adaptive encode. The report is computed by decoding the
// produced stream and comparing against the input. Errors are labeled with
// the stage that raised them.
RdicResult run_rdic(const Image& img, const Network& net, const RdicConfig& cfg);

// Same chain with an externally supplied relevance map (skips forward/LRP),
// the entry point for relevance computed out-of-band by a full-scale model.
RdicResult run_rdic_external(const Image& img, const RelevanceMap& relevance,
                             const RdicConfig& cfg);

// Tail of the chain for a ready-made pixel mask (no threshold, no dilation).
RdicResult run_rdic_masked(const Image& img, const RoiMask& mask, const RdicConfig& cfg);

struct CorpusEntry {
    std::string file;
    CompressionReport report;
};

struct CorpusSummary {
    std::vector<CorpusEntry> images;
    std::int64_t total_original_bytes = 0;
    std::int64_t total_uniform_qroi_bytes = 0;
    std::int64_t total_uniform_qbg_bytes = 0;
    std::int64_t total_rdic_bytes = 0;
    double ratio_uniform_qroi_over_original = 0.0;
    double ratio_rdic_over_uniform_qroi = 0.0;
    double ratio_rdic_over_original = 0.0;
};

using WarnFn = std::function<void(const std::string&)>;

// Runs the pipeline over every PGM/PPM in a directory, in name order. A
// sibling relevance file (image stem + relevance_suffix) takes precedence;
// otherwise the network is used. Unreadable or incompatible images are
// skipped through `warn`; an empty corpus is an error.
CorpusSummary benchmark_corpus(const std::string& dir, const Network* net,
                               const std::string& relevance_suffix,
                               const RdicConfig& cfg, const WarnFn& warn = {});

// JSON document per run; PSNR infinities serialize as the string "inf",
// timings as a stage -> milliseconds object.
std::string report_to_json(const CompressionReport& report, int indent = 2);
std::string summary_to_json(const CorpusSummary& summary, int indent = 2);
std::string summary_to_csv(const CorpusSummary& summary);

} // namespace rdic
