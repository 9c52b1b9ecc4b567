#include "rdic/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>

#include <json.hpp>

#include "rdic/image_io.hpp"

namespace rdic {

namespace fs = std::filesystem;

void RdicConfig::validate() const {
    if (q_roi < 1 || q_roi > 100 || q_bg < 1 || q_bg > 100)
        throw Error("config: qualities must be in [1,100]");
    if (q_roi < q_bg)
        throw Error("config: q_roi (" + std::to_string(q_roi) + ") must be at least q_bg (" +
                    std::to_string(q_bg) + ")");
    if (dilate_radius < 0 || dilate_iterations < 0)
        throw Error("config: dilation radius and iterations must be non-negative");
}

namespace {

class StageClock {
public:
    explicit StageClock(CompressionReport& report) : report_(report) {}

    template <typename F>
    auto run(const char* stage, F&& fn) -> decltype(fn()) {
        const auto start = std::chrono::steady_clock::now();
        try {
            auto result = fn();
            record(stage, start);
            return result;
        } catch (const Error& e) {
            throw Error(std::string(stage) + ": " + e.what());
        }
    }

private:
    void record(const char* stage, std::chrono::steady_clock::time_point start) {
        const auto elapsed = std::chrono::steady_clock::now() - start;
        report_.timings.emplace_back(
            stage, std::chrono::duration<double, std::milli>(elapsed).count());
    }

    CompressionReport& report_;
};

// Shared tail: mask is final, encode and measure.
RdicResult finish_run(const Image& img, RoiMask mask, const RdicConfig& cfg,
                      CompressionReport report, StageClock& clock) {
    if (mask.width != img.width || mask.height != img.height)
        throw Error("mask: dimensions " + std::to_string(mask.width) + "x" +
                    std::to_string(mask.height) + " do not match the image " +
                    std::to_string(img.width) + "x" + std::to_string(img.height));

    const BlockQualityMap blocks = block_project(mask);

    JpegStream stream = clock.run("encode", [&] {
        return encode_region_adaptive(img, blocks, cfg.q_roi, cfg.q_bg);
    });

    const RegionMetrics metrics = clock.run("metrics", [&] {
        const Image decoded = decode(stream);
        return region_metrics(img, decoded, &mask);
    });

    report.input_bytes = static_cast<std::int64_t>(pnm_bytes(img).size());
    report.output_bytes = static_cast<std::int64_t>(stream.size());
    report.compression_ratio =
        static_cast<double>(report.output_bytes) / static_cast<double>(report.input_bytes);
    report.mask_coverage_fraction = coverage_fraction(mask);
    report.roi_block_fraction = roi_block_fraction(blocks);
    report.psnr_total_db = metrics.psnr_total_db;
    report.psnr_roi_db = metrics.psnr_roi_db;
    report.psnr_bg_db = metrics.psnr_bg_db;
    report.q_roi = cfg.q_roi;
    report.q_bg = cfg.q_bg;

    return RdicResult{std::move(stream), std::move(mask), std::move(report)};
}

RoiMask mask_from_relevance(const RelevanceMap& rel, const RdicConfig& cfg, StageClock& clock) {
    return clock.run("mask", [&] {
        return dilate(threshold_mask(rel), cfg.dilate_radius, cfg.dilate_iterations);
    });
}

} // namespace

RdicResult run_rdic(const Image& img, const Network& net, const RdicConfig& cfg) {
    cfg.validate();
    CompressionReport report;
    StageClock clock(report);

    const ForwardTrace trace = clock.run("forward", [&] {
        const Tensor input = image_to_tensor(img);
        if (input.dims != net.input_shape)
            throw Error("image is " + std::to_string(img.channels) + "x" +
                        std::to_string(img.height) + "x" + std::to_string(img.width) +
                        " but the network expects " + std::to_string(net.input_shape[0]) + "x" +
                        std::to_string(net.input_shape[1]) + "x" +
                        std::to_string(net.input_shape[2]) +
                        " (resampling is out of scope; supply relevance externally instead)");
        return forward(net, input);
    });

    const RelevanceMap rel = clock.run("lrp", [&] {
        return relevance_from_trace(net, trace, cfg.epsilon, cfg.seed);
    });

    RoiMask mask = mask_from_relevance(rel, cfg, clock);
    return finish_run(img, std::move(mask), cfg, std::move(report), clock);
}

RdicResult run_rdic_external(const Image& img, const RelevanceMap& relevance,
                             const RdicConfig& cfg) {
    cfg.validate();
    if (relevance.width() != img.width || relevance.height() != img.height)
        throw Error("relevance map is " + std::to_string(relevance.width()) + "x" +
                    std::to_string(relevance.height()) + " but the image is " +
                    std::to_string(img.width) + "x" + std::to_string(img.height));

    CompressionReport report;
    StageClock clock(report);
    RoiMask mask = mask_from_relevance(relevance, cfg, clock);
    return finish_run(img, std::move(mask), cfg, std::move(report), clock);
}

RdicResult run_rdic_masked(const Image& img, const RoiMask& mask, const RdicConfig& cfg) {
    cfg.validate();
    CompressionReport report;
    StageClock clock(report);
    return finish_run(img, mask, cfg, std::move(report), clock);
}

namespace {

bool has_pnm_extension(const fs::path& p) {
    const std::string ext = p.extension().string();
    return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

} // namespace

CorpusSummary benchmark_corpus(const std::string& dir, const Network* net,
                               const std::string& relevance_suffix, const RdicConfig& cfg,
                               const WarnFn& warn) {
    cfg.validate();
    const WarnFn report_warning =
        warn ? warn : [](const std::string& msg) { std::cerr << "warning: " << msg << "\n"; };

    if (!fs::is_directory(dir))
        throw Error("corpus: not a directory: " + dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && has_pnm_extension(entry.path()))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw Error("corpus: no PGM/PPM images in " + dir);

    CorpusSummary summary;
    for (const auto& file : files) {
        try {
            const Image img = read_pnm(file.string());

            RdicResult result = [&] {
                if (!relevance_suffix.empty()) {
                    fs::path sibling = file;
                    sibling.replace_extension(relevance_suffix);
                    if (fs::exists(sibling)) {
                        RelevanceMap rel;
                        rel.channels.push_back(read_pfm(sibling.string()));
                        return run_rdic_external(img, rel, cfg);
                    }
                }
                if (!net)
                    throw Error("no relevance source: no sibling relevance file and no model");
                return run_rdic(img, *net, cfg);
            }();

            summary.total_original_bytes += result.report.input_bytes;
            summary.total_rdic_bytes += result.report.output_bytes;
            summary.total_uniform_qroi_bytes +=
                static_cast<std::int64_t>(encode(img, cfg.q_roi).size());
            summary.total_uniform_qbg_bytes +=
                static_cast<std::int64_t>(encode(img, cfg.q_bg).size());
            summary.images.push_back(
                CorpusEntry{file.filename().string(), std::move(result.report)});
        } catch (const std::exception& e) {
            report_warning(file.string() + ": " + e.what() + " (skipped)");
        }
    }

    if (summary.images.empty())
        throw Error("corpus: no image in " + dir + " could be processed");

    const auto ratio = [](std::int64_t num, std::int64_t den) {
        return static_cast<double>(num) / static_cast<double>(den);
    };
    summary.ratio_uniform_qroi_over_original =
        ratio(summary.total_uniform_qroi_bytes, summary.total_original_bytes);
    summary.ratio_rdic_over_uniform_qroi =
        ratio(summary.total_rdic_bytes, summary.total_uniform_qroi_bytes);
    summary.ratio_rdic_over_original =
        ratio(summary.total_rdic_bytes, summary.total_original_bytes);
    return summary;
}

namespace {

using ordered_json = nlohmann::ordered_json;

// PSNR of an error-free region serializes as the string "inf".
ordered_json psnr_json(double v) {
    if (std::isinf(v))
        return "inf";
    return v;
}

ordered_json report_json(const CompressionReport& r) {
    ordered_json j;
    j["input_bytes"] = r.input_bytes;
    j["output_bytes"] = r.output_bytes;
    j["compression_ratio"] = r.compression_ratio;
    j["mask_coverage_fraction"] = r.mask_coverage_fraction;
    j["roi_block_fraction"] = r.roi_block_fraction;
    j["psnr_total_db"] = psnr_json(r.psnr_total_db);
    j["psnr_roi_db"] = psnr_json(r.psnr_roi_db);
    j["psnr_bg_db"] = psnr_json(r.psnr_bg_db);
    j["q_roi"] = r.q_roi;
    j["q_bg"] = r.q_bg;
    ordered_json timings = ordered_json::object();
    for (const auto& [stage, ms] : r.timings)
        timings[stage] = ms;
    j["timings"] = std::move(timings);
    return j;
}

} // namespace

std::string report_to_json(const CompressionReport& report, int indent) {
    return report_json(report).dump(indent) + "\n";
}

std::string summary_to_json(const CorpusSummary& summary, int indent) {
    ordered_json j;
    ordered_json images = ordered_json::array();
    for (const auto& entry : summary.images) {
        ordered_json e;
        e["file"] = entry.file;
        e["report"] = report_json(entry.report);
        images.push_back(std::move(e));
    }
    j["images"] = std::move(images);
    j["total_original_bytes"] = summary.total_original_bytes;
    j["total_uniform_qroi_bytes"] = summary.total_uniform_qroi_bytes;
    j["total_uniform_qbg_bytes"] = summary.total_uniform_qbg_bytes;
    j["total_rdic_bytes"] = summary.total_rdic_bytes;
    j["ratio_uniform_qroi_over_original"] = summary.ratio_uniform_qroi_over_original;
    j["ratio_rdic_over_uniform_qroi"] = summary.ratio_rdic_over_uniform_qroi;
    j["ratio_rdic_over_original"] = summary.ratio_rdic_over_original;
    return j.dump(indent) + "\n";
}

std::string summary_to_csv(const CorpusSummary& summary) {
    std::string csv = "file,input_bytes,output_bytes,compression_ratio,"
                      "mask_coverage_fraction,roi_block_fraction,"
                      "psnr_total_db,psnr_roi_db,psnr_bg_db,q_roi,q_bg\n";
    const auto num = [](double v) {
        if (std::isinf(v))
            return std::string("inf");
        std::string s = std::to_string(v);
        return s;
    };
    for (const auto& entry : summary.images) {
        const CompressionReport& r = entry.report;
        csv += entry.file + "," + std::to_string(r.input_bytes) + "," +
               std::to_string(r.output_bytes) + "," + num(r.compression_ratio) + "," +
               num(r.mask_coverage_fraction) + "," + num(r.roi_block_fraction) + "," +
               num(r.psnr_total_db) + "," + num(r.psnr_roi_db) + "," + num(r.psnr_bg_db) + "," +
               std::to_string(r.q_roi) + "," + std::to_string(r.q_bg) + "\n";
    }
    return csv;
}

} // namespace rdic
