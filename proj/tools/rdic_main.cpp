// rdic: relevance-guided region-adaptive JPEG compression.
//
// Exit codes: 0 success, 1 usage error, 2 parse/format error, 3 pipeline error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rdic/image_io.hpp"
#include "rdic/pipeline.hpp"

namespace {

using namespace rdic;

SeedSpec parse_seed(const std::string& mode, const std::vector<double>& values) {
    SeedSpec seed;
    if (mode == "argmax") {
        seed.mode = SeedMode::argmax_onehot;
        if (!values.empty())
            throw Error("--seed-values only applies to --seed explicit");
    } else if (mode == "explicit") {
        seed.mode = SeedMode::explicit_vector;
        seed.values = values;
        if (seed.values.empty())
            throw Error("--seed explicit requires --seed-values");
    } else {
        throw Error("unknown seed mode '" + mode + "' (use argmax or explicit)");
    }
    return seed;
}

void write_text(const std::string& path, const std::string& text) {
    write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

struct LrpArgs {
    std::string model, image, out;
    double epsilon = 0.01;
    std::string seed_mode = "argmax";
    std::vector<double> seed_values;
};

struct MaskArgs {
    std::string relevance, out;
    int dilate_radius = 1;
    int dilate_iters = 2;
};

struct JpegArgs {
    std::string image, out;
    int quality = 100;
};

struct DecodeArgs {
    std::string in, out;
};

struct CompressArgs {
    std::string image, mask, out, report;
    int q_roi = 100;
    int q_bg = 50;
};

struct PipelineArgs {
    std::string model, image, out, mask_out, report;
    int q_roi = 100;
    int q_bg = 50;
    double epsilon = 0.01;
    int dilate_radius = 1;
    int dilate_iters = 2;
    std::string seed_mode = "argmax";
    std::vector<double> seed_values;
};

struct BenchArgs {
    std::string corpus, model, relevance_suffix, report, csv;
    int q_roi = 100;
    int q_bg = 50;
    double epsilon = 0.01;
    int dilate_radius = 1;
    int dilate_iters = 2;
};

int run_lrp(const LrpArgs& args) {
    const Network net = load_network(args.model);
    const Image img = read_pnm(args.image);
    const SeedSpec seed = parse_seed(args.seed_mode, args.seed_values);
    const RelevanceMap rel = relevance_of_image(net, img, Epsilon{args.epsilon}, seed);
    write_pfm(rel.summed(), args.out);
    return 0;
}

int run_mask(const MaskArgs& args) {
    RelevanceMap rel;
    rel.channels.push_back(read_pfm(args.relevance));
    const RoiMask mask = dilate(threshold_mask(rel), args.dilate_radius, args.dilate_iters);
    write_pnm(mask_to_image(mask), args.out);
    return 0;
}

int run_jpeg(const JpegArgs& args) {
    const Image img = read_pnm(args.image);
    write_file(args.out, encode(img, args.quality));
    return 0;
}

int run_decode(const DecodeArgs& args) {
    const Image img = decode(read_file(args.in));
    write_pnm(img, args.out);
    return 0;
}

int run_compress(const CompressArgs& args) {
    const Image img = read_pnm(args.image);
    const RoiMask mask = mask_from_image(read_pnm(args.mask));
    RdicConfig cfg;
    cfg.q_roi = args.q_roi;
    cfg.q_bg = args.q_bg;
    const RdicResult result = run_rdic_masked(img, mask, cfg);
    write_file(args.out, result.stream);
    if (!args.report.empty())
        write_text(args.report, report_to_json(result.report));
    return 0;
}

int run_pipeline(const PipelineArgs& args) {
    const Network net = load_network(args.model);
    const Image img = read_pnm(args.image);
    RdicConfig cfg;
    cfg.q_roi = args.q_roi;
    cfg.q_bg = args.q_bg;
    cfg.epsilon = Epsilon{args.epsilon};
    cfg.dilate_radius = args.dilate_radius;
    cfg.dilate_iterations = args.dilate_iters;
    cfg.seed = parse_seed(args.seed_mode, args.seed_values);

    const RdicResult result = run_rdic(img, net, cfg);
    write_file(args.out, result.stream);
    if (!args.mask_out.empty())
        write_pnm(mask_to_image(result.mask), args.mask_out);
    if (!args.report.empty())
        write_text(args.report, report_to_json(result.report));
    return 0;
}

int run_bench(const BenchArgs& args) {
    std::optional<Network> net;
    if (!args.model.empty())
        net = load_network(args.model);
    if (args.model.empty() && args.relevance_suffix.empty())
        throw Error("bench needs --model and/or --relevance-suffix as a relevance source");

    RdicConfig cfg;
    cfg.q_roi = args.q_roi;
    cfg.q_bg = args.q_bg;
    cfg.epsilon = Epsilon{args.epsilon};
    cfg.dilate_radius = args.dilate_radius;
    cfg.dilate_iterations = args.dilate_iters;

    const CorpusSummary summary =
        benchmark_corpus(args.corpus, net ? &*net : nullptr, args.relevance_suffix, cfg);

    const std::string json = summary_to_json(summary);
    if (!args.report.empty())
        write_text(args.report, json);
    else
        std::cout << json;
    if (!args.csv.empty())
        write_text(args.csv, summary_to_csv(summary));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"relevance-guided region-adaptive JPEG compression"};
    app.require_subcommand(1);

    LrpArgs lrp_args;
    auto* lrp_cmd = app.add_subcommand("lrp", "compute a pixel relevance map");
    lrp_cmd->add_option("--model", lrp_args.model, "model JSON file")->required();
    lrp_cmd->add_option("--image", lrp_args.image, "input PGM/PPM")->required();
    lrp_cmd->add_option("--epsilon", lrp_args.epsilon, "denominator stabilizer");
    lrp_cmd->add_option("--seed", lrp_args.seed_mode, "argmax or explicit");
    lrp_cmd->add_option("--seed-values", lrp_args.seed_values,
                        "output relevance for --seed explicit");
    lrp_cmd->add_option("--out", lrp_args.out, "output PFM relevance map")->required();

    MaskArgs mask_args;
    auto* mask_cmd = app.add_subcommand("mask", "threshold and dilate a relevance map");
    mask_cmd->add_option("--relevance", mask_args.relevance, "input PFM")->required();
    mask_cmd->add_option("--dilate-radius", mask_args.dilate_radius, "square element radius");
    mask_cmd->add_option("--dilate-iters", mask_args.dilate_iters, "dilation passes");
    mask_cmd->add_option("--out", mask_args.out, "output PGM mask {0,255}")->required();

    JpegArgs jpeg_args;
    auto* jpeg_cmd = app.add_subcommand("jpeg", "uniform-quality baseline encode");
    jpeg_cmd->add_option("--image", jpeg_args.image, "input PGM/PPM")->required();
    jpeg_cmd->add_option("--quality", jpeg_args.quality, "quality 1..100");
    jpeg_cmd->add_option("--out", jpeg_args.out, "output JPEG")->required();

    DecodeArgs decode_args;
    auto* decode_cmd = app.add_subcommand("decode", "decode a baseline JPEG to PGM/PPM");
    decode_cmd->add_option("--in", decode_args.in, "input JPEG")->required();
    decode_cmd->add_option("--out", decode_args.out, "output PGM/PPM")->required();

    CompressArgs compress_args;
    auto* compress_cmd =
        app.add_subcommand("compress", "region-adaptive encode with a given mask");
    compress_cmd->add_option("--image", compress_args.image, "input PGM/PPM")->required();
    compress_cmd->add_option("--mask", compress_args.mask, "RoI mask PGM {0,255}")->required();
    compress_cmd->add_option("--q-roi", compress_args.q_roi, "RoI quality");
    compress_cmd->add_option("--q-bg", compress_args.q_bg, "background quality");
    compress_cmd->add_option("--out", compress_args.out, "output JPEG")->required();
    compress_cmd->add_option("--report", compress_args.report, "report JSON path");

    PipelineArgs pipeline_args;
    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "full chain: forward, relevance, mask, encode");
    pipeline_cmd->add_option("--model", pipeline_args.model, "model JSON file")->required();
    pipeline_cmd->add_option("--image", pipeline_args.image, "input PGM/PPM")->required();
    pipeline_cmd->add_option("--q-roi", pipeline_args.q_roi, "RoI quality");
    pipeline_cmd->add_option("--q-bg", pipeline_args.q_bg, "background quality");
    pipeline_cmd->add_option("--epsilon", pipeline_args.epsilon, "denominator stabilizer");
    pipeline_cmd->add_option("--dilate-radius", pipeline_args.dilate_radius,
                             "square element radius");
    pipeline_cmd->add_option("--dilate-iters", pipeline_args.dilate_iters, "dilation passes");
    pipeline_cmd->add_option("--seed", pipeline_args.seed_mode, "argmax or explicit");
    pipeline_cmd->add_option("--seed-values", pipeline_args.seed_values,
                             "output relevance for --seed explicit");
    pipeline_cmd->add_option("--out", pipeline_args.out, "output JPEG")->required();
    pipeline_cmd->add_option("--mask-out", pipeline_args.mask_out, "mask PGM path");
    pipeline_cmd->add_option("--report", pipeline_args.report, "report JSON path");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "size/fidelity report over a corpus");
    bench_cmd->add_option("--corpus", bench_args.corpus, "directory of PGM/PPM images")
        ->required();
    bench_cmd->add_option("--model", bench_args.model, "model JSON file");
    bench_cmd->add_option("--relevance-suffix", bench_args.relevance_suffix,
                          "sibling relevance extension, e.g. .pfm");
    bench_cmd->add_option("--q-roi", bench_args.q_roi, "RoI quality");
    bench_cmd->add_option("--q-bg", bench_args.q_bg, "background quality");
    bench_cmd->add_option("--epsilon", bench_args.epsilon, "denominator stabilizer");
    bench_cmd->add_option("--dilate-radius", bench_args.dilate_radius, "square element radius");
    bench_cmd->add_option("--dilate-iters", bench_args.dilate_iters, "dilation passes");
    bench_cmd->add_option("--report", bench_args.report, "aggregate JSON path");
    bench_cmd->add_option("--csv", bench_args.csv, "per-image CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (lrp_cmd->parsed())
            return run_lrp(lrp_args);
        if (mask_cmd->parsed())
            return run_mask(mask_args);
        if (jpeg_cmd->parsed())
            return run_jpeg(jpeg_args);
        if (decode_cmd->parsed())
            return run_decode(decode_args);
        if (compress_cmd->parsed())
            return run_compress(compress_args);
        if (pipeline_cmd->parsed())
            return run_pipeline(pipeline_args);
        if (bench_cmd->parsed())
            return run_bench(bench_args);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
