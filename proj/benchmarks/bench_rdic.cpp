#include <benchmark/benchmark.h>

#include "rdic/jpeg.hpp"
#include "rdic/lrp.hpp"
#include "rdic/pipeline.hpp"
#include "rdic/roimask.hpp"

#include "../tests/support/corpus.hpp"

using namespace rdic;
using rdic::testing::Rng;

namespace {

std::array<double, 64> sample_block() {
    Rng rng(0xBE9C);
    std::array<double, 64> block{};
    for (auto& v : block)
        v = rng.uniform(-128.0, 127.0);
    return block;
}

Image bench_image(int side) {
    return testing::make_landscape(side, side, 3, 0xBE9C);
}

Network bench_net() {
    Rng rng(0xBE9C);
    Network net;
    net.input_shape = {1, 64, 64};

    Layer conv;
    conv.kind = LayerKind::conv2d;
    conv.conv_out_ch = 4;
    conv.conv_in_ch = 1;
    conv.conv_kh = 3;
    conv.conv_kw = 3;
    conv.conv_padding = 1;
    conv.weights.resize(36);
    conv.biases.assign(4, 0.01);
    for (auto& w : conv.weights)
        w = rng.uniform(-1.0, 1.0);
    net.layers.push_back(conv);

    Layer relu;
    relu.kind = LayerKind::relu;
    net.layers.push_back(relu);
    Layer pool;
    pool.kind = LayerKind::maxpool2x2;
    net.layers.push_back(pool);
    Layer flat;
    flat.kind = LayerKind::flatten;
    net.layers.push_back(flat);

    Layer head;
    head.kind = LayerKind::dense;
    head.dense_in = 4 * 32 * 32;
    head.dense_out = 4;
    head.weights.resize(static_cast<std::size_t>(head.dense_in) * 4);
    head.biases.assign(4, 0.0);
    for (auto& w : head.weights)
        w = rng.uniform(-0.2, 0.2);
    net.layers.push_back(head);

    net.validate();
    return net;
}

void BM_FdctBlock(benchmark::State& state) {
    const auto block = sample_block();
    for (auto _ : state) {
        auto coefs = fdct_block(block);
        benchmark::DoNotOptimize(coefs);
    }
}
BENCHMARK(BM_FdctBlock);

void BM_IdctBlock(benchmark::State& state) {
    const auto coefs = fdct_block(sample_block());
    for (auto _ : state) {
        auto spatial = idct_block(coefs);
        benchmark::DoNotOptimize(spatial);
    }
}
BENCHMARK(BM_IdctBlock);

void BM_QuantizeBlock(benchmark::State& state) {
    const auto coefs = fdct_block(sample_block());
    const QuantTablePair tables = quality_to_tables(75);
    for (auto _ : state) {
        auto q = quantize_block(coefs, tables.luma);
        benchmark::DoNotOptimize(q);
    }
}
BENCHMARK(BM_QuantizeBlock);

void BM_EncodeColor(benchmark::State& state) {
    const Image img = bench_image(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto stream = encode(img, 90);
        benchmark::DoNotOptimize(stream);
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                            static_cast<std::int64_t>(img.sample_count()));
}
BENCHMARK(BM_EncodeColor)->Arg(128)->Arg(512);

void BM_Decode(benchmark::State& state) {
    const JpegStream stream = encode(bench_image(static_cast<int>(state.range(0))), 90);
    for (auto _ : state) {
        Image img = decode(stream);
        benchmark::DoNotOptimize(img);
    }
}
BENCHMARK(BM_Decode)->Arg(128)->Arg(512);

void BM_EncodeRegionAdaptive(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const Image img = bench_image(side);
    const RoiMask mask = testing::make_blob_mask(side, side, 0.15, 0.3, 0xBE9C);
    const BlockQualityMap blocks = block_project(mask);
    for (auto _ : state) {
        auto stream = encode_region_adaptive(img, blocks, 100, 50);
        benchmark::DoNotOptimize(stream);
    }
}
BENCHMARK(BM_EncodeRegionAdaptive)->Arg(128)->Arg(512);

void BM_Dilate(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const RoiMask mask = testing::make_blob_mask(side, side, 0.1, 0.3, 0xBE9C);
    for (auto _ : state) {
        auto out = dilate(mask, 1, 2);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_Dilate)->Arg(128)->Arg(512);

void BM_ThresholdMask(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Rng rng(0xBE9C);
    FloatPlane plane(side, side);
    for (auto& v : plane.data)
        v = rng.uniform(-5.0, 5.0);
    for (auto _ : state) {
        auto mask = threshold_mask(plane);
        benchmark::DoNotOptimize(mask);
    }
}
BENCHMARK(BM_ThresholdMask)->Arg(128)->Arg(512);

void BM_Relevance(benchmark::State& state) {
    const Network net = bench_net();
    const Image img = testing::make_landscape(64, 64, 1, 0xBE9C);
    const Tensor input = image_to_tensor(img);
    for (auto _ : state) {
        auto map = relevance_of_image(net, input, Epsilon{0.01}, SeedSpec{});
        benchmark::DoNotOptimize(map);
    }
}
BENCHMARK(BM_Relevance);

void BM_FullPipeline(benchmark::State& state) {
    const Network net = bench_net();
    const Image img = testing::make_landscape(64, 64, 1, 0xBE9C);
    for (auto _ : state) {
        auto result = run_rdic(img, net, RdicConfig{});
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_FullPipeline);

} // namespace

BENCHMARK_MAIN();
