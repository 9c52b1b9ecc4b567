#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rdic/lrp.hpp"

#include "support/corpus.hpp"
#include "support/oracles.hpp"

using namespace rdic;
using rdic::testing::Rng;

namespace {

Layer dense_layer(int out, int in, std::vector<double> weights, std::vector<double> biases) {
    Layer layer;
    layer.kind = LayerKind::dense;
    layer.dense_out = out;
    layer.dense_in = in;
    layer.weights = std::move(weights);
    layer.biases = std::move(biases);
    return layer;
}

Layer random_conv(int out_ch, int in_ch, int kh, int kw, int padding, Rng& rng, bool positive) {
    Layer layer;
    layer.kind = LayerKind::conv2d;
    layer.conv_out_ch = out_ch;
    layer.conv_in_ch = in_ch;
    layer.conv_kh = kh;
    layer.conv_kw = kw;
    layer.conv_padding = padding;
    layer.weights.resize(static_cast<std::size_t>(out_ch) * in_ch * kh * kw);
    layer.biases.assign(out_ch, 0.0);
    for (auto& w : layer.weights)
        w = positive ? rng.uniform(0.1, 1.0) : rng.uniform(-1.0, 1.0);
    return layer;
}

Tensor vec(std::vector<double> v) {
    return Tensor::from_vector(std::move(v));
}

} // namespace

TEST_CASE("seed: argmax keeps the winning logit value") {
    ForwardTrace trace;
    trace.output = vec({1.0, 4.0, 2.0});
    const auto seeded = seed_relevance(trace, SeedSpec{});
    CHECK(seeded == std::vector<double>{0.0, 4.0, 0.0});
}

TEST_CASE("seed: single logit is its own argmax") {
    ForwardTrace trace;
    trace.output = vec({3.0});
    CHECK(seed_relevance(trace, SeedSpec{}) == std::vector<double>{3.0});
}

TEST_CASE("seed: explicit vector passes through, length is checked") {
    ForwardTrace trace;
    trace.output = vec({0.5, -0.5});
    SeedSpec seed{SeedMode::explicit_vector, {0.0, 1.0}};
    CHECK(seed_relevance(trace, seed) == std::vector<double>{0.0, 1.0});
    seed.values = {1.0};
    CHECK_THROWS_AS(seed_relevance(trace, seed), Error);
}

TEST_CASE("dense: worked single-layer example") {
    // a = [1,2], W = [[2,1]], seed 4: contributions z = (2,2), pre-activation 4.
    const Layer layer = dense_layer(1, 2, {2.0, 1.0}, {0.0});
    const Tensor acts = vec({1.0, 2.0});

    const Tensor at_zero = propagate_dense(acts, layer, {4.0}, Epsilon{0.0});
    CHECK(at_zero.values[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(at_zero.values[1] == doctest::Approx(2.0).epsilon(1e-9));

    // epsilon 0.5 inflates the denominator to 4.5: each side gets 16/9.
    const Tensor at_half = propagate_dense(acts, layer, {4.0}, Epsilon{0.5});
    CHECK(at_half.values[0] == doctest::Approx(16.0 / 9.0).epsilon(1e-9));
    CHECK(at_half.values[1] == doctest::Approx(16.0 / 9.0).epsilon(1e-9));

    // the stabilizer absorbs relevance: 32/9 < 4
    const double total = at_half.values[0] + at_half.values[1];
    CHECK(total == doctest::Approx(32.0 / 9.0).epsilon(1e-9));
    CHECK(total < 4.0);
}

TEST_CASE("dense: zero upper relevance propagates zeros") {
    const Layer layer = dense_layer(1, 2, {2.0, 1.0}, {0.0});
    const Tensor r = propagate_dense(vec({1.0, 2.0}), layer, {0.0}, Epsilon{0.0});
    CHECK(r.values == std::vector<double>{0.0, 0.0});
}

TEST_CASE("dense: cancelling contributions raise a degenerate denominator") {
    // z = (1, -1): the pre-activation is exactly zero.
    const Layer layer = dense_layer(1, 2, {1.0, 1.0}, {0.0});
    const Tensor acts = vec({1.0, -1.0});
    CHECK_THROWS_WITH_AS(propagate_dense(acts, layer, {1.0}, Epsilon{0.0}),
                         doctest::Contains("degenerate denominator"), Error);
    // With relevance zero on that unit nothing is distributed, so no error.
    const Tensor r = propagate_dense(acts, layer, {0.0}, Epsilon{0.0});
    CHECK(r.values == std::vector<double>{0.0, 0.0});
    // A positive stabilizer always repairs it (sign(0) = +1).
    const Tensor fixed = propagate_dense(acts, layer, {1.0}, Epsilon{0.5});
    CHECK(fixed.values[0] == doctest::Approx(2.0));
    CHECK(fixed.values[1] == doctest::Approx(-2.0));
}

TEST_CASE("dense: bias joins the denominator") {
    // a=[1], W=[[1]], b=[1]: pre-activation 2, so half the relevance reaches
    // the input and the bias absorbs the rest.
    const Layer layer = dense_layer(1, 1, {1.0}, {1.0});
    const Tensor r = propagate_dense(vec({1.0}), layer, {1.0}, Epsilon{0.0});
    CHECK(r.values[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("relu: identity pass-through") {
    const Tensor r = vec({1.0, -2.0, 0.0});
    const Tensor out = propagate_relu(r);
    CHECK(out.values == r.values);
    CHECK(out.dims == r.dims);
}

TEST_CASE("maxpool: winner takes all, ties go to the first in row-major order") {
    Tensor acts = Tensor::zeros({1, 2, 2});
    acts.values = {1.0, 2.0, 3.0, 4.0};
    Tensor upper = Tensor::zeros({1, 1, 1});
    upper.values = {5.0};
    const Tensor unique = propagate_maxpool(acts, upper);
    CHECK(unique.values == std::vector<double>{0.0, 0.0, 0.0, 5.0});

    acts.values = {7.0, 7.0, 7.0, 7.0};
    upper.values = {4.0};
    const Tensor tie = propagate_maxpool(acts, upper);
    CHECK(tie.values == std::vector<double>{4.0, 0.0, 0.0, 0.0});

    upper.values = {0.0};
    const Tensor zero = propagate_maxpool(acts, upper);
    CHECK(zero.values == std::vector<double>{0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("conv: a lone 1x1 kernel passes all relevance through") {
    Rng rng(1);
    Layer conv = random_conv(1, 1, 1, 1, 0, rng, false);
    conv.weights = {1.0};
    Tensor acts = Tensor::zeros({1, 1, 1});
    acts.values = {2.0};
    Tensor upper = Tensor::zeros({1, 1, 1});
    upper.values = {6.0};
    const Tensor r = propagate_conv(acts, conv, upper, Epsilon{0.0});
    CHECK(r.values[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("conv: cancelling contributions raise a degenerate denominator") {
    Layer conv;
    conv.kind = LayerKind::conv2d;
    conv.conv_out_ch = 1;
    conv.conv_in_ch = 1;
    conv.conv_kh = 1;
    conv.conv_kw = 2;
    conv.conv_padding = 0;
    conv.weights = {1.0, 1.0};
    conv.biases = {0.0};
    Tensor acts = Tensor::zeros({1, 1, 2});
    acts.values = {1.0, -1.0};
    Tensor upper = Tensor::zeros({1, 1, 1});
    upper.values = {2.0};
    CHECK_THROWS_WITH_AS(propagate_conv(acts, conv, upper, Epsilon{0.0}),
                         doctest::Contains("degenerate denominator"), Error);
    CHECK_NOTHROW(propagate_conv(acts, conv, upper, Epsilon{0.01}));
}

TEST_CASE("conv: zero upper relevance propagates zeros") {
    Rng rng(2);
    const Layer conv = random_conv(2, 1, 3, 3, 1, rng, false);
    const Tensor acts = Tensor::zeros({1, 4, 4}).reshaped({1, 4, 4});
    Tensor filled = acts;
    for (auto& v : filled.values)
        v = rng.uniform(-1.0, 1.0);
    const Tensor upper = Tensor::zeros({2, 4, 4});
    const Tensor r = propagate_conv(filled, conv, upper, Epsilon{0.0});
    for (double v : r.values)
        CHECK(v == 0.0);
}

TEST_CASE("conv: equals dense propagation on the unrolled matrix") {
    Rng rng(0x5EED);
    for (int trial = 0; trial < 50; ++trial) {
        const int in_ch = 1 + rng.below(2);
        const int out_ch = 1 + rng.below(2);
        const int k = 1 + rng.below(3);
        const int pad = rng.below(2);
        const int ih = std::max<int>(k, 2 + rng.below(3));
        const int iw = std::max<int>(k, 2 + rng.below(3));

        const Layer conv = random_conv(out_ch, in_ch, k, k, pad, rng, false);
        const Layer unrolled = testing::unroll_conv(conv, ih, iw);

        Tensor acts = Tensor::zeros({in_ch, ih, iw});
        for (auto& v : acts.values)
            v = rng.uniform(0.1, 2.0);

        const int oh = ih + 2 * pad - k + 1;
        const int ow = iw + 2 * pad - k + 1;
        Tensor upper = Tensor::zeros({out_ch, oh, ow});
        for (auto& v : upper.values)
            v = rng.uniform(-1.0, 1.0);

        const Epsilon eps{0.05};
        const Tensor via_conv = propagate_conv(acts, conv, upper, eps);
        const Tensor via_dense =
            propagate_dense(acts.reshaped({static_cast<int>(acts.size())}), unrolled,
                            upper.values, eps);

        REQUIRE(via_conv.size() == via_dense.size());
        for (std::size_t i = 0; i < via_conv.values.size(); ++i) {
            const double scale = std::max(1.0, std::abs(via_dense.values[i]));
            CHECK(std::abs(via_conv.values[i] - via_dense.values[i]) / scale <= 1e-9);
        }
    }
}

TEST_CASE("property: conservation for bias-free positive networks at epsilon 0") {
    Rng rng(0xC0);
    for (int trial = 0; trial < 40; ++trial) {
        const int in = 1 + rng.below(16);
        const int hidden = 1 + rng.below(16);
        const int out = 1 + rng.below(8);

        Network net;
        net.input_shape = {1, 1, in};
        Layer l1 = dense_layer(hidden, in, {}, {});
        l1.weights.resize(static_cast<std::size_t>(hidden) * in);
        l1.biases.assign(hidden, 0.0);
        for (auto& w : l1.weights)
            w = rng.uniform(0.05, 1.0);
        Layer l2 = dense_layer(out, hidden, {}, {});
        l2.weights.resize(static_cast<std::size_t>(out) * hidden);
        l2.biases.assign(out, 0.0);
        for (auto& w : l2.weights)
            w = rng.uniform(0.05, 1.0);
        net.layers = {l1, l2};
        net.validate();

        Tensor input = Tensor::zeros({1, 1, in});
        for (auto& v : input.values)
            v = rng.uniform(0.05, 1.0);

        const RelevanceMap map = relevance_of_image(net, input, Epsilon{0.0}, SeedSpec{});
        const ForwardTrace trace = forward(net, input);
        const auto seeded = seed_relevance(trace, SeedSpec{});
        const double seed_sum = std::accumulate(seeded.begin(), seeded.end(), 0.0);

        double total = 0.0;
        for (const auto& plane : map.channels)
            for (double v : plane.data)
                total += v;
        CHECK(std::abs(total - seed_sum) / std::abs(seed_sum) <= 1e-6);
    }
}

TEST_CASE("property: propagation is linear in the seed") {
    Rng rng(0x11EA);
    Network net;
    net.input_shape = {1, 4, 4};
    net.layers.push_back(random_conv(2, 1, 3, 3, 1, rng, false));
    Layer relu;
    relu.kind = LayerKind::relu;
    net.layers.push_back(relu);
    Layer flat;
    flat.kind = LayerKind::flatten;
    net.layers.push_back(flat);
    Layer head = dense_layer(3, 32, {}, {});
    head.weights.resize(96);
    head.biases.assign(3, 0.0);
    for (auto& w : head.weights)
        w = rng.uniform(-1.0, 1.0);
    net.layers.push_back(head);
    net.validate();

    Tensor input = Tensor::zeros({1, 4, 4});
    for (auto& v : input.values)
        v = rng.uniform(0.1, 1.0);

    const double c = 3.75;
    SeedSpec base{SeedMode::explicit_vector, {0.2, -1.0, 0.4}};
    SeedSpec scaled{SeedMode::explicit_vector, {c * 0.2, c * -1.0, c * 0.4}};

    const RelevanceMap r1 = relevance_of_image(net, input, Epsilon{0.01}, base);
    const RelevanceMap r2 = relevance_of_image(net, input, Epsilon{0.01}, scaled);
    for (std::size_t i = 0; i < r1.channels[0].data.size(); ++i) {
        const double want = c * r1.channels[0].data[i];
        const double scale = std::max(1e-12, std::abs(want));
        CHECK(std::abs(r2.channels[0].data[i] - want) / scale <= 1e-12);
    }
}

TEST_CASE("relevance_of_image: composition of the worked dense example") {
    const Network net = parse_network_json(
        R"({"input_shape":[1,1,2],
            "layers":[{"kind":"dense","weights":[[2,1]],"bias":[0]}]})");
    Tensor input = Tensor::zeros({1, 1, 2});
    input.values = {1.0, 2.0};
    const RelevanceMap map = relevance_of_image(net, input, Epsilon{0.0}, SeedSpec{});
    REQUIRE(map.channels.size() == 1);
    CHECK(map.width() == 2);
    CHECK(map.height() == 1);
    CHECK(map.channels[0].at(0, 0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(map.channels[0].at(1, 0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("relevance_of_image: identity chain reshapes the seed to the input") {
    const Network net = parse_network_json(
        R"({"input_shape":[1,2,2],"layers":[{"kind":"relu"},{"kind":"flatten"}]})");
    Tensor input = Tensor::zeros({1, 2, 2});
    input.values = {0.5, 1.5, 2.5, 3.5};
    SeedSpec seed{SeedMode::explicit_vector, {1.0, 2.0, 3.0, 4.0}};
    const RelevanceMap map = relevance_of_image(net, input, Epsilon{0.0}, seed);
    REQUIRE(map.channels.size() == 1);
    CHECK(map.channels[0].data == std::vector<double>{1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("relevance_of_image: errors carry the layer index") {
    const Network net = parse_network_json(
        R"({"input_shape":[1,1,2],
            "layers":[{"kind":"dense","weights":[[1,1]],"bias":[0]}]})");
    Tensor input = Tensor::zeros({1, 1, 2});
    input.values = {1.0, -1.0};
    // The output is exactly zero, so force relevance onto the cancelled unit.
    SeedSpec seed{SeedMode::explicit_vector, {1.0}};
    CHECK_THROWS_WITH_AS(relevance_of_image(net, input, Epsilon{0.0}, seed),
                         doctest::Contains("layer 0"), Error);
}

TEST_CASE("epsilon: negative or non-finite stabilizers are rejected") {
    CHECK_THROWS_AS(Epsilon{-0.1}, Error);
    CHECK_THROWS_AS(Epsilon{std::nan("")}, Error);
    CHECK_NOTHROW(Epsilon{0.0});
}

TEST_CASE("relevance map: channel sum") {
    RelevanceMap map;
    FloatPlane a(2, 1), b(2, 1);
    a.data = {1.0, -2.0};
    b.data = {0.5, 2.0};
    map.channels = {a, b};
    const FloatPlane sum = map.summed();
    CHECK(sum.data == std::vector<double>{1.5, 0.0});
}
