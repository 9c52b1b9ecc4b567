#pragma once

#include <vector>

#include "rdic/image.hpp"
#include "rdic/nn.hpp"

namespace rdic {

// Stabilizer for relevance denominators. Zero is permitted, but propagation
// then fails with a "degenerate denominator" error if contributions cancel
// on a unit that still carries relevance.
struct Epsilon {
    double value = 0.0;

    Epsilon() = default;
    explicit Epsilon(double v);
};

// Per-pixel relevance, one plane per network input channel. Values are
// unbounded in sign and magnitude.
struct RelevanceMap {
    std::vector<FloatPlane> channels;

    int width() const { return channels.empty() ? 0 : channels.front().width; }
    int height() const { return channels.empty() ? 0 : channels.front().height; }

    // Channel sum, the single-plane reduction used for masking and PFM export.
    FloatPlane summed() const;
};

enum class SeedMode { argmax_onehot, explicit_vector };

struct SeedSpec {
    SeedMode mode = SeedMode::argmax_onehot;
    std::vector<double> values; // explicit_vector only
};

// argmax_onehot keeps the winning logit's value at its index (first winner on
// ties) and zeroes the rest; explicit_vector passes the given vector through.
std::vector<double> seed_relevance(const ForwardTrace& trace, const SeedSpec& seed);

// Relevance redistribution for one weighted layer: contributions a_i * w_ij
// are normalized by the stabilized pre-activation of each upper unit. The
// result is shaped like input_acts.
Tensor propagate_dense(const Tensor& input_acts, const Layer& layer,
                       const std::vector<double>& relevance_upper, Epsilon eps);

Tensor propagate_conv(const Tensor& input_acts, const Layer& layer,
                      const Tensor& relevance_upper, Epsilon eps);

// Identity: relevance passes through unchanged.
Tensor propagate_relu(const Tensor& relevance_upper);

// Winner-take-all: each 2x2 window's relevance lands on the window maximum,
// ties broken by first position in row-major order.
Tensor propagate_maxpool(const Tensor& input_acts, const Tensor& relevance_upper);

// Backward walk over a recorded forward pass.
RelevanceMap relevance_from_trace(const Network& net, const ForwardTrace& trace,
                                  Epsilon eps, const SeedSpec& seed);

// forward + seed + backward in one call.
RelevanceMap relevance_of_image(const Network& net, const Tensor& input,
                                Epsilon eps, const SeedSpec& seed);
RelevanceMap relevance_of_image(const Network& net, const Image& img,
                                Epsilon eps, const SeedSpec& seed);

} // namespace rdic
