#include "rdic/lrp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rdic {

Epsilon::Epsilon(double v) : value(v) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw Error("epsilon: stabilizer must be a finite non-negative value");
}

FloatPlane RelevanceMap::summed() const {
    if (channels.empty())
        throw Error("relevance map: no channels");
    FloatPlane sum = channels.front();
    for (std::size_t c = 1; c < channels.size(); ++c) {
        if (channels[c].width != sum.width || channels[c].height != sum.height)
            throw Error("relevance map: channel dimensions differ");
        for (std::size_t i = 0; i < sum.data.size(); ++i)
            sum.data[i] += channels[c].data[i];
    }
    return sum;
}

std::vector<double> seed_relevance(const ForwardTrace& trace, const SeedSpec& seed) {
    const std::vector<double>& out = trace.output.values;
    if (out.empty())
        throw Error("seed_relevance: trace has no output");
    if (seed.mode == SeedMode::explicit_vector) {
        if (seed.values.size() != out.size())
            throw Error("seed_relevance: explicit seed length " +
                        std::to_string(seed.values.size()) + " does not match output length " +
                        std::to_string(out.size()));
        return seed.values;
    }
    // First maximum wins on ties.
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] > out[best])
            best = i;
    std::vector<double> r(out.size(), 0.0);
    r[best] = out[best];
    return r;
}

namespace {

// sign with sign(0) = +1, so a positive stabilizer always moves the
// denominator away from zero.
double stab_sign(double v) {
    return v < 0.0 ? -1.0 : 1.0;
}

[[noreturn]] void throw_degenerate(const std::string& unit) {
    throw Error("degenerate denominator: contributions cancel at output unit " + unit +
                " while it carries relevance; use a positive epsilon");
}

} // namespace

Tensor propagate_dense(const Tensor& input_acts, const Layer& layer,
                       const std::vector<double>& relevance_upper, Epsilon eps) {
    if (layer.kind != LayerKind::dense)
        throw Error("propagate_dense: layer is not dense");
    if (input_acts.size() != static_cast<std::size_t>(layer.dense_in))
        throw Error("propagate_dense: activation count " + std::to_string(input_acts.size()) +
                    " does not match layer input " + std::to_string(layer.dense_in));
    if (relevance_upper.size() != static_cast<std::size_t>(layer.dense_out))
        throw Error("propagate_dense: relevance length " +
                    std::to_string(relevance_upper.size()) + " does not match layer output " +
                    std::to_string(layer.dense_out));

    Tensor result = Tensor::zeros(input_acts.dims);
    for (int j = 0; j < layer.dense_out; ++j) {
        const double r_j = relevance_upper[j];
        if (r_j == 0.0)
            continue;
        // Denominator base is the pre-activation: contributions plus bias.
        double base = layer.biases[j];
        for (int i = 0; i < layer.dense_in; ++i)
            base += input_acts.values[i] * layer.dense_weight(j, i);
        const double denom = base + eps.value * stab_sign(base);
        if (denom == 0.0)
            throw_degenerate(std::to_string(j));
        const double scale = r_j / denom;
        for (int i = 0; i < layer.dense_in; ++i)
            result.values[i] += input_acts.values[i] * layer.dense_weight(j, i) * scale;
    }
    return result;
}

Tensor propagate_conv(const Tensor& input_acts, const Layer& layer,
                      const Tensor& relevance_upper, Epsilon eps) {
    if (layer.kind != LayerKind::conv2d)
        throw Error("propagate_conv: layer is not conv2d");
    if (input_acts.rank() != 3 || input_acts.dims[0] != layer.conv_in_ch)
        throw Error("propagate_conv: activations do not match the layer input channels");
    const int ih = input_acts.dims[1], iw = input_acts.dims[2];
    const int oh = ih + 2 * layer.conv_padding - layer.conv_kh + 1;
    const int ow = iw + 2 * layer.conv_padding - layer.conv_kw + 1;
    if (relevance_upper.rank() != 3 || relevance_upper.dims[0] != layer.conv_out_ch ||
        relevance_upper.dims[1] != oh || relevance_upper.dims[2] != ow)
        throw Error("propagate_conv: relevance shape does not match the layer output");

    Tensor result = Tensor::zeros(input_acts.dims);
    for (int oc = 0; oc < layer.conv_out_ch; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const double r_j = relevance_upper.at(oc, oy, ox);
                if (r_j == 0.0)
                    continue;
                double base = layer.biases[oc];
                for (int ic = 0; ic < layer.conv_in_ch; ++ic) {
                    for (int ky = 0; ky < layer.conv_kh; ++ky) {
                        const int iy = oy - layer.conv_padding + ky;
                        if (iy < 0 || iy >= ih)
                            continue;
                        for (int kx = 0; kx < layer.conv_kw; ++kx) {
                            const int ix = ox - layer.conv_padding + kx;
                            if (ix < 0 || ix >= iw)
                                continue;
                            base += input_acts.at(ic, iy, ix) * layer.conv_weight(oc, ic, ky, kx);
                        }
                    }
                }
                const double denom = base + eps.value * stab_sign(base);
                if (denom == 0.0)
                    throw_degenerate("(" + std::to_string(oc) + "," + std::to_string(oy) + "," +
                                     std::to_string(ox) + ")");
                const double scale = r_j / denom;
                for (int ic = 0; ic < layer.conv_in_ch; ++ic) {
                    for (int ky = 0; ky < layer.conv_kh; ++ky) {
                        const int iy = oy - layer.conv_padding + ky;
                        if (iy < 0 || iy >= ih)
                            continue;
                        for (int kx = 0; kx < layer.conv_kw; ++kx) {
                            const int ix = ox - layer.conv_padding + kx;
                            if (ix < 0 || ix >= iw)
                                continue;
                            result.at(ic, iy, ix) +=
                                input_acts.at(ic, iy, ix) * layer.conv_weight(oc, ic, ky, kx) * scale;
                        }
                    }
                }
            }
        }
    }
    return result;
}

Tensor propagate_relu(const Tensor& relevance_upper) {
    return relevance_upper;
}

Tensor propagate_maxpool(const Tensor& input_acts, const Tensor& relevance_upper) {
    if (input_acts.rank() != 3)
        throw Error("propagate_maxpool: activations must have rank 3");
    const int c = input_acts.dims[0], h = input_acts.dims[1], w = input_acts.dims[2];
    if (h % 2 != 0 || w % 2 != 0)
        throw Error("propagate_maxpool: activations must have even height and width");
    if (relevance_upper.rank() != 3 || relevance_upper.dims[0] != c ||
        relevance_upper.dims[1] != h / 2 || relevance_upper.dims[2] != w / 2)
        throw Error("propagate_maxpool: relevance shape does not match pooled output");

    Tensor result = Tensor::zeros(input_acts.dims);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h / 2; ++y) {
            for (int x = 0; x < w / 2; ++x) {
                int best_y = 2 * y, best_x = 2 * x;
                double best = input_acts.at(ch, best_y, best_x);
                for (int dy = 0; dy < 2; ++dy) {
                    for (int dx = 0; dx < 2; ++dx) {
                        const double v = input_acts.at(ch, 2 * y + dy, 2 * x + dx);
                        if (v > best) { // strict: ties keep the first position
                            best = v;
                            best_y = 2 * y + dy;
                            best_x = 2 * x + dx;
                        }
                    }
                }
                result.at(ch, best_y, best_x) += relevance_upper.at(ch, y, x);
            }
        }
    }
    return result;
}

RelevanceMap relevance_from_trace(const Network& net, const ForwardTrace& trace,
                                  Epsilon eps, const SeedSpec& seed) {
    if (trace.layer_inputs.size() != net.layers.size())
        throw Error("relevance: trace does not match the network layer count");

    std::vector<double> seeded = seed_relevance(trace, seed);
    Tensor r = Tensor::from_vector(std::move(seeded)).reshaped(trace.output.dims);

    for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
        const Layer& layer = net.layers[l];
        const Tensor& acts = trace.layer_inputs[l];
        try {
            switch (layer.kind) {
            case LayerKind::dense:
                r = propagate_dense(acts, layer, r.values, eps);
                break;
            case LayerKind::conv2d:
                r = propagate_conv(acts, layer, r, eps);
                break;
            case LayerKind::relu:
                r = propagate_relu(r);
                break;
            case LayerKind::maxpool2x2:
                r = propagate_maxpool(acts, r);
                break;
            case LayerKind::flatten:
                r = r.reshaped(acts.dims);
                break;
            }
        } catch (const Error& e) {
            throw Error("layer " + std::to_string(l) + " (" + layer_kind_name(layer.kind) +
                        "): " + e.what());
        }
    }

    RelevanceMap map;
    if (r.rank() == 3) {
        for (int c = 0; c < r.dims[0]; ++c) {
            FloatPlane plane(r.dims[2], r.dims[1]);
            for (int y = 0; y < r.dims[1]; ++y)
                for (int x = 0; x < r.dims[2]; ++x)
                    plane.at(x, y) = r.at(c, y, x);
            map.channels.push_back(std::move(plane));
        }
    } else {
        FloatPlane plane(static_cast<int>(r.size()), 1);
        plane.data = r.values;
        map.channels.push_back(std::move(plane));
    }
    return map;
}

RelevanceMap relevance_of_image(const Network& net, const Tensor& input,
                                Epsilon eps, const SeedSpec& seed) {
    return relevance_from_trace(net, forward(net, input), eps, seed);
}

RelevanceMap relevance_of_image(const Network& net, const Image& img,
                                Epsilon eps, const SeedSpec& seed) {
    return relevance_of_image(net, image_to_tensor(img), eps, seed);
}

} // namespace rdic
