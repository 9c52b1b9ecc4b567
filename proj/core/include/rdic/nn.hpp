#pragma once

#include <string>
#include <vector>

#include "rdic/error.hpp"
#include "rdic/image.hpp"

namespace rdic {

// Dense row-major tensor of rank 1 or 3 (channels, height, width).
struct Tensor {
    std::vector<int> dims;
    std::vector<double> values;

    Tensor() = default;

    static Tensor zeros(std::vector<int> dims);
    static Tensor from_vector(std::vector<double> v);

    int rank() const { return static_cast<int>(dims.size()); }
    std::size_t size() const { return values.size(); }

    // Rank-3 access.
    double& at(int c, int y, int x) {
        return values[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
    }
    double at(int c, int y, int x) const {
        return values[(static_cast<std::size_t>(c) * dims[1] + y) * dims[2] + x];
    }

    Tensor reshaped(std::vector<int> new_dims) const;

    bool same_shape(const Tensor& other) const { return dims == other.dims; }
};

enum class LayerKind { dense, conv2d, relu, maxpool2x2, flatten };

const char* layer_kind_name(LayerKind kind);

struct Layer {
    LayerKind kind = LayerKind::relu;

    // dense: weights is out x in, row-major; biases has out entries.
    int dense_in = 0;
    int dense_out = 0;

    // conv2d: weights is out_ch x in_ch x kh x kw, row-major; biases has
    // out_ch entries. Stride is fixed at 1; padding is explicit.
    int conv_out_ch = 0;
    int conv_in_ch = 0;
    int conv_kh = 0;
    int conv_kw = 0;
    int conv_padding = 0;

    std::vector<double> weights;
    std::vector<double> biases;

    double dense_weight(int out, int in) const {
        return weights[static_cast<std::size_t>(out) * dense_in + in];
    }
    double conv_weight(int oc, int ic, int ky, int kx) const {
        return weights[((static_cast<std::size_t>(oc) * conv_in_ch + ic) * conv_kh + ky) * conv_kw + kx];
    }
};

struct Network {
    std::vector<int> input_shape; // {channels, height, width}
    std::vector<Layer> layers;

    // Filled by validate(): the output shape of each layer, in order.
    std::vector<std::vector<int>> output_shapes;

    // Walks the shape chain; throws Error naming the offending layer index.
    void validate();
};

// Per-layer input activations plus the final output vector. layer_inputs[0]
// is the network input; layer_inputs has one entry per layer.
struct ForwardTrace {
    std::vector<Tensor> layer_inputs;
    Tensor output;
};

// Model file is a single JSON document; see README for the schema.
Network load_network(const std::string& path);
Network parse_network_json(const std::string& text);

ForwardTrace forward(const Network& net, const Tensor& input);

// Pixel samples scaled to [0,1], shaped (channels, height, width).
Tensor image_to_tensor(const Image& img);

} // namespace rdic
