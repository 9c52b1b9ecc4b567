#include "rdic/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace rdic {

namespace {

std::size_t shape_size(const std::vector<int>& dims) {
    std::size_t n = 1;
    for (int d : dims)
        n *= static_cast<std::size_t>(d);
    return n;
}

std::string shape_str(const std::vector<int>& dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i)
            s += ",";
        s += std::to_string(dims[i]);
    }
    return s + ")";
}

} // namespace

Tensor Tensor::zeros(std::vector<int> dims) {
    Tensor t;
    for (int d : dims)
        if (d < 1)
            throw Error("tensor: non-positive dimension in " + shape_str(dims));
    t.values.assign(shape_size(dims), 0.0);
    t.dims = std::move(dims);
    return t;
}

Tensor Tensor::from_vector(std::vector<double> v) {
    Tensor t;
    t.dims = {static_cast<int>(v.size())};
    t.values = std::move(v);
    return t;
}

Tensor Tensor::reshaped(std::vector<int> new_dims) const {
    if (shape_size(new_dims) != values.size())
        throw Error("tensor: reshape " + shape_str(dims) + " -> " + shape_str(new_dims) +
                    " changes element count");
    Tensor t;
    t.dims = std::move(new_dims);
    t.values = values;
    return t;
}

const char* layer_kind_name(LayerKind kind) {
    switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::relu: return "relu";
    case LayerKind::maxpool2x2: return "maxpool2x2";
    case LayerKind::flatten: return "flatten";
    }
    return "?";
}

namespace {

// Output shape of one layer, given its input shape. Dense accepts any shape
// whose element count matches; spatial layers require rank 3.
std::vector<int> layer_output_shape(const Layer& layer, const std::vector<int>& in, int index) {
    const std::string where = "layer " + std::to_string(index) + " (" +
                              layer_kind_name(layer.kind) + "): ";
    switch (layer.kind) {
    case LayerKind::dense:
        if (shape_size(in) != static_cast<std::size_t>(layer.dense_in))
            throw Error(where + "expects " + std::to_string(layer.dense_in) +
                        " input values, previous shape " + shape_str(in) + " has " +
                        std::to_string(shape_size(in)));
        return {layer.dense_out};
    case LayerKind::conv2d: {
        if (in.size() != 3)
            throw Error(where + "expects a (channels,height,width) input, got " + shape_str(in));
        if (in[0] != layer.conv_in_ch)
            throw Error(where + "expects " + std::to_string(layer.conv_in_ch) +
                        " input channels, previous shape " + shape_str(in));
        const int oh = in[1] + 2 * layer.conv_padding - layer.conv_kh + 1;
        const int ow = in[2] + 2 * layer.conv_padding - layer.conv_kw + 1;
        if (oh < 1 || ow < 1)
            throw Error(where + "kernel does not fit input " + shape_str(in));
        return {layer.conv_out_ch, oh, ow};
    }
    case LayerKind::relu:
        return in;
    case LayerKind::maxpool2x2:
        if (in.size() != 3)
            throw Error(where + "expects a (channels,height,width) input, got " + shape_str(in));
        if (in[1] % 2 != 0 || in[2] % 2 != 0)
            throw Error(where + "requires even height and width, got " + shape_str(in));
        return {in[0], in[1] / 2, in[2] / 2};
    case LayerKind::flatten:
        if (in.size() != 3)
            throw Error(where + "expects a (channels,height,width) input, got " + shape_str(in));
        return {static_cast<int>(shape_size(in))};
    }
    throw Error(where + "unknown layer kind");
}

} // namespace

void Network::validate() {
    if (input_shape.size() != 3 || input_shape[0] < 1 || input_shape[1] < 1 || input_shape[2] < 1)
        throw Error("network: input_shape must be three positive values (channels,height,width)");
    if (layers.empty())
        throw Error("network: at least one layer is required");
    output_shapes.clear();
    std::vector<int> shape = input_shape;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        shape = layer_output_shape(layers[i], shape, static_cast<int>(i));
        output_shapes.push_back(shape);
    }
}

namespace {

using nlohmann::json;

std::vector<double> parse_matrix(const json& j, int& rows, int& cols, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ParseError(where + ": weights must be a non-empty 2-d array");
    rows = static_cast<int>(j.size());
    cols = -1;
    std::vector<double> out;
    for (const auto& row : j) {
        if (!row.is_array())
            throw ParseError(where + ": weights must be a 2-d array");
        if (cols < 0)
            cols = static_cast<int>(row.size());
        else if (static_cast<int>(row.size()) != cols)
            throw ParseError(where + ": ragged weight rows");
        for (const auto& v : row) {
            if (!v.is_number())
                throw ParseError(where + ": weight entries must be numbers");
            out.push_back(v.get<double>());
        }
    }
    if (cols == 0)
        throw ParseError(where + ": empty weight rows");
    return out;
}

std::vector<double> parse_vector(const json& j, const std::string& where) {
    if (!j.is_array())
        throw ParseError(where + ": bias must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number())
            throw ParseError(where + ": bias entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

// conv weights: out_ch x in_ch x kh x kw nested arrays.
std::vector<double> parse_conv_weights(const json& j, Layer& layer, const std::string& where) {
    if (!j.is_array() || j.empty())
        throw ParseError(where + ": conv weights must be a 4-d array");
    std::vector<double> out;
    layer.conv_out_ch = static_cast<int>(j.size());
    layer.conv_in_ch = layer.conv_kh = layer.conv_kw = -1;
    for (const auto& per_out : j) {
        if (!per_out.is_array() || per_out.empty())
            throw ParseError(where + ": conv weights must be a 4-d array");
        if (layer.conv_in_ch < 0)
            layer.conv_in_ch = static_cast<int>(per_out.size());
        else if (static_cast<int>(per_out.size()) != layer.conv_in_ch)
            throw ParseError(where + ": ragged conv weight axes");
        for (const auto& per_in : per_out) {
            if (!per_in.is_array() || per_in.empty())
                throw ParseError(where + ": conv weights must be a 4-d array");
            if (layer.conv_kh < 0)
                layer.conv_kh = static_cast<int>(per_in.size());
            else if (static_cast<int>(per_in.size()) != layer.conv_kh)
                throw ParseError(where + ": ragged conv weight axes");
            for (const auto& per_row : per_in) {
                if (!per_row.is_array() || per_row.empty())
                    throw ParseError(where + ": conv weights must be a 4-d array");
                if (layer.conv_kw < 0)
                    layer.conv_kw = static_cast<int>(per_row.size());
                else if (static_cast<int>(per_row.size()) != layer.conv_kw)
                    throw ParseError(where + ": ragged conv weight axes");
                for (const auto& v : per_row) {
                    if (!v.is_number())
                        throw ParseError(where + ": conv weight entries must be numbers");
                    out.push_back(v.get<double>());
                }
            }
        }
    }
    return out;
}

Layer parse_layer(const json& j, int index) {
    const std::string where = "layer " + std::to_string(index);
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw ParseError(where + ": each layer needs a string \"kind\"");
    const std::string kind = j["kind"].get<std::string>();

    Layer layer;
    if (kind == "dense")
        layer.kind = LayerKind::dense;
    else if (kind == "conv2d")
        layer.kind = LayerKind::conv2d;
    else if (kind == "relu")
        layer.kind = LayerKind::relu;
    else if (kind == "maxpool2x2")
        layer.kind = LayerKind::maxpool2x2;
    else if (kind == "flatten")
        layer.kind = LayerKind::flatten;
    else
        throw ParseError(where + ": unknown kind \"" + kind + "\"");

    const bool weighted = layer.kind == LayerKind::dense || layer.kind == LayerKind::conv2d;
    if (weighted) {
        if (!j.contains("weights") || !j.contains("bias"))
            throw ParseError(where + ": " + kind + " requires \"weights\" and \"bias\"");
    } else {
        if (j.contains("weights") || j.contains("bias"))
            throw ParseError(where + ": " + kind + " must not carry weights or bias");
        if (j.contains("padding"))
            throw ParseError(where + ": padding is only valid on conv2d");
        return layer;
    }

    layer.biases = parse_vector(j["bias"], where);
    for (double b : layer.biases)
        if (!std::isfinite(b))
            throw ParseError(where + ": non-finite bias value");

    if (layer.kind == LayerKind::dense) {
        if (j.contains("padding"))
            throw ParseError(where + ": padding is only valid on conv2d");
        layer.weights = parse_matrix(j["weights"], layer.dense_out, layer.dense_in, where);
        if (static_cast<int>(layer.biases.size()) != layer.dense_out)
            throw ParseError(where + ": bias length " + std::to_string(layer.biases.size()) +
                             " does not match " + std::to_string(layer.dense_out) + " outputs");
    } else {
        layer.weights = parse_conv_weights(j["weights"], layer, where);
        if (static_cast<int>(layer.biases.size()) != layer.conv_out_ch)
            throw ParseError(where + ": bias length " + std::to_string(layer.biases.size()) +
                             " does not match " + std::to_string(layer.conv_out_ch) +
                             " output channels");
        if (j.contains("padding")) {
            if (!j["padding"].is_number_integer() || j["padding"].get<int>() < 0)
                throw ParseError(where + ": padding must be a non-negative integer");
            layer.conv_padding = j["padding"].get<int>();
        }
    }
    for (double w : layer.weights)
        if (!std::isfinite(w))
            throw ParseError(where + ": non-finite weight value");
    return layer;
}

} // namespace

Network parse_network_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("input_shape") || !doc.contains("layers"))
        throw ParseError("model: expected an object with \"input_shape\" and \"layers\"");

    Network net;
    const auto& shape = doc["input_shape"];
    if (!shape.is_array() || shape.size() != 3)
        throw ParseError("model: input_shape must be [channels, height, width]");
    for (const auto& v : shape) {
        if (!v.is_number_integer() || v.get<int>() < 1)
            throw ParseError("model: input_shape entries must be positive integers");
        net.input_shape.push_back(v.get<int>());
    }

    const auto& layers = doc["layers"];
    if (!layers.is_array())
        throw ParseError("model: layers must be an array");
    int index = 0;
    for (const auto& j : layers)
        net.layers.push_back(parse_layer(j, index++));

    net.validate();
    return net;
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_network_json(text);
}

namespace {

Tensor forward_dense(const Layer& layer, const Tensor& in) {
    Tensor out = Tensor::zeros({layer.dense_out});
    for (int j = 0; j < layer.dense_out; ++j) {
        double acc = layer.biases[j];
        for (int i = 0; i < layer.dense_in; ++i)
            acc += layer.dense_weight(j, i) * in.values[i];
        out.values[j] = acc;
    }
    return out;
}

Tensor forward_conv(const Layer& layer, const Tensor& in) {
    const int ih = in.dims[1], iw = in.dims[2];
    const int oh = ih + 2 * layer.conv_padding - layer.conv_kh + 1;
    const int ow = iw + 2 * layer.conv_padding - layer.conv_kw + 1;
    Tensor out = Tensor::zeros({layer.conv_out_ch, oh, ow});
    for (int oc = 0; oc < layer.conv_out_ch; ++oc) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = layer.biases[oc];
                for (int ic = 0; ic < layer.conv_in_ch; ++ic) {
                    for (int ky = 0; ky < layer.conv_kh; ++ky) {
                        const int iy = oy - layer.conv_padding + ky;
                        if (iy < 0 || iy >= ih)
                            continue;
                        for (int kx = 0; kx < layer.conv_kw; ++kx) {
                            const int ix = ox - layer.conv_padding + kx;
                            if (ix < 0 || ix >= iw)
                                continue;
                            acc += in.at(ic, iy, ix) * layer.conv_weight(oc, ic, ky, kx);
                        }
                    }
                }
                out.at(oc, oy, ox) = acc;
            }
        }
    }
    return out;
}

Tensor forward_maxpool(const Tensor& in) {
    const int c = in.dims[0], h = in.dims[1], w = in.dims[2];
    Tensor out = Tensor::zeros({c, h / 2, w / 2});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h / 2; ++y)
            for (int x = 0; x < w / 2; ++x)
                out.at(ch, y, x) = std::max(
                    std::max(in.at(ch, 2 * y, 2 * x), in.at(ch, 2 * y, 2 * x + 1)),
                    std::max(in.at(ch, 2 * y + 1, 2 * x), in.at(ch, 2 * y + 1, 2 * x + 1)));
    return out;
}

} // namespace

ForwardTrace forward(const Network& net, const Tensor& input) {
    if (input.dims != net.input_shape)
        throw Error("forward: input shape " + shape_str(input.dims) +
                    " does not match network input " + shape_str(net.input_shape));

    ForwardTrace trace;
    Tensor cur = input;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
        const Layer& layer = net.layers[i];
        trace.layer_inputs.push_back(cur);
        switch (layer.kind) {
        case LayerKind::dense:
            cur = forward_dense(layer, cur);
            break;
        case LayerKind::conv2d:
            cur = forward_conv(layer, cur);
            break;
        case LayerKind::relu:
            for (double& v : cur.values)
                v = std::max(0.0, v);
            break;
        case LayerKind::maxpool2x2:
            cur = forward_maxpool(cur);
            break;
        case LayerKind::flatten:
            cur = cur.reshaped({static_cast<int>(cur.size())});
            break;
        }
    }
    // The output is consumed as a flat vector by seeding; keep its dims so
    // the backward walk can start shaped.
    trace.output = std::move(cur);
    return trace;
}

Tensor image_to_tensor(const Image& img) {
    Tensor t = Tensor::zeros({img.channels, img.height, img.width});
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                t.at(c, y, x) = img.at(x, y, c) / 255.0;
    return t;
}

} // namespace rdic
