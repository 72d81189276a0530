#include "hyperenergy/hypernet.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/rng.hpp"

#include <cmath>

namespace hyperenergy {

std::string activation_name(Activation a) {
    return a == Activation::relu ? "relu" : "swish";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "swish") return Activation::swish;
    throw ConfigError("unknown activation '" + name + "'");
}

Tensor apply_activation(const Tensor& x, Activation a) {
    return a == Activation::relu ? relu(x) : swish(x);
}

std::vector<NamedParam> HyperNetParams::named_params(const std::string& prefix) const {
    std::vector<NamedParam> out;
    out.reserve(layers.size() * 2);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        out.push_back({prefix + ".layer" + std::to_string(i) + ".weight", layers[i].weight});
        out.push_back({prefix + ".layer" + std::to_string(i) + ".bias", layers[i].bias});
    }
    return out;
}

HyperNetParams hypernet_init(const std::vector<std::size_t>& hidden_sizes,
                             std::size_t input_dim, std::size_t output_dim,
                             Activation activation, std::uint64_t seed) {
    if (hidden_sizes.empty()) {
        throw ConfigError("hypernet_init: hidden_sizes must be non-empty");
    }
    for (std::size_t w : hidden_sizes) {
        if (w == 0) throw ConfigError("hypernet_init: layer widths must be >= 1");
    }
    if (input_dim == 0 || output_dim == 0) {
        throw ConfigError("hypernet_init: input and output widths must be >= 1");
    }

    std::vector<std::size_t> widths;
    widths.push_back(input_dim);
    widths.insert(widths.end(), hidden_sizes.begin(), hidden_sizes.end());
    widths.push_back(output_dim);

    HyperNetParams params;
    params.activation = activation;
    params.input_dim = input_dim;
    params.output_dim = output_dim;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        const std::size_t fan_in = widths[i];
        const std::size_t fan_out = widths[i + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        auto rng = make_rng(seed, "hypernet.layer", i);
        HyperNetParams::Layer layer;
        layer.weight = Tensor::from_values(
            {fan_out, fan_in}, uniform_draws(rng, fan_out * fan_in, -bound, bound), true);
        layer.bias = Tensor::zeros({fan_out}, true);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

Tensor hypernet_forward(const Tensor& features, const HyperNetParams& params) {
    if (features.rank() != 2 || features.dim(1) != params.input_dim) {
        throw ShapeError("hypernet_forward: features " + shape_str(features.shape()) +
                         " do not match input width " + std::to_string(params.input_dim));
    }
    Tensor h = features;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        h = affine(h, params.layers[i].weight, params.layers[i].bias);
        if (i + 1 < params.layers.size()) {
            h = apply_activation(h, params.activation);
        }
    }
    return h;
}

} // namespace hyperenergy
