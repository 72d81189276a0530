#pragma once

#include "hyperenergy/grad_check.hpp"
#include "hyperenergy/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hyperenergy {

enum class Activation { relu, swish };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);
Tensor apply_activation(const Tensor& x, Activation a);

/// Fully connected stack mapping kernel features to the primary network's
/// flat parameter vector. Hidden layers alternate affine + activation; the
/// final layer is affine only.
struct HyperNetParams {
    struct Layer {
        Tensor weight; // [out x in]
        Tensor bias;   // [out]
    };
    std::vector<Layer> layers;
    Activation activation = Activation::swish;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;

    std::vector<NamedParam> named_params(const std::string& prefix) const;
};

/// Uniform Xavier init: weights ~ U(+-sqrt(6/(fan_in+fan_out))), biases zero.
HyperNetParams hypernet_init(const std::vector<std::size_t>& hidden_sizes,
                             std::size_t input_dim, std::size_t output_dim,
                             Activation activation, std::uint64_t seed);

/// features: [B x input_dim] -> theta: [B x output_dim], one parameter row
/// per batch sample.
Tensor hypernet_forward(const Tensor& features, const HyperNetParams& params);

} // namespace hyperenergy
