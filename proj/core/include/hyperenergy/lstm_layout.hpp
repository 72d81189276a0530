#pragma once

#include "hyperenergy/tensor.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace hyperenergy {

/// Where each LSTM layer's gate-stacked weight matrix and bias vector live
/// inside the flat generated parameter vector. Layers tile the vector in
/// order, weights then biases, with no gaps or overlaps. Gate order within
/// the 4u axis is (input, forget, cell, output).
struct LstmParamLayout {
    struct LayerSpan {
        std::size_t weight_offset = 0;
        std::size_t weight_end = 0;
        std::size_t bias_offset = 0;
        std::size_t bias_end = 0;
        std::size_t input_dim = 0;   // k for layer 0, u afterwards
        Shape weight_shape;          // [4u x (input_dim + u)]
        Shape bias_shape;            // [4u]
    };

    std::size_t num_layers = 0;
    std::size_t hidden_units = 0;   // u
    std::size_t input_features = 0; // k
    std::vector<LayerSpan> layers;
    std::size_t total_params = 0;   // P
};

/// P = sum over layers of 4u*(d_in + u) + 4u, with d_in = k for layer 0 and
/// u for the rest.
LstmParamLayout build_layout(std::size_t hidden_units, std::size_t input_features,
                             std::size_t num_layers);

/// Differentiable extraction of one layer's (W, b) from a flat parameter row.
/// Concatenating every extracted piece in offset order reconstructs the row.
std::pair<Tensor, Tensor> extract_layer_params(const Tensor& theta_row,
                                               const LstmParamLayout& layout,
                                               std::size_t layer);

} // namespace hyperenergy
