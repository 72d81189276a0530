#include "hyperenergy/lstm_layout.hpp"

#include "hyperenergy/errors.hpp"

namespace hyperenergy {

LstmParamLayout build_layout(std::size_t hidden_units, std::size_t input_features,
                             std::size_t num_layers) {
    if (hidden_units == 0 || input_features == 0 || num_layers == 0) {
        throw ShapeError("build_layout: hidden_units, input_features and num_layers must be >= 1");
    }
    LstmParamLayout layout;
    layout.num_layers = num_layers;
    layout.hidden_units = hidden_units;
    layout.input_features = input_features;

    const std::size_t rows = 4 * hidden_units;
    std::size_t offset = 0;
    for (std::size_t l = 0; l < num_layers; ++l) {
        LstmParamLayout::LayerSpan span;
        span.input_dim = (l == 0) ? input_features : hidden_units;
        const std::size_t cols = span.input_dim + hidden_units;
        span.weight_offset = offset;
        span.weight_end = offset + rows * cols;
        span.bias_offset = span.weight_end;
        span.bias_end = span.bias_offset + rows;
        span.weight_shape = {rows, cols};
        span.bias_shape = {rows};
        offset = span.bias_end;
        layout.layers.push_back(std::move(span));
    }
    layout.total_params = offset;
    return layout;
}

std::pair<Tensor, Tensor> extract_layer_params(const Tensor& theta_row,
                                               const LstmParamLayout& layout,
                                               std::size_t layer) {
    if (layer >= layout.num_layers) {
        throw ShapeError("extract_layer_params: layer " + std::to_string(layer) +
                         " out of range (num_layers = " + std::to_string(layout.num_layers) + ")");
    }
    if (theta_row.size() != layout.total_params) {
        throw ShapeError("extract_layer_params: parameter row of size " +
                         std::to_string(theta_row.size()) + " does not match layout P = " +
                         std::to_string(layout.total_params));
    }
    const auto& span = layout.layers[layer];
    Tensor w = slice_view(theta_row, span.weight_offset, span.weight_end, span.weight_shape);
    Tensor b = slice_view(theta_row, span.bias_offset, span.bias_end, span.bias_shape);
    return {std::move(w), std::move(b)};
}

} // namespace hyperenergy
