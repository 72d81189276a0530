#include "hyperenergy/primary_network.hpp"

#include "hyperenergy/errors.hpp"

#include <array>
#include <functional>
#include <utility>

namespace hyperenergy {

namespace {

void check_layer_shapes(std::span<const LstmLayerParams> layers, std::size_t k) {
    if (layers.empty()) throw ShapeError("lstm_forward: no layer parameters given");
    std::size_t prev_u = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Tensor& w = layers[l].weight;
        const Tensor& b = layers[l].bias;
        if (w.rank() != 2 || w.dim(0) % 4 != 0) {
            throw ShapeError("lstm_forward: layer weight must be [4u x (d_in+u)], got " +
                             shape_str(w.shape()));
        }
        const std::size_t u = w.dim(0) / 4;
        const std::size_t d_in = (l == 0) ? k : prev_u;
        if (w.dim(1) != d_in + u) {
            throw ShapeError("lstm_forward: layer " + std::to_string(l) + " weight " +
                             shape_str(w.shape()) + " does not match input width " +
                             std::to_string(d_in) + " + " + std::to_string(u));
        }
        if (b.size() != 4 * u) {
            throw ShapeError("lstm_forward: layer " + std::to_string(l) + " bias " +
                             shape_str(b.shape()) + " must have 4u = " + std::to_string(4 * u) +
                             " entries");
        }
        prev_u = u;
    }
}

/// Recurrence for one sample; x_t tensors are [d_in x 1] columns. Returns the
/// last layer's final (h, c) as [u x 1] columns.
std::pair<Tensor, Tensor> lstm_sample(std::vector<Tensor> step_inputs,
                                      std::span<const LstmLayerParams> layers) {
    const std::size_t n = step_inputs.size();
    Tensor h, c;
    for (const LstmLayerParams& layer : layers) {
        const std::size_t u = layer.weight.dim(0) / 4;
        h = Tensor::zeros({u, 1});
        c = Tensor::zeros({u, 1});
        Tensor bias_col = reshape(layer.bias, {4 * u, 1});
        std::vector<Tensor> next_inputs;
        next_inputs.reserve(n);
        for (std::size_t t = 0; t < n; ++t) {
            std::array<Tensor, 2> parts{step_inputs[t], h};
            Tensor xh = concat_rows(parts);
            Tensor z = add(matmul(layer.weight, xh), bias_col);
            Tensor gi = sigmoid(slice_view(z, 0, u, {u, 1}));
            Tensor gf = sigmoid(slice_view(z, u, 2 * u, {u, 1}));
            Tensor gg = tanh(slice_view(z, 2 * u, 3 * u, {u, 1}));
            Tensor go = sigmoid(slice_view(z, 3 * u, 4 * u, {u, 1}));
            c = add(mul(gf, c), mul(gi, gg));
            h = mul(go, tanh(c));
            next_inputs.push_back(h);
        }
        step_inputs = std::move(next_inputs);
    }
    return {h, c};
}

LstmState run_batch(const Tensor& x_seq,
                    const std::function<std::span<const LstmLayerParams>(std::size_t)>& params_for) {
    if (x_seq.rank() != 3) {
        throw ShapeError("lstm_forward: input must be [B x n x k], got " +
                         shape_str(x_seq.shape()));
    }
    const std::size_t B = x_seq.dim(0), n = x_seq.dim(1), k = x_seq.dim(2);
    std::vector<Tensor> h_rows, c_rows;
    h_rows.reserve(B);
    c_rows.reserve(B);
    for (std::size_t s = 0; s < B; ++s) {
        auto layers = params_for(s);
        check_layer_shapes(layers, k);
        const std::size_t base = s * n * k;
        std::vector<Tensor> steps;
        steps.reserve(n);
        for (std::size_t t = 0; t < n; ++t) {
            steps.push_back(slice_view(x_seq, base + t * k, base + (t + 1) * k, {k, 1}));
        }
        auto [h, c] = lstm_sample(std::move(steps), layers);
        const std::size_t u = h.dim(0);
        h_rows.push_back(reshape(h, {1, u}));
        c_rows.push_back(reshape(c, {1, u}));
    }
    return {concat_rows(h_rows), concat_rows(c_rows)};
}

} // namespace

LstmState lstm_forward(const Tensor& x_seq, std::span<const LstmLayerParams> layers) {
    return run_batch(x_seq, [&](std::size_t) { return layers; });
}

LstmState lstm_forward_per_sample(const Tensor& x_seq,
                                  const std::vector<std::vector<LstmLayerParams>>& params) {
    if (x_seq.rank() == 3 && params.size() != x_seq.dim(0)) {
        throw ShapeError("lstm_forward_per_sample: " + std::to_string(params.size()) +
                         " parameter sets for batch of " + std::to_string(x_seq.dim(0)));
    }
    return run_batch(x_seq, [&](std::size_t s) {
        return std::span<const LstmLayerParams>(params[s]);
    });
}

Tensor output_head(const LstmState& state, const OutputHeadParams& head) {
    if (state.h.rank() != 2 || head.weight.rank() != 2 ||
        state.h.dim(1) != head.weight.dim(1)) {
        throw ShapeError("output_head: hidden state " + shape_str(state.h.shape()) +
                         " does not match head weight " + shape_str(head.weight.shape()));
    }
    return affine(state.h, head.weight, head.bias);
}

} // namespace hyperenergy
