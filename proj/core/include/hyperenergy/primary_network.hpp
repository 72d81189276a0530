#pragma once

#include "hyperenergy/tensor.hpp"

#include <span>
#include <vector>

namespace hyperenergy {

/// One LSTM layer's gate-stacked parameters: weight [4u x (d_in + u)],
/// bias [4u]; gate rows ordered (input, forget, cell, output).
struct LstmLayerParams {
    Tensor weight;
    Tensor bias;
};

/// Final hidden and cell state of the last layer, one row per batch sample.
struct LstmState {
    Tensor h; // [B x u]
    Tensor c; // [B x u]
};

/// Directly trainable output layer mapping the final hidden state to the
/// forecast vector.
struct OutputHeadParams {
    Tensor weight; // [horizon x u]
    Tensor bias;   // [horizon]
};

/// Standard stacked LSTM recurrence with externally supplied parameters,
/// shared across the batch. x_seq: [B x n x k]. States start at zero.
LstmState lstm_forward(const Tensor& x_seq, std::span<const LstmLayerParams> layers);

/// Same recurrence, but batch row i runs with params[i] (one parameter set
/// per sample, as produced by a per-sample generated parameter vector).
LstmState lstm_forward_per_sample(const Tensor& x_seq,
                                  const std::vector<std::vector<LstmLayerParams>>& params);

/// y = W_out * h_t + b_out per row; linear, no activation.
Tensor output_head(const LstmState& state, const OutputHeadParams& head);

} // namespace hyperenergy
