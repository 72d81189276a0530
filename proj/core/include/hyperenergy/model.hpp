#pragma once

#include "hyperenergy/grad_check.hpp"
#include "hyperenergy/hypernet.hpp"
#include "hyperenergy/kernel.hpp"
#include "hyperenergy/lstm_layout.hpp"
#include "hyperenergy/primary_network.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace hyperenergy {

enum class ModelVariant {
    hyperenergy_full,
    hyperenergy_no_kernel,
    hyperenergy_traditional_rbf,
    hyperenergy_learnable_rbf,
    hyperenergy_traditional_poly,
    hyperenergy_learnable_poly,
    hyperenergy_traditional_combined,
    plain_lstm,
    mlp_baseline,
};

std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);
const std::vector<ModelVariant>& all_variants();

/// Structural hyperparameters shared by every variant.
struct ModelConfig {
    std::size_t input_features = 5;  // k
    std::size_t window_length = 24;  // n
    std::size_t horizon = 24;        // h
    std::size_t hidden_units = 32;   // u
    std::size_t num_lstm_layers = 2;
    std::size_t num_reference_points = 64; // N_r
    int degree = 2;                        // polynomial degree d
    double gamma = 2.0;                    // RBF coefficient
    std::vector<std::size_t> hypernet_hidden = {64, 64};
    Activation activation = Activation::swish;
    bool theta_batch_mean = false;
    // Damping applied to the final hypernet layer's Xavier weights at model
    // construction, so generated LSTM parameters start near neutral instead
    // of deep inside gate saturation.
    double theta_init_scale = 0.05;
    // Reference point initialization policy:
    //   "auto"   - traditional and RBF-only modes draw from training windows
    //              (keeps RBF distances on the data scale); other modes use
    //              the standard normal draw (keeps polynomial dot products
    //              zero-mean).
    //   "data"   - always draw from training windows when a source is given.
    //   "normal" - always standard normal.
    std::string reference_init = "auto";
    std::size_t mlp_hidden = 64;
};

/// Common surface for training and evaluation across all variants.
class ForecastModel {
public:
    virtual ~ForecastModel() = default;

    /// windows: [B x n x k] -> predictions [B x horizon], differentiable
    /// down to every trainable leaf.
    virtual Tensor forward(const Tensor& windows) = 0;

    /// The leaves the optimizer updates. Frozen tensors are excluded.
    virtual std::vector<NamedParam> trainable_params() const = 0;

    /// Every persistent tensor, frozen ones included; defines the
    /// serialized state and the snapshot/restore granularity.
    virtual std::vector<NamedParam> state_tensors() const = 0;

    virtual ModelVariant variant() const = 0;
    virtual const ModelConfig& config() const = 0;

    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snap);
};

/// Kernelized hypernetwork + generated LSTM + trainable head. Also covers
/// the no-kernel ablation (hypernetwork consumes the flattened window).
class HyperEnergyModel final : public ForecastModel {
public:
    HyperEnergyModel(ModelVariant variant_tag, const ModelConfig& cfg,
                     std::optional<KernelParams> kernel, HyperNetParams hypernet,
                     OutputHeadParams head, LstmParamLayout layout);

    Tensor forward(const Tensor& windows) override;
    std::vector<NamedParam> trainable_params() const override;
    std::vector<NamedParam> state_tensors() const override;
    ModelVariant variant() const override { return variant_; }
    const ModelConfig& config() const override { return config_; }

    const LstmParamLayout& layout() const { return layout_; }
    bool has_kernel() const { return kernel_.has_value(); }
    const KernelParams& kernel() const { return *kernel_; }
    KernelParams& kernel() { return *kernel_; }
    const HyperNetParams& hypernet() const { return hypernet_; }
    const OutputHeadParams& head() const { return head_; }

    /// Generated parameter rows for a batch of windows, [B x P].
    Tensor generate_theta(const Tensor& windows);

private:
    ModelVariant variant_;
    ModelConfig config_;
    std::optional<KernelParams> kernel_;
    HyperNetParams hypernet_;
    OutputHeadParams head_;
    LstmParamLayout layout_;
};

/// Ordinary LSTM whose weights are their own trainable leaves; the baseline
/// the hypernetwork variants are compared against.
class PlainLstmModel final : public ForecastModel {
public:
    PlainLstmModel(const ModelConfig& cfg, std::vector<LstmLayerParams> layers,
                   OutputHeadParams head);

    Tensor forward(const Tensor& windows) override;
    std::vector<NamedParam> trainable_params() const override;
    std::vector<NamedParam> state_tensors() const override;
    ModelVariant variant() const override { return ModelVariant::plain_lstm; }
    const ModelConfig& config() const override { return config_; }

private:
    ModelConfig config_;
    std::vector<LstmLayerParams> layers_;
    OutputHeadParams head_;
};

/// Three fully connected layers on the flattened window.
class MlpModel final : public ForecastModel {
public:
    MlpModel(const ModelConfig& cfg, std::vector<HyperNetParams::Layer> layers);

    Tensor forward(const Tensor& windows) override;
    std::vector<NamedParam> trainable_params() const override;
    std::vector<NamedParam> state_tensors() const override;
    ModelVariant variant() const override { return ModelVariant::mlp_baseline; }
    const ModelConfig& config() const override { return config_; }

private:
    ModelConfig config_;
    std::vector<HyperNetParams::Layer> layers_;
};

/// Constructs a model variant. reference_source, when given, is a pool of
/// flattened training windows ([M x n*k] or [M x n x k]) from which kernel
/// reference points are drawn when the config asks for data-based
/// initialization; traditional kernel modes freeze that draw.
std::unique_ptr<ForecastModel> build_variant(ModelVariant v, const ModelConfig& cfg,
                                             std::uint64_t seed,
                                             const Tensor* reference_source = nullptr);

/// Full pipeline forward pass, usable with any variant.
Tensor hyperenergy_forward(const Tensor& windows, ForecastModel& model);

} // namespace hyperenergy
