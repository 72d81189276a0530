#include "hyperenergy/model.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/rng.hpp"

#include <cmath>

namespace hyperenergy {

std::string variant_name(ModelVariant v) {
    switch (v) {
        case ModelVariant::hyperenergy_full: return "hyperenergy_full";
        case ModelVariant::hyperenergy_no_kernel: return "hyperenergy_no_kernel";
        case ModelVariant::hyperenergy_traditional_rbf: return "hyperenergy_traditional_rbf";
        case ModelVariant::hyperenergy_learnable_rbf: return "hyperenergy_learnable_rbf";
        case ModelVariant::hyperenergy_traditional_poly: return "hyperenergy_traditional_poly";
        case ModelVariant::hyperenergy_learnable_poly: return "hyperenergy_learnable_poly";
        case ModelVariant::hyperenergy_traditional_combined: return "hyperenergy_traditional_combined";
        case ModelVariant::plain_lstm: return "plain_lstm";
        case ModelVariant::mlp_baseline: return "mlp_baseline";
    }
    return "hyperenergy_full";
}

ModelVariant variant_from_name(const std::string& name) {
    for (ModelVariant v : all_variants()) {
        if (variant_name(v) == name) return v;
    }
    throw ConfigError("unknown model variant '" + name + "'");
}

const std::vector<ModelVariant>& all_variants() {
    static const std::vector<ModelVariant> variants = {
        ModelVariant::hyperenergy_full,
        ModelVariant::hyperenergy_no_kernel,
        ModelVariant::hyperenergy_traditional_rbf,
        ModelVariant::hyperenergy_learnable_rbf,
        ModelVariant::hyperenergy_traditional_poly,
        ModelVariant::hyperenergy_learnable_poly,
        ModelVariant::hyperenergy_traditional_combined,
        ModelVariant::plain_lstm,
        ModelVariant::mlp_baseline,
    };
    return variants;
}

// ---- ForecastModel ------------------------------------------------------------

std::vector<std::vector<double>> ForecastModel::snapshot() const {
    std::vector<std::vector<double>> snap;
    for (const NamedParam& p : state_tensors()) {
        auto v = p.tensor.values();
        snap.emplace_back(v.begin(), v.end());
    }
    return snap;
}

void ForecastModel::restore(const std::vector<std::vector<double>>& snap) {
    auto states = state_tensors();
    if (snap.size() != states.size()) {
        throw ShapeError("model restore: snapshot tensor count mismatch");
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        auto dst = states[i].tensor.values();
        if (snap[i].size() != dst.size()) {
            throw ShapeError("model restore: size mismatch on '" + states[i].name + "'");
        }
        std::copy(snap[i].begin(), snap[i].end(), dst.begin());
    }
}

// ---- HyperEnergyModel ----------------------------------------------------------

HyperEnergyModel::HyperEnergyModel(ModelVariant variant_tag, const ModelConfig& cfg,
                                   std::optional<KernelParams> kernel,
                                   HyperNetParams hypernet, OutputHeadParams head,
                                   LstmParamLayout layout)
    : variant_(variant_tag),
      config_(cfg),
      kernel_(std::move(kernel)),
      hypernet_(std::move(hypernet)),
      head_(std::move(head)),
      layout_(std::move(layout)) {
    if (hypernet_.output_dim != layout_.total_params) {
        throw ShapeError("hypernetwork output width " + std::to_string(hypernet_.output_dim) +
                         " does not match primary parameter count P = " +
                         std::to_string(layout_.total_params));
    }
    const std::size_t expected_in =
        kernel_ ? kernel_->num_reference_points()
                : cfg.input_features * cfg.window_length;
    if (hypernet_.input_dim != expected_in) {
        throw ShapeError("hypernetwork input width " + std::to_string(hypernet_.input_dim) +
                         " does not match feature width " + std::to_string(expected_in));
    }
}

Tensor HyperEnergyModel::generate_theta(const Tensor& windows) {
    const std::size_t B = windows.dim(0);
    const std::size_t flat = config_.window_length * config_.input_features;
    Tensor x_flat = reshape(windows, {B, flat});
    Tensor features = kernel_ ? adaptive_kernel_forward(x_flat, *kernel_) : x_flat;
    return hypernet_forward(features, hypernet_);
}

Tensor HyperEnergyModel::forward(const Tensor& windows) {
    if (windows.rank() != 3 || windows.dim(1) != config_.window_length ||
        windows.dim(2) != config_.input_features) {
        throw ShapeError("model forward: windows " + shape_str(windows.shape()) +
                         " do not match [B x " + std::to_string(config_.window_length) +
                         " x " + std::to_string(config_.input_features) + "]");
    }
    const std::size_t B = windows.dim(0);
    const std::size_t P = layout_.total_params;
    Tensor theta = generate_theta(windows); // [B x P]

    std::vector<std::vector<LstmLayerParams>> per_sample(B);
    if (config_.theta_batch_mean) {
        Tensor theta_row = (B == 1) ? reshape(theta, {P}) : mean(theta, 0);
        std::vector<LstmLayerParams> shared;
        for (std::size_t l = 0; l < layout_.num_layers; ++l) {
            auto [w, b] = extract_layer_params(theta_row, layout_, l);
            shared.push_back({std::move(w), std::move(b)});
        }
        for (std::size_t s = 0; s < B; ++s) per_sample[s] = shared;
    } else {
        for (std::size_t s = 0; s < B; ++s) {
            Tensor theta_row = slice_view(theta, s * P, (s + 1) * P, {P});
            for (std::size_t l = 0; l < layout_.num_layers; ++l) {
                auto [w, b] = extract_layer_params(theta_row, layout_, l);
                per_sample[s].push_back({std::move(w), std::move(b)});
            }
        }
    }
    LstmState state = lstm_forward_per_sample(windows, per_sample);
    return output_head(state, head_);
}

std::vector<NamedParam> HyperEnergyModel::trainable_params() const {
    std::vector<NamedParam> out;
    for (const NamedParam& p : state_tensors()) {
        if (p.tensor.requires_grad()) out.push_back(p);
    }
    return out;
}

std::vector<NamedParam> HyperEnergyModel::state_tensors() const {
    std::vector<NamedParam> out;
    if (kernel_) {
        out.push_back({"kernel.reference_points", kernel_->reference_points});
        out.push_back({"kernel.alpha", kernel_->alpha});
        out.push_back({"kernel.c", kernel_->c});
        out.push_back({"kernel.lambda_logit", kernel_->lambda_logit});
    }
    for (NamedParam& p : hypernet_.named_params("hypernet")) out.push_back(std::move(p));
    out.push_back({"head.weight", head_.weight});
    out.push_back({"head.bias", head_.bias});
    return out;
}

// ---- PlainLstmModel -------------------------------------------------------------

PlainLstmModel::PlainLstmModel(const ModelConfig& cfg, std::vector<LstmLayerParams> layers,
                               OutputHeadParams head)
    : config_(cfg), layers_(std::move(layers)), head_(std::move(head)) {}

Tensor PlainLstmModel::forward(const Tensor& windows) {
    LstmState state = lstm_forward(windows, layers_);
    return output_head(state, head_);
}

std::vector<NamedParam> PlainLstmModel::trainable_params() const { return state_tensors(); }

std::vector<NamedParam> PlainLstmModel::state_tensors() const {
    std::vector<NamedParam> out;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        out.push_back({"lstm.layer" + std::to_string(l) + ".weight", layers_[l].weight});
        out.push_back({"lstm.layer" + std::to_string(l) + ".bias", layers_[l].bias});
    }
    out.push_back({"head.weight", head_.weight});
    out.push_back({"head.bias", head_.bias});
    return out;
}

// ---- MlpModel ---------------------------------------------------------------------

MlpModel::MlpModel(const ModelConfig& cfg, std::vector<HyperNetParams::Layer> layers)
    : config_(cfg), layers_(std::move(layers)) {}

Tensor MlpModel::forward(const Tensor& windows) {
    const std::size_t B = windows.dim(0);
    Tensor h = reshape(windows, {B, config_.window_length * config_.input_features});
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        h = affine(h, layers_[i].weight, layers_[i].bias);
        if (i + 1 < layers_.size()) h = apply_activation(h, config_.activation);
    }
    return h;
}

std::vector<NamedParam> MlpModel::trainable_params() const { return state_tensors(); }

std::vector<NamedParam> MlpModel::state_tensors() const {
    std::vector<NamedParam> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        out.push_back({"mlp.layer" + std::to_string(i) + ".weight", layers_[i].weight});
        out.push_back({"mlp.layer" + std::to_string(i) + ".bias", layers_[i].bias});
    }
    return out;
}

// ---- construction --------------------------------------------------------------------

namespace {

Tensor xavier_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    return Tensor::from_values({rows, cols}, uniform_draws(rng, rows * cols, -bound, bound),
                               true);
}

OutputHeadParams make_head(const ModelConfig& cfg, std::uint64_t seed) {
    auto rng = make_rng(seed, "head");
    OutputHeadParams head;
    head.weight = xavier_matrix(cfg.horizon, cfg.hidden_units, rng);
    head.bias = Tensor::zeros({cfg.horizon}, true);
    return head;
}

Tensor draw_reference_points(const ModelConfig& cfg, KernelMode mode, std::uint64_t seed,
                             const Tensor* source) {
    const std::size_t width = cfg.input_features * cfg.window_length;
    bool from_data = cfg.reference_init == "data";
    if (cfg.reference_init == "auto") {
        from_data = kernel_mode_is_traditional(mode) || mode == KernelMode::learnable_rbf_only;
    }
    if (from_data && source != nullptr) {
        if (source->size() % width != 0) {
            throw ShapeError("reference source size is not a multiple of the window width");
        }
        const std::size_t pool = source->size() / width;
        if (pool == 0) throw ShapeError("reference source holds no windows");
        auto rng = make_rng(seed, "kernel.reference_draw");
        std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
        std::vector<double> values;
        values.reserve(cfg.num_reference_points * width);
        auto src = source->values();
        for (std::size_t j = 0; j < cfg.num_reference_points; ++j) {
            const std::size_t row = pick(rng);
            values.insert(values.end(), src.begin() + static_cast<std::ptrdiff_t>(row * width),
                          src.begin() + static_cast<std::ptrdiff_t>((row + 1) * width));
        }
        return Tensor::from_values({cfg.num_reference_points, width}, std::move(values), true);
    }
    return init_reference_points(cfg.num_reference_points, cfg.input_features,
                                 cfg.window_length, derive_seed(seed, "kernel.init"));
}

/// Root-mean-square of the kernel features over a probe batch of training
/// windows. Polynomial features on raw-scale reference points can sit two to
/// three orders of magnitude above unit scale; the first hypernet layer's
/// init is divided by this so its pre-activations start near unit scale.
double probe_feature_rms(const KernelParams& kernel, const Tensor& source,
                         std::size_t width) {
    NoGradGuard guard;
    const std::size_t pool = source.size() / width;
    const std::size_t rows = std::min<std::size_t>(pool, 256);
    std::vector<double> values(source.values().begin(),
                               source.values().begin() +
                                   static_cast<std::ptrdiff_t>(rows * width));
    Tensor probe = Tensor::from_values({rows, width}, std::move(values));
    Tensor features = adaptive_kernel_forward(probe, kernel);
    double acc = 0.0;
    for (double f : features.values()) acc += f * f;
    return std::sqrt(acc / static_cast<double>(features.size()));
}

void damp_theta_output(HyperNetParams& hypernet, const ModelConfig& cfg) {
    if (cfg.theta_init_scale == 1.0) return;
    auto w = hypernet.layers.back().weight.values();
    for (double& x : w) x *= cfg.theta_init_scale;
}

std::unique_ptr<ForecastModel> make_hyper_variant(ModelVariant v, KernelMode mode,
                                                  const ModelConfig& cfg, std::uint64_t seed,
                                                  const Tensor* source) {
    LstmParamLayout layout =
        build_layout(cfg.hidden_units, cfg.input_features, cfg.num_lstm_layers);
    KernelParams kernel = make_kernel_params(draw_reference_points(cfg, mode, seed, source),
                                             cfg.degree, cfg.gamma, mode);
    HyperNetParams hypernet =
        hypernet_init(cfg.hypernet_hidden, cfg.num_reference_points, layout.total_params,
                      cfg.activation, derive_seed(seed, "hypernet"));
    damp_theta_output(hypernet, cfg);
    if (source != nullptr) {
        const double rms =
            probe_feature_rms(kernel, *source, cfg.input_features * cfg.window_length);
        if (rms > 1.0) {
            auto w0 = hypernet.layers[0].weight.values();
            for (double& x : w0) x /= rms;
        }
    }
    return std::make_unique<HyperEnergyModel>(v, cfg, std::move(kernel), std::move(hypernet),
                                              make_head(cfg, seed), std::move(layout));
}

} // namespace

std::unique_ptr<ForecastModel> build_variant(ModelVariant v, const ModelConfig& cfg,
                                             std::uint64_t seed,
                                             const Tensor* reference_source) {
    switch (v) {
        case ModelVariant::hyperenergy_full:
            return make_hyper_variant(v, KernelMode::learnable, cfg, seed, reference_source);
        case ModelVariant::hyperenergy_traditional_rbf:
            return make_hyper_variant(v, KernelMode::traditional_rbf, cfg, seed, reference_source);
        case ModelVariant::hyperenergy_learnable_rbf:
            return make_hyper_variant(v, KernelMode::learnable_rbf_only, cfg, seed,
                                      reference_source);
        case ModelVariant::hyperenergy_traditional_poly:
            return make_hyper_variant(v, KernelMode::traditional_poly, cfg, seed,
                                      reference_source);
        case ModelVariant::hyperenergy_learnable_poly:
            return make_hyper_variant(v, KernelMode::learnable_poly_only, cfg, seed,
                                      reference_source);
        case ModelVariant::hyperenergy_traditional_combined:
            return make_hyper_variant(v, KernelMode::traditional_combined, cfg, seed,
                                      reference_source);
        case ModelVariant::hyperenergy_no_kernel: {
            LstmParamLayout layout =
                build_layout(cfg.hidden_units, cfg.input_features, cfg.num_lstm_layers);
            HyperNetParams hypernet = hypernet_init(
                cfg.hypernet_hidden, cfg.input_features * cfg.window_length,
                layout.total_params, cfg.activation, derive_seed(seed, "hypernet"));
            damp_theta_output(hypernet, cfg);
            return std::make_unique<HyperEnergyModel>(v, cfg, std::nullopt, std::move(hypernet),
                                                      make_head(cfg, seed), std::move(layout));
        }
        case ModelVariant::plain_lstm: {
            std::vector<LstmLayerParams> layers;
            const std::size_t u = cfg.hidden_units;
            for (std::size_t l = 0; l < cfg.num_lstm_layers; ++l) {
                const std::size_t d_in = (l == 0) ? cfg.input_features : u;
                auto rng = make_rng(seed, "lstm.layer", l);
                LstmLayerParams layer;
                layer.weight = xavier_matrix(4 * u, d_in + u, rng);
                layer.bias = Tensor::zeros({4 * u}, true);
                layers.push_back(std::move(layer));
            }
            return std::make_unique<PlainLstmModel>(cfg, std::move(layers),
                                                    make_head(cfg, seed));
        }
        case ModelVariant::mlp_baseline: {
            const std::size_t in = cfg.input_features * cfg.window_length;
            const std::size_t m = cfg.mlp_hidden;
            std::vector<std::size_t> widths = {in, m, m, cfg.horizon};
            std::vector<HyperNetParams::Layer> layers;
            for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
                auto rng = make_rng(seed, "mlp.layer", i);
                HyperNetParams::Layer layer;
                layer.weight = xavier_matrix(widths[i + 1], widths[i], rng);
                layer.bias = Tensor::zeros({widths[i + 1]}, true);
                layers.push_back(std::move(layer));
            }
            return std::make_unique<MlpModel>(cfg, std::move(layers));
        }
    }
    throw ConfigError("unknown model variant");
}

Tensor hyperenergy_forward(const Tensor& windows, ForecastModel& model) {
    return model.forward(windows);
}

} // namespace hyperenergy
