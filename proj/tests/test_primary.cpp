#include "hyperenergy/errors.hpp"
#include "hyperenergy/grad_check.hpp"
#include "hyperenergy/model.hpp"
#include "hyperenergy/primary_network.hpp"
#include "hyperenergy/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace hyperenergy;

namespace {

// Scalar single-cell trace computed with plain arithmetic, independent of the
// tensor engine. Gate order (i, f, g, o).
struct ScalarCellOracle {
    double sigmoid(double x) const { return 1.0 / (1.0 + std::exp(-x)); }
    std::pair<double, double> step(double x, double h, double c, const double w[4][2],
                                   const double b[4]) const {
        const double zi = w[0][0] * x + w[0][1] * h + b[0];
        const double zf = w[1][0] * x + w[1][1] * h + b[1];
        const double zg = w[2][0] * x + w[2][1] * h + b[2];
        const double zo = w[3][0] * x + w[3][1] * h + b[3];
        const double gi = sigmoid(zi);
        const double gf = sigmoid(zf);
        const double gg = std::tanh(zg);
        const double go = sigmoid(zo);
        const double c_next = gf * c + gi * gg;
        const double h_next = go * std::tanh(c_next);
        return {h_next, c_next};
    }
};

ModelConfig toy_config() {
    ModelConfig cfg;
    cfg.input_features = 3;
    cfg.window_length = 6;
    cfg.horizon = 2;
    cfg.hidden_units = 2;
    cfg.num_lstm_layers = 2;
    cfg.num_reference_points = 4;
    cfg.degree = 2;
    cfg.gamma = 2.0;
    cfg.hypernet_hidden = {8, 8};
    cfg.activation = Activation::swish;
    cfg.reference_init = "normal";
    return cfg;
}

Tensor random_windows(std::size_t B, const ModelConfig& cfg, std::uint64_t seed) {
    auto rng = make_rng(seed, "test.windows");
    return Tensor::from_values(
        {B, cfg.window_length, cfg.input_features},
        uniform_draws(rng, B * cfg.window_length * cfg.input_features, 0.0, 1.0));
}

} // namespace

TEST_CASE("all-zero parameters give zero states for any input") {
    std::vector<LstmLayerParams> layers(1);
    layers[0].weight = Tensor::zeros({8, 5}); // u=2, d_in=3
    layers[0].bias = Tensor::zeros({8});
    std::mt19937_64 rng(3);
    Tensor x = Tensor::from_values({2, 4, 3}, uniform_draws(rng, 24, -3.0, 3.0));
    LstmState state = lstm_forward(x, layers);
    for (double v : state.h.values()) CHECK(v == 0.0);
    for (double v : state.c.values()) CHECK(v == 0.0);
}

TEST_CASE("single cell matches the scalar oracle") {
    // u=1, n=1: zero weights except the cell-candidate row, which sees
    // pre-activation 1 from input x=1. Expected: c = 0.5*tanh(1) = 0.3808,
    // h = 0.5*tanh(c) = 0.18168.
    std::vector<LstmLayerParams> layers(1);
    layers[0].weight = Tensor::from_values({4, 2}, {0, 0,    // input gate
                                                    0, 0,    // forget gate
                                                    1, 0,    // cell candidate
                                                    0, 0});  // output gate
    layers[0].bias = Tensor::zeros({4});
    Tensor x = Tensor::from_values({1, 1, 1}, {1.0});
    LstmState state = lstm_forward(x, layers);

    const double w[4][2] = {{0, 0}, {0, 0}, {1, 0}, {0, 0}};
    const double b[4] = {0, 0, 0, 0};
    ScalarCellOracle oracle;
    auto [h_ref, c_ref] = oracle.step(1.0, 0.0, 0.0, w, b);

    CHECK(c_ref == doctest::Approx(0.3807970779778824).epsilon(1e-12));
    CHECK(h_ref == doctest::Approx(0.18169974219452625).epsilon(1e-12));
    CHECK(state.c.values()[0] == doctest::Approx(c_ref).epsilon(1e-14));
    CHECK(state.h.values()[0] == doctest::Approx(h_ref).epsilon(1e-14));
}

TEST_CASE("multi-step recurrence matches the scalar oracle") {
    std::mt19937_64 rng(7);
    auto wv = uniform_draws(rng, 8, -0.8, 0.8);
    auto bv = uniform_draws(rng, 4, -0.3, 0.3);
    auto xs = uniform_draws(rng, 5, -1.0, 1.0);

    std::vector<LstmLayerParams> layers(1);
    layers[0].weight = Tensor::from_values({4, 2}, wv);
    layers[0].bias = Tensor::from_values({4}, bv);
    Tensor x = Tensor::from_values({1, 5, 1}, xs);
    LstmState state = lstm_forward(x, layers);

    double w[4][2];
    double b[4];
    for (int g = 0; g < 4; ++g) {
        w[g][0] = wv[static_cast<std::size_t>(g) * 2];
        w[g][1] = wv[static_cast<std::size_t>(g) * 2 + 1];
        b[g] = bv[static_cast<std::size_t>(g)];
    }
    ScalarCellOracle oracle;
    double h = 0.0, c = 0.0;
    for (double xt : xs) std::tie(h, c) = oracle.step(xt, h, c, w, b);

    CHECK(state.h.values()[0] == doctest::Approx(h).epsilon(1e-13));
    CHECK(state.c.values()[0] == doctest::Approx(c).epsilon(1e-13));
}

TEST_CASE("lstm gradient w.r.t. every weight matches finite differences") {
    std::mt19937_64 rng(11);
    std::vector<LstmLayerParams> layers(2);
    layers[0].weight = Tensor::from_values({8, 5}, uniform_draws(rng, 40, -0.5, 0.5), true);
    layers[0].bias = Tensor::from_values({8}, uniform_draws(rng, 8, -0.2, 0.2), true);
    layers[1].weight = Tensor::from_values({8, 4}, uniform_draws(rng, 32, -0.5, 0.5), true);
    layers[1].bias = Tensor::from_values({8}, uniform_draws(rng, 8, -0.2, 0.2), true);
    Tensor x = Tensor::from_values({2, 4, 3}, uniform_draws(rng, 24, -1.0, 1.0));

    auto f = [&]() {
        LstmState state = lstm_forward(x, layers);
        return sum(state.h);
    };
    std::vector<NamedParam> params = {{"w0", layers[0].weight},
                                      {"b0", layers[0].bias},
                                      {"w1", layers[1].weight},
                                      {"b1", layers[1].bias}};
    auto res = finite_diff_check(f, params, 1e-5);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("lstm rejects inputs that do not match the layout") {
    std::vector<LstmLayerParams> layers(1);
    layers[0].weight = Tensor::zeros({8, 5});
    layers[0].bias = Tensor::zeros({8});
    CHECK_THROWS_AS(lstm_forward(Tensor::zeros({1, 4, 4}), layers), ShapeError);
    CHECK_THROWS_AS(lstm_forward(Tensor::zeros({4, 4}), layers), ShapeError);
}

TEST_CASE("hidden state is bounded by one in magnitude") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<LstmLayerParams> layers(1);
        layers[0].weight = Tensor::from_values({12, 5}, uniform_draws(rng, 60, -4.0, 4.0));
        layers[0].bias = Tensor::from_values({12}, uniform_draws(rng, 12, -2.0, 2.0));
        Tensor x = Tensor::from_values({2, 6, 2}, uniform_draws(rng, 24, -5.0, 5.0));
        LstmState state = lstm_forward(x, layers);
        for (double v : state.h.values()) CHECK(std::fabs(v) <= 1.0);
    }
}

TEST_CASE("output head is a per-row affine map") {
    LstmState state;
    state.h = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
    state.c = Tensor::zeros({2, 3});

    OutputHeadParams head;
    head.weight = Tensor::zeros({4, 3});
    head.bias = Tensor::from_values({4}, {9, 8, 7, 6});
    Tensor out = output_head(state, head);
    REQUIRE(out.shape() == Shape{2, 4});
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(out.values()[r * 4 + c] == head.bias.values()[c]);
        }
    }

    OutputHeadParams eye;
    eye.weight = Tensor::from_values({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
    eye.bias = Tensor::from_values({3}, {0.5, 0.5, 0.5});
    Tensor out2 = output_head(state, eye);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(out2.values()[i] == state.h.values()[i] + 0.5);
    }

    OutputHeadParams bad;
    bad.weight = Tensor::zeros({4, 5});
    bad.bias = Tensor::zeros({4});
    CHECK_THROWS_AS(output_head(state, bad), ShapeError);
}

TEST_CASE("output head gradient matches finite differences") {
    std::mt19937_64 rng(17);
    LstmState state;
    state.h = Tensor::from_values({3, 4}, uniform_draws(rng, 12, -1.0, 1.0));
    state.c = Tensor::zeros({3, 4});
    OutputHeadParams head;
    head.weight = Tensor::from_values({2, 4}, uniform_draws(rng, 8, -1.0, 1.0), true);
    head.bias = Tensor::from_values({2}, uniform_draws(rng, 2, -1.0, 1.0), true);
    auto f = [&]() { return mean(output_head(state, head)); };
    std::vector<NamedParam> params = {{"w", head.weight}, {"b", head.bias}};
    auto res = finite_diff_check(f, params, 1e-5);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("untrained full model yields finite outputs") {
    ModelConfig cfg = toy_config();
    for (ModelVariant v : all_variants()) {
        auto model = build_variant(v, cfg, 5);
        Tensor pred = model->forward(random_windows(3, cfg, 19));
        REQUIRE(pred.shape() == Shape{3, cfg.horizon});
        for (double p : pred.values()) CHECK(std::isfinite(p));
    }
}

TEST_CASE("identical windows in a batch produce identical prediction rows") {
    ModelConfig cfg = toy_config();
    auto model = build_variant(ModelVariant::hyperenergy_full, cfg, 23);
    Tensor one = random_windows(1, cfg, 29);
    std::vector<double> doubled(one.values().begin(), one.values().end());
    doubled.insert(doubled.end(), one.values().begin(), one.values().end());
    Tensor two = Tensor::from_values({2, cfg.window_length, cfg.input_features}, doubled);
    Tensor pred = model->forward(two);
    for (std::size_t c = 0; c < cfg.horizon; ++c) {
        CHECK(pred.values()[c] == pred.values()[cfg.horizon + c]);
    }
}

TEST_CASE("forward pass is pure") {
    ModelConfig cfg = toy_config();
    auto model = build_variant(ModelVariant::hyperenergy_full, cfg, 31);
    Tensor windows = random_windows(2, cfg, 37);
    Tensor p1 = model->forward(windows);
    Tensor p2 = model->forward(windows);
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1.values()[i] == p2.values()[i]);
}

TEST_CASE("no trainable leaf carries an LSTM gate shape") {
    ModelConfig cfg = toy_config();
    cfg.hidden_units = 3;         // gate shapes [12 x (d_in+3)] and [12]
    cfg.hypernet_hidden = {8, 8}; // no width collision with 4u = 12
    auto model = build_variant(ModelVariant::hyperenergy_full, cfg, 41);
    const std::size_t u = cfg.hidden_units;
    for (const NamedParam& p : model->trainable_params()) {
        const Shape& s = p.tensor.shape();
        const bool gate_matrix = s.size() == 2 && s[0] == 4 * u &&
                                 (s[1] == cfg.input_features + u || s[1] == 2 * u);
        const bool gate_bias = s.size() == 1 && s[0] == 4 * u;
        CHECK_FALSE(gate_matrix);
        CHECK_FALSE(gate_bias);
    }
    // exactly the kernel, hypernet and head groups
    for (const NamedParam& p : model->trainable_params()) {
        const bool known = p.name.rfind("kernel.", 0) == 0 ||
                           p.name.rfind("hypernet.", 0) == 0 ||
                           p.name.rfind("head.", 0) == 0;
        CHECK(known);
    }

    // the plain LSTM is the one variant whose leaves are gate-shaped
    auto plain = build_variant(ModelVariant::plain_lstm, cfg, 41);
    bool found_gate = false;
    for (const NamedParam& p : plain->trainable_params()) {
        const Shape& s = p.tensor.shape();
        if (s.size() == 2 && s[0] == 4 * u) found_gate = true;
    }
    CHECK(found_gate);
}

TEST_CASE("full pipeline gradients match finite differences on the toy model") {
    ModelConfig cfg = toy_config();
    // Undamped output layer: damping leaves gradient components below the
    // 1e-8 relative-error floor, where finite-difference truncation noise
    // dominates the comparison.
    cfg.theta_init_scale = 1.0;
    auto model = build_variant(ModelVariant::hyperenergy_full, cfg, 43);
    Tensor windows = random_windows(2, cfg, 47);
    Tensor target = Tensor::from_values({2, cfg.horizon}, {0.3, 0.6, 0.2, 0.9});

    auto f = [&]() {
        Tensor pred = model->forward(windows);
        Tensor residual = sub(pred, target);
        return mean(mul(residual, residual));
    };
    auto res = finite_diff_check(f, model->trainable_params(), 1e-5);
    CHECK_MESSAGE(res.max_rel_err < 1e-4, "worst param: ", res.worst_param);
}

TEST_CASE("theta batch mean shares one parameter set across the batch") {
    ModelConfig cfg = toy_config();
    cfg.theta_batch_mean = true;
    auto model = build_variant(ModelVariant::hyperenergy_full, cfg, 53);
    Tensor windows = random_windows(3, cfg, 59);
    auto* hyper = dynamic_cast<HyperEnergyModel*>(model.get());
    REQUIRE(hyper != nullptr);
    Tensor pred = model->forward(windows);
    CHECK(pred.shape() == Shape{3, cfg.horizon});
    for (double p : pred.values()) CHECK(std::isfinite(p));
}
