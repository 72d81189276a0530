#include "hyperenergy/errors.hpp"
#include "hyperenergy/grad_check.hpp"
#include "hyperenergy/kernel.hpp"
#include "hyperenergy/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace hyperenergy;

namespace {

KernelParams simple_params(Tensor refs, int degree = 2, double gamma = 2.0,
                           KernelMode mode = KernelMode::learnable) {
    return make_kernel_params(std::move(refs), degree, gamma, mode);
}

} // namespace

TEST_CASE("reference point initialization shape and determinism") {
    Tensor r = init_reference_points(64, 5, 24, 7);
    CHECK(r.shape() == Shape{64, 120});
    CHECK(r.requires_grad());

    Tensor r2 = init_reference_points(64, 5, 24, 7);
    auto a = r.values();
    auto b = r2.values();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    CHECK_THROWS_AS(init_reference_points(0, 5, 24, 7), ShapeError);
    CHECK_THROWS_AS(init_reference_points(4, 0, 24, 7), ShapeError);
}

TEST_CASE("reference point draws look standard normal") {
    // Monte Carlo: the mean of 64*120 standard normal draws has sd
    // sqrt(1/7680) ~ 0.0114, so |mean| < 0.1 is an 8.7-sigma bound. Checking
    // many seeds also guards against a systematically biased generator.
    int inside = 0;
    double var_acc = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Tensor r = init_reference_points(64, 5, 24, seed);
        double mean = 0.0;
        for (double v : r.values()) mean += v;
        mean /= static_cast<double>(r.size());
        if (std::fabs(mean) < 0.1) ++inside;
        double var = 0.0;
        for (double v : r.values()) var += (v - mean) * (v - mean);
        var_acc += var / static_cast<double>(r.size() - 1);
    }
    CHECK(inside == 1000);
    CHECK(var_acc / 1000.0 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("polynomial kernel direct values") {
    // x=[1,0], r=[1,0], alpha=1, c=1, d=2 -> (1*1 + 1)^2 = 4
    Tensor refs = Tensor::from_values({1, 2}, {1, 0});
    KernelParams p = simple_params(refs, 2);
    Tensor x = Tensor::from_values({1, 2}, {1, 0});
    CHECK(poly_kernel(x, p).item() == 4.0);

    // zero input, c=0, d=3 -> 0
    KernelParams p3 = simple_params(Tensor::from_values({1, 2}, {0.3, -0.7}), 3);
    p3.c.values()[0] = 0.0;
    Tensor zero = Tensor::zeros({1, 2});
    CHECK(poly_kernel(zero, p3).item() == 0.0);
}

TEST_CASE("polynomial kernel rejects width mismatch") {
    KernelParams p = simple_params(Tensor::zeros({2, 3}));
    Tensor x = Tensor::zeros({1, 4});
    CHECK_THROWS_AS(poly_kernel(x, p), ShapeError);
    CHECK_THROWS_AS(rbf_kernel(x, p), ShapeError);
}

TEST_CASE("polynomial kernel gradients match finite differences") {
    std::mt19937_64 rng(11);
    Tensor refs = Tensor::from_values({3, 4}, normal_draws(rng, 12), true);
    KernelParams p = simple_params(refs, 3);
    Tensor x = Tensor::from_values({2, 4}, uniform_draws(rng, 8, -1.0, 1.0));
    Tensor weights = Tensor::from_values({2, 3}, uniform_draws(rng, 6, -1.0, 1.0));

    auto f = [&]() { return sum(mul(poly_kernel(x, p), weights)); };
    std::vector<NamedParam> params = {{"alpha", p.alpha},
                                      {"c", p.c},
                                      {"reference_points", p.reference_points}};
    auto res = finite_diff_check(f, params, 1e-5);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("rbf kernel direct values") {
    Tensor refs = Tensor::from_values({1, 2}, {0.4, -0.2});
    KernelParams p = simple_params(refs, 2, 3.5);
    Tensor x_same = Tensor::from_values({1, 2}, {0.4, -0.2});
    CHECK(rbf_kernel(x_same, p).item() == 1.0); // zero distance

    // x=[1,0], r=[0,0], gamma=2 -> exp(-2)
    KernelParams p2 = simple_params(Tensor::zeros({1, 2}), 2, 2.0);
    Tensor x = Tensor::from_values({1, 2}, {1, 0});
    CHECK(rbf_kernel(x, p2).item() == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("rbf kernel output strictly decreases with distance and stays in (0,1]") {
    KernelParams p = simple_params(Tensor::zeros({1, 3}), 2, 1.7);
    double prev = 2.0;
    for (int step = 0; step < 12; ++step) {
        const double d = 0.25 * static_cast<double>(step);
        Tensor x = Tensor::from_values({1, 3}, {d, 0, 0});
        const double v = rbf_kernel(x, p).item();
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("rbf gradients match finite differences") {
    std::mt19937_64 rng(5);
    Tensor refs = Tensor::from_values({4, 3}, normal_draws(rng, 12), true);
    Tensor x = Tensor::from_values({2, 3}, uniform_draws(rng, 6, -1.0, 1.0), true);
    Tensor weights = Tensor::from_values({2, 4}, uniform_draws(rng, 8, -1.0, 1.0));
    auto f = [&]() { return sum(mul(rbf_features(x, refs, 0.8), weights)); };
    auto res = finite_diff_check(f, std::vector<Tensor>{refs, x}, 1e-5);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("rbf rejects non-positive gamma") {
    CHECK_THROWS_AS(rbf_features(Tensor::zeros({1, 2}), Tensor::zeros({1, 2}), 0.0),
                    ConfigError);
    CHECK_THROWS_AS(make_kernel_params(Tensor::zeros({1, 2}), 2, -1.0, KernelMode::learnable),
                    ConfigError);
}

TEST_CASE("mixture saturates to a single kernel at extreme logits") {
    std::mt19937_64 rng(13);
    Tensor refs = Tensor::from_values({5, 6}, normal_draws(rng, 30), true);
    Tensor x = Tensor::from_values({3, 6}, uniform_draws(rng, 18, -1.0, 1.0));

    KernelParams p = simple_params(refs, 2, 1.3);
    Tensor kp = poly_kernel(x, p);
    Tensor kr = rbf_kernel(x, p);

    p.lambda_logit.values()[0] = 50.0;
    Tensor near_poly = adaptive_kernel_forward(x, p);
    for (std::size_t i = 0; i < near_poly.size(); ++i) {
        CHECK(std::fabs(near_poly.values()[i] - kp.values()[i]) <=
              1e-15 * std::max(1.0, std::fabs(kp.values()[i])));
    }

    p.lambda_logit.values()[0] = -50.0;
    Tensor near_rbf = adaptive_kernel_forward(x, p);
    for (std::size_t i = 0; i < near_rbf.size(); ++i) {
        CHECK(std::fabs(near_rbf.values()[i] - kr.values()[i]) <= 1e-15);
    }
}

TEST_CASE("logit zero mixes the kernels equally") {
    // K_p entry 4, K_r entry 1 -> 2.5 at lambda = 0.5
    Tensor kp = Tensor::from_values({1, 1}, {4.0});
    Tensor kr = Tensor::from_values({1, 1}, {1.0});
    CHECK(mix_kernels(kp, kr, Tensor::scalar(0.5)).item() == 2.5);
}

TEST_CASE("mixture is affine in lambda with slope K_p - K_r") {
    Tensor kp = Tensor::from_values({2, 2}, {4.0, 0.5, -1.0, 3.0});
    Tensor kr = Tensor::from_values({2, 2}, {1.0, 0.25, 2.0, -0.5});
    for (std::size_t i = 0; i < 4; ++i) {
        const double slope = kp.values()[i] - kr.values()[i];
        const double at0 = mix_kernels(kp, kr, Tensor::scalar(0.0)).values()[i];
        CHECK(at0 == kr.values()[i]);
        for (double lambda : {0.25, 0.5, 1.0}) {
            Tensor mixed = mix_kernels(kp, kr, Tensor::scalar(lambda));
            CHECK(mixed.values()[i] == doctest::Approx(at0 + slope * lambda).epsilon(1e-12));
        }
    }
}

TEST_CASE("mixture with interior lambda lies between the constituents") {
    std::mt19937_64 rng(17);
    Tensor refs = Tensor::from_values({4, 5}, normal_draws(rng, 20), true);
    Tensor x = Tensor::from_values({2, 5}, uniform_draws(rng, 10, -1.0, 1.0));
    KernelParams p = simple_params(refs, 2, 0.9);
    p.lambda_logit.values()[0] = 0.37;
    Tensor kp = poly_kernel(x, p);
    Tensor kr = rbf_kernel(x, p);
    Tensor ko = adaptive_kernel_forward(x, p);
    for (std::size_t i = 0; i < ko.size(); ++i) {
        const double lo = std::min(kp.values()[i], kr.values()[i]);
        const double hi = std::max(kp.values()[i], kr.values()[i]);
        CHECK(ko.values()[i] >= lo - 1e-12);
        CHECK(ko.values()[i] <= hi + 1e-12);
    }
}

TEST_CASE("mixture gradient w.r.t. the logit matches finite differences") {
    std::mt19937_64 rng(19);
    Tensor refs = Tensor::from_values({3, 4}, normal_draws(rng, 12), true);
    KernelParams p = simple_params(refs, 2, 1.1);
    Tensor x = Tensor::from_values({2, 4}, uniform_draws(rng, 8, -1.0, 1.0));
    Tensor weights = Tensor::from_values({2, 3}, uniform_draws(rng, 6, -1.0, 1.0));
    auto f = [&]() { return sum(mul(adaptive_kernel_forward(x, p), weights)); };
    std::vector<NamedParam> params = {{"lambda_logit", p.lambda_logit},
                                      {"alpha", p.alpha},
                                      {"c", p.c},
                                      {"refs", p.reference_points}};
    auto res = finite_diff_check(f, params, 1e-5);
    CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("single-kernel modes bypass the mixture") {
    std::mt19937_64 rng(23);
    Tensor refs = Tensor::from_values({3, 4}, normal_draws(rng, 12), true);
    Tensor x = Tensor::from_values({2, 4}, uniform_draws(rng, 8, -1.0, 1.0));

    KernelParams poly_only = simple_params(refs, 2, 1.0, KernelMode::learnable_poly_only);
    Tensor kp = poly_kernel(x, poly_only);
    Tensor out_p = adaptive_kernel_forward(x, poly_only);
    for (std::size_t i = 0; i < kp.size(); ++i) CHECK(out_p.values()[i] == kp.values()[i]);

    KernelParams rbf_only = simple_params(refs, 2, 1.0, KernelMode::traditional_rbf);
    Tensor kr = rbf_kernel(x, rbf_only);
    Tensor out_r = adaptive_kernel_forward(x, rbf_only);
    for (std::size_t i = 0; i < kr.size(); ++i) CHECK(out_r.values()[i] == kr.values()[i]);
}

TEST_CASE("traditional modes freeze every kernel parameter") {
    std::mt19937_64 rng(29);
    for (KernelMode mode : {KernelMode::traditional_poly, KernelMode::traditional_rbf,
                            KernelMode::traditional_combined}) {
        Tensor refs = Tensor::from_values({3, 4}, normal_draws(rng, 12), true);
        KernelParams p = simple_params(refs, 2, 1.0, mode);
        CHECK_FALSE(p.reference_points.requires_grad());
        CHECK_FALSE(p.alpha.requires_grad());
        CHECK_FALSE(p.c.requires_grad());
        CHECK_FALSE(p.lambda_logit.requires_grad());
        CHECK(p.lambda() == 0.5); // fixed even blend for traditional_combined
    }
}
