#include "hyperenergy/kernel.hpp"

#include "hyperenergy/errors.hpp"
#include "hyperenergy/rng.hpp"

#include <cmath>

namespace hyperenergy {

std::string kernel_mode_name(KernelMode mode) {
    switch (mode) {
        case KernelMode::learnable: return "learnable";
        case KernelMode::traditional_poly: return "traditional_poly";
        case KernelMode::traditional_rbf: return "traditional_rbf";
        case KernelMode::traditional_combined: return "traditional_combined";
        case KernelMode::learnable_poly_only: return "learnable_poly_only";
        case KernelMode::learnable_rbf_only: return "learnable_rbf_only";
    }
    return "learnable";
}

KernelMode kernel_mode_from_name(const std::string& name) {
    if (name == "learnable") return KernelMode::learnable;
    if (name == "traditional_poly") return KernelMode::traditional_poly;
    if (name == "traditional_rbf") return KernelMode::traditional_rbf;
    if (name == "traditional_combined") return KernelMode::traditional_combined;
    if (name == "learnable_poly_only") return KernelMode::learnable_poly_only;
    if (name == "learnable_rbf_only") return KernelMode::learnable_rbf_only;
    throw ConfigError("unknown kernel mode '" + name + "'");
}

bool kernel_mode_is_traditional(KernelMode mode) {
    return mode == KernelMode::traditional_poly || mode == KernelMode::traditional_rbf ||
           mode == KernelMode::traditional_combined;
}

bool kernel_mode_uses_poly(KernelMode mode) {
    return mode != KernelMode::traditional_rbf && mode != KernelMode::learnable_rbf_only;
}

bool kernel_mode_uses_rbf(KernelMode mode) {
    return mode != KernelMode::traditional_poly && mode != KernelMode::learnable_poly_only;
}

double KernelParams::lambda() const {
    const double z = lambda_logit.values()[0];
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Tensor init_reference_points(std::size_t num_points, std::size_t num_features,
                             std::size_t window_length, std::uint64_t seed) {
    if (num_points == 0 || num_features == 0 || window_length == 0) {
        throw ShapeError("init_reference_points: counts must be >= 1");
    }
    auto rng = make_rng(seed, "kernel.reference_points");
    const std::size_t width = num_features * window_length;
    return Tensor::from_values({num_points, width},
                               normal_draws(rng, num_points * width), true);
}

KernelParams make_kernel_params(Tensor reference_points, int degree, double gamma,
                                KernelMode mode) {
    if (reference_points.rank() != 2) {
        throw ShapeError("kernel reference points must be [N_r x k*n], got " +
                         shape_str(reference_points.shape()));
    }
    if (degree < 1) throw ConfigError("kernel degree must be >= 1");
    if (gamma <= 0.0) throw ConfigError("kernel gamma must be > 0");
    KernelParams p;
    p.reference_points = std::move(reference_points);
    p.alpha = Tensor::scalar(1.0, true);
    p.c = Tensor::scalar(1.0, true);
    p.degree = degree;
    p.gamma = gamma;
    p.lambda_logit = Tensor::scalar(0.0, true);
    p.mode = mode;
    const bool trainable = !kernel_mode_is_traditional(mode);
    p.reference_points.set_requires_grad(trainable);
    p.alpha.set_requires_grad(trainable);
    p.c.set_requires_grad(trainable);
    p.lambda_logit.set_requires_grad(trainable);
    return p;
}

namespace {

void check_kernel_input(const Tensor& x, const KernelParams& params, const char* op) {
    if (x.rank() != 2) {
        throw ShapeError(std::string(op) + ": input must be [B x k*n], got " +
                         shape_str(x.shape()));
    }
    if (x.dim(1) != params.input_width()) {
        throw ShapeError(std::string(op) + ": input width " + shape_str(x.shape()) +
                         " does not match reference points " +
                         shape_str(params.reference_points.shape()));
    }
}

} // namespace

Tensor poly_kernel(const Tensor& x, const KernelParams& params) {
    check_kernel_input(x, params, "poly_kernel");
    Tensor dots = matmul_nt(x, params.reference_points);     // [B x N_r]
    Tensor scaled = mul(dots, params.alpha);
    Tensor shifted = add(scaled, params.c);
    return pow_int(shifted, params.degree);
}

Tensor rbf_features(const Tensor& x, const Tensor& refs, double gamma) {
    if (x.rank() != 2 || refs.rank() != 2 || x.dim(1) != refs.dim(1)) {
        throw ShapeError("rbf_features: incompatible shapes " + shape_str(x.shape()) +
                         " and " + shape_str(refs.shape()));
    }
    if (gamma <= 0.0) throw ConfigError("rbf_features: gamma must be > 0");
    const std::size_t B = x.dim(0), D = x.dim(1), N = refs.dim(0);
    std::vector<double> out(B * N);
    const double* xv = x.values().data();
    const double* rv = refs.values().data();
    for (std::size_t i = 0; i < B; ++i) {
        const double* xrow = xv + i * D;
        for (std::size_t j = 0; j < N; ++j) {
            const double* rrow = rv + j * D;
            double dist2 = 0.0;
            for (std::size_t d = 0; d < D; ++d) {
                const double diff = xrow[d] - rrow[d];
                dist2 += diff * diff;
            }
            out[i * N + j] = std::exp(-gamma * dist2);
        }
    }
    return make_op("rbf_features", {B, N}, std::move(out), {x, refs},
                   [B, D, N, gamma](detail::TapeNode& self) {
                       const auto& xn = self.inputs[0];
                       const auto& rn = self.inputs[1];
                       const double* g = self.grad.data();
                       const double* y = self.values.data();
                       const double* xv = xn->values.data();
                       const double* rv = rn->values.data();
                       const bool dx = xn->requires_grad;
                       const bool dr = rn->requires_grad;
                       if (!dx && !dr) return;
                       for (std::size_t i = 0; i < B; ++i) {
                           const double* xrow = xv + i * D;
                           for (std::size_t j = 0; j < N; ++j) {
                               const double w = g[i * N + j] * y[i * N + j] * (-2.0 * gamma);
                               if (w == 0.0) continue;
                               const double* rrow = rv + j * D;
                               if (dx) {
                                   double* dxrow = xn->grad.data() + i * D;
                                   for (std::size_t d = 0; d < D; ++d) {
                                       dxrow[d] += w * (xrow[d] - rrow[d]);
                                   }
                               }
                               if (dr) {
                                   double* drrow = rn->grad.data() + j * D;
                                   for (std::size_t d = 0; d < D; ++d) {
                                       drrow[d] -= w * (xrow[d] - rrow[d]);
                                   }
                               }
                           }
                       }
                   });
}

Tensor rbf_kernel(const Tensor& x, const KernelParams& params) {
    check_kernel_input(x, params, "rbf_kernel");
    return rbf_features(x, params.reference_points, params.gamma);
}

Tensor mix_kernels(const Tensor& kp, const Tensor& kr, const Tensor& lambda) {
    Tensor one_minus = sub(Tensor::scalar(1.0), lambda);
    return add(mul(kp, lambda), mul(kr, one_minus));
}

Tensor adaptive_kernel_forward(const Tensor& x, const KernelParams& params) {
    const bool use_poly = kernel_mode_uses_poly(params.mode);
    const bool use_rbf = kernel_mode_uses_rbf(params.mode);
    if (use_poly && !use_rbf) return poly_kernel(x, params);
    if (use_rbf && !use_poly) return rbf_kernel(x, params);
    Tensor kp = poly_kernel(x, params);
    Tensor kr = rbf_kernel(x, params);
    Tensor lambda = sigmoid(params.lambda_logit);
    return mix_kernels(kp, kr, lambda);
}

} // namespace hyperenergy
