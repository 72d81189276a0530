#pragma once

#include "hyperenergy/tensor.hpp"

#include <cstdint>
#include <string>

namespace hyperenergy {

/// Which kernel feature map the model uses and whether its parameters train.
enum class KernelMode {
    learnable,            // lambda * K_poly + (1 - lambda) * K_rbf, everything trainable
    traditional_poly,     // polynomial only, parameters frozen
    traditional_rbf,      // RBF only, parameters frozen
    traditional_combined, // fixed 0.5/0.5 mixture, parameters frozen
    learnable_poly_only,  // polynomial only, parameters trainable
    learnable_rbf_only,   // RBF only, parameters trainable
};

std::string kernel_mode_name(KernelMode mode);
KernelMode kernel_mode_from_name(const std::string& name);
bool kernel_mode_is_traditional(KernelMode mode);
bool kernel_mode_uses_poly(KernelMode mode);
bool kernel_mode_uses_rbf(KernelMode mode);

/// Trainable state and fixed hyperparameters of the adaptive kernel feature
/// map. The mixing weight is kept as an unconstrained logit; the effective
/// lambda = sigmoid(lambda_logit) stays inside (0, 1) by construction.
struct KernelParams {
    Tensor reference_points; // [N_r x k*n]
    Tensor alpha;            // scalar, polynomial scale factor
    Tensor c;                // scalar, polynomial constant term
    int degree = 2;          // polynomial degree, fixed hyperparameter
    double gamma = 2.0;      // RBF spread, fixed hyperparameter
    Tensor lambda_logit;     // scalar
    KernelMode mode = KernelMode::learnable;

    std::size_t num_reference_points() const { return reference_points.dim(0); }
    std::size_t input_width() const { return reference_points.dim(1); }
    double lambda() const;
};

/// Standard-normal reference point draw, [N_r x k*n]. Trainable in learnable
/// modes; the caller freezes it for traditional ones.
Tensor init_reference_points(std::size_t num_points, std::size_t num_features,
                             std::size_t window_length, std::uint64_t seed);

/// Assembles kernel parameters with alpha = c = 1, lambda_logit = 0 and the
/// trainability implied by the mode.
KernelParams make_kernel_params(Tensor reference_points, int degree, double gamma,
                                KernelMode mode);

/// (alpha * <x_i, r_j> + c)^degree for every input row against every
/// reference point. x: [B x k*n] -> [B x N_r].
Tensor poly_kernel(const Tensor& x, const KernelParams& params);

/// exp(-gamma * ||x_i - r_j||^2); outputs in (0, 1].
Tensor rbf_kernel(const Tensor& x, const KernelParams& params);

/// Differentiable RBF feature map primitive used by rbf_kernel; exposed for
/// direct testing. x: [B x D], refs: [N x D] -> [B x N].
Tensor rbf_features(const Tensor& x, const Tensor& refs, double gamma);

/// lambda * kp + (1 - lambda) * kr with an explicitly supplied mixing weight.
Tensor mix_kernels(const Tensor& kp, const Tensor& kr, const Tensor& lambda);

/// The mode-dependent feature map: mixture, single kernel, or fixed blend.
Tensor adaptive_kernel_forward(const Tensor& x, const KernelParams& params);

} // namespace hyperenergy
