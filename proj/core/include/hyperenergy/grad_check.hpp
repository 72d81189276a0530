#pragma once

#include "hyperenergy/tensor.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hyperenergy {

struct NamedParam {
    std::string name;
    Tensor tensor;
};

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Compares analytic gradients of a deterministic scalar function against
/// central finite differences (f(p+eps) - f(p-eps)) / (2 eps), coordinate by
/// coordinate over every given parameter. The relative error denominator is
/// max(|analytic|, |numeric|, 1e-8). Throws NumericalError when f produces a
/// non-finite value.
GradCheckResult finite_diff_check(const std::function<Tensor()>& f,
                                  std::span<const NamedParam> params,
                                  double eps);

/// Convenience overload for a single unnamed parameter list.
GradCheckResult finite_diff_check(const std::function<Tensor()>& f,
                                  std::span<const Tensor> params, double eps);

} // namespace hyperenergy
