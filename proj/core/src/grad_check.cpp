#include "hyperenergy/grad_check.hpp"

#include "hyperenergy/errors.hpp"

#include <cmath>

namespace hyperenergy {

namespace {

double eval_scalar(const std::function<Tensor()>& f) {
    NoGradGuard guard;
    const double v = f().item();
    if (!std::isfinite(v)) {
        throw NumericalError("finite_diff_check: function produced a non-finite value");
    }
    return v;
}

} // namespace

GradCheckResult finite_diff_check(const std::function<Tensor()>& f,
                                  std::span<const NamedParam> params,
                                  double eps) {
    if (eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps must be > 0");

    // Analytic pass.
    for (const NamedParam& p : params) p.tensor.zero_grad();
    Tensor loss = f();
    if (!std::isfinite(loss.item())) {
        throw NumericalError("finite_diff_check: function produced a non-finite value");
    }
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const NamedParam& p : params) {
        if (p.tensor.has_grad()) {
            auto g = p.tensor.grad();
            analytic.emplace_back(g.begin(), g.end());
        } else {
            analytic.emplace_back(p.tensor.size(), 0.0);
        }
    }

    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor t = params[pi].tensor;
        auto vals = t.values();
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double saved = vals[i];
            vals[i] = saved + eps;
            const double up = eval_scalar(f);
            vals[i] = saved - eps;
            const double down = eval_scalar(f);
            vals[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[pi][i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            const double rel = std::fabs(a - numeric) / denom;
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_param = params[pi].name;
                result.worst_index = i;
                result.worst_analytic = a;
                result.worst_numeric = numeric;
            }
        }
    }
    return result;
}

GradCheckResult finite_diff_check(const std::function<Tensor()>& f,
                                  std::span<const Tensor> params, double eps) {
    std::vector<NamedParam> named;
    named.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        named.push_back({"param" + std::to_string(i), params[i]});
    }
    return finite_diff_check(f, named, eps);
}

} // namespace hyperenergy
