#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hyperenergy {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

/// One recorded operation (or a leaf) of the differentiation graph. Inputs
/// always precede their consumers, so a depth-first walk over `inputs`
/// yields a valid reverse-traversal order.
struct TapeNode {
    Shape shape;
    std::vector<double> values;
    /// For leaves: the persistent gradient accumulator. For interior nodes:
    /// scratch adjoint storage, reset by every backward() call.
    std::vector<double> grad;
    bool requires_grad = false;
    bool leaf = true;
    const char* op = "leaf";
    std::vector<std::shared_ptr<TapeNode>> inputs;
    /// Accumulates adjoints into this node's inputs; reads this->grad.
    std::function<void(TapeNode&)> backward_fn;
};

} // namespace detail

/// Dense n-dimensional array of doubles participating in a differentiation
/// graph. Value-semantic handle: copies share the underlying node.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::shared_ptr<detail::TapeNode> node);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_values(Shape shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t size() const;
    std::size_t rank() const;
    std::size_t dim(std::size_t axis) const;

    bool requires_grad() const;
    void set_requires_grad(bool enabled); // leaves only
    bool is_leaf() const;
    const char* op_name() const;

    std::span<double> values();
    std::span<const double> values() const;
    double item() const; // scalar tensors only

    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad() const;

    /// True when both handles refer to the same storage/tape node.
    bool same_node(const Tensor& other) const { return node_ == other.node_; }

    detail::TapeNode* node() const { return node_.get(); }
    const std::shared_ptr<detail::TapeNode>& node_ptr() const { return node_; }

private:
    std::shared_ptr<detail::TapeNode> node_;
};

// ---- graph construction ---------------------------------------------------

/// Builds an operation node. When tape recording is off (NoGradGuard) or no
/// input carries requires_grad, the result degenerates to a constant leaf and
/// the inputs are not retained.
Tensor make_op(const char* op, Shape shape, std::vector<double> values,
               std::vector<Tensor> inputs,
               std::function<void(detail::TapeNode&)> backward_fn);

/// Disables tape recording on the current thread for its lifetime.
/// Forward-only evaluation paths use this to avoid building graphs.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

bool grad_enabled();

// ---- operations -------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
/// a * b^T for a:[m x k], b:[p x k] -> [m x p]. Row-against-row product used
/// by feature maps and affine layers; avoids materializing transposes.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
/// x:[B x in], w:[out x in], b:[out] -> x*w^T + b per row.
Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor exp(const Tensor& a);
Tensor pow_int(const Tensor& a, int degree); // degree >= 1
Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor swish(const Tensor& a); // x * sigmoid(x)

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a, std::size_t axis);
Tensor mean(const Tensor& a, std::size_t axis);

/// Contiguous sub-range [start, end) of the flattened tensor, reshaped to
/// new_shape. Backward scatters the adjoint into the parent range.
Tensor slice_view(const Tensor& a, std::size_t start, std::size_t end,
                  Shape new_shape);
Tensor reshape(const Tensor& a, Shape new_shape);

/// Concatenation along the first axis; all parts must share trailing dims.
Tensor concat_rows(std::span<const Tensor> parts);

/// Reverse tape traversal from a scalar loss. Adjoints of interior nodes are
/// recomputed from scratch; gradients of requires_grad leaves accumulate (+=)
/// and must be zeroed explicitly between optimization steps.
void backward(const Tensor& loss);

} // namespace hyperenergy
