#include "hyperenergy/tensor.hpp"

#include "hyperenergy/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace hyperenergy {

namespace {

thread_local bool g_grad_enabled = true;

double ipow(double base, int d) {
    double acc = 1.0;
    for (int i = 0; i < d; ++i) acc *= base;
    return acc;
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void check_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw ShapeError(std::string(op) + ": undefined tensor");
}

} // namespace

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// ---- Tensor ---------------------------------------------------------------

Tensor::Tensor(std::shared_ptr<detail::TapeNode> node) : node_(std::move(node)) {}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return from_values(shape, std::vector<double>(shape_size(shape), 0.0),
                       requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    return from_values(shape, std::vector<double>(shape_size(shape), value),
                       requires_grad);
}

Tensor Tensor::from_values(Shape shape, std::vector<double> values,
                           bool requires_grad) {
    if (shape.empty()) throw ShapeError("tensor shape must have at least one dimension");
    for (std::size_t d : shape) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
    }
    if (shape_size(shape) != values.size()) {
        throw ShapeError("value count " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
    }
    auto node = std::make_shared<detail::TapeNode>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_values({1}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->values.size(); }
std::size_t Tensor::rank() const { return node_->shape.size(); }
std::size_t Tensor::dim(std::size_t axis) const { return node_->shape.at(axis); }

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool enabled) {
    if (!node_->leaf) {
        throw ShapeError("requires_grad can only be toggled on leaf tensors");
    }
    node_->requires_grad = enabled;
    if (!enabled) node_->grad.clear();
}

bool Tensor::is_leaf() const { return node_->leaf; }
const char* Tensor::op_name() const { return node_->op; }

std::span<double> Tensor::values() { return node_->values; }
std::span<const double> Tensor::values() const { return node_->values; }

double Tensor::item() const {
    if (size() != 1) {
        throw ShapeError("item() requires a scalar tensor, got " + shape_str(shape()));
    }
    return node_->values[0];
}

bool Tensor::has_grad() const { return node_ && !node_->grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (!has_grad()) {
        throw ShapeError("tensor has no gradient (requires_grad leaf not yet visited by backward)");
    }
    return node_->grad;
}

void Tensor::zero_grad() const {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

// ---- graph construction -----------------------------------------------------

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

Tensor make_op(const char* op, Shape shape, std::vector<double> values,
               std::vector<Tensor> inputs,
               std::function<void(detail::TapeNode&)> backward_fn) {
    bool track = g_grad_enabled;
    if (track) {
        track = false;
        for (const Tensor& in : inputs) {
            if (in.requires_grad()) { track = true; break; }
        }
    }
    auto node = std::make_shared<detail::TapeNode>();
    node->shape = std::move(shape);
    node->values = std::move(values);
    if (track) {
        node->requires_grad = true;
        node->leaf = false;
        node->op = op;
        node->inputs.reserve(inputs.size());
        for (Tensor& in : inputs) node->inputs.push_back(in.node_ptr());
        node->backward_fn = std::move(backward_fn);
    }
    return Tensor(std::move(node));
}

// ---- backward ---------------------------------------------------------------

void backward(const Tensor& loss) {
    check_defined(loss, "backward");
    if (loss.size() != 1) {
        throw ShapeError("backward requires a scalar loss, got " + shape_str(loss.shape()));
    }
    detail::TapeNode* root = loss.node();
    if (!root->requires_grad) {
        throw std::invalid_argument(
            "backward: loss is not connected to any requires_grad tensor");
    }

    // Iterative post-order DFS restricted to the requires_grad subgraph.
    std::vector<detail::TapeNode*> order;
    std::unordered_set<detail::TapeNode*> visited;
    struct Frame {
        detail::TapeNode* node;
        std::size_t next_input;
    };
    std::vector<Frame> stack;
    stack.push_back({root, 0});
    visited.insert(root);
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_input < f.node->inputs.size()) {
            detail::TapeNode* in = f.node->inputs[f.next_input++].get();
            if (in->requires_grad && !visited.count(in)) {
                visited.insert(in);
                stack.push_back({in, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    // Interior adjoints start from zero on every call; leaf gradients are
    // persistent accumulators.
    for (detail::TapeNode* n : order) {
        if (n->leaf) {
            if (n->grad.empty()) n->grad.assign(n->values.size(), 0.0);
        } else {
            n->grad.assign(n->values.size(), 0.0);
        }
    }
    root->grad[0] += 1.0;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::TapeNode* n = *it;
        if (n->backward_fn) n->backward_fn(*n);
    }
}

// ---- helpers for backward rules ----------------------------------------------

namespace {

std::vector<double>& grad_of(const std::shared_ptr<detail::TapeNode>& n) {
    return n->grad;
}

bool wants_grad(const std::shared_ptr<detail::TapeNode>& n) {
    return n->requires_grad;
}

} // namespace

// ---- matmul -------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_defined(a, "matmul");
    check_defined(b, "matmul");
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(1);
    std::vector<double> out(m * p, 0.0);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double ail = av[i * k + l];
            if (ail == 0.0) continue;
            const double* brow = bv + l * p;
            double* crow = out.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) crow[j] += ail * brow[j];
        }
    }
    return make_op("matmul", {m, p}, std::move(out), {a, b},
                   [m, k, p](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       const auto& bn = self.inputs[1];
                       const double* g = self.grad.data();
                       if (wants_grad(an)) {
                           double* da = grad_of(an).data();
                           const double* bvv = bn->values.data();
                           for (std::size_t i = 0; i < m; ++i) {
                               for (std::size_t l = 0; l < k; ++l) {
                                   const double* grow = g + i * p;
                                   const double* brow = bvv + l * p;
                                   double acc = 0.0;
                                   for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
                                   da[i * k + l] += acc;
                               }
                           }
                       }
                       if (wants_grad(bn)) {
                           double* db = grad_of(bn).data();
                           const double* avv = an->values.data();
                           for (std::size_t i = 0; i < m; ++i) {
                               const double* grow = g + i * p;
                               for (std::size_t l = 0; l < k; ++l) {
                                   const double ail = avv[i * k + l];
                                   if (ail == 0.0) continue;
                                   double* brow = db + l * p;
                                   for (std::size_t j = 0; j < p; ++j) brow[j] += ail * grow[j];
                               }
                           }
                       }
                   });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    check_defined(a, "matmul_nt");
    check_defined(b, "matmul_nt");
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1)) {
        throw ShapeError("matmul_nt: incompatible shapes " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
    }
    const std::size_t m = a.dim(0), k = a.dim(1), p = b.dim(0);
    std::vector<double> out(m * p, 0.0);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = av + i * k;
        for (std::size_t j = 0; j < p; ++j) {
            const double* brow = bv + j * k;
            double acc = 0.0;
            for (std::size_t l = 0; l < k; ++l) acc += arow[l] * brow[l];
            out[i * p + j] = acc;
        }
    }
    return make_op("matmul_nt", {m, p}, std::move(out), {a, b},
                   [m, k, p](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       const auto& bn = self.inputs[1];
                       const double* g = self.grad.data();
                       if (wants_grad(an)) {
                           double* da = grad_of(an).data();
                           const double* bvv = bn->values.data();
                           for (std::size_t i = 0; i < m; ++i) {
                               const double* grow = g + i * p;
                               double* darow = da + i * k;
                               for (std::size_t j = 0; j < p; ++j) {
                                   const double gij = grow[j];
                                   if (gij == 0.0) continue;
                                   const double* brow = bvv + j * k;
                                   for (std::size_t l = 0; l < k; ++l) darow[l] += gij * brow[l];
                               }
                           }
                       }
                       if (wants_grad(bn)) {
                           double* db = grad_of(bn).data();
                           const double* avv = an->values.data();
                           for (std::size_t i = 0; i < m; ++i) {
                               const double* grow = g + i * p;
                               const double* arow = avv + i * k;
                               for (std::size_t j = 0; j < p; ++j) {
                                   const double gij = grow[j];
                                   if (gij == 0.0) continue;
                                   double* dbrow = db + j * k;
                                   for (std::size_t l = 0; l < k; ++l) dbrow[l] += gij * arow[l];
                               }
                           }
                       }
                   });
}

Tensor affine(const Tensor& x, const Tensor& w, const Tensor& b) {
    check_defined(x, "affine");
    check_defined(w, "affine");
    check_defined(b, "affine");
    if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(1)) {
        throw ShapeError("affine: incompatible shapes " + shape_str(x.shape()) +
                         " and " + shape_str(w.shape()));
    }
    if (b.size() != w.dim(0)) {
        throw ShapeError("affine: bias shape " + shape_str(b.shape()) +
                         " does not match weight rows " + shape_str(w.shape()));
    }
    const std::size_t B = x.dim(0), in = x.dim(1), out_w = w.dim(0);
    std::vector<double> out(B * out_w);
    const double* xv = x.values().data();
    const double* wv = w.values().data();
    const double* bv = b.values().data();
    for (std::size_t i = 0; i < B; ++i) {
        const double* xrow = xv + i * in;
        double* orow = out.data() + i * out_w;
        for (std::size_t o = 0; o < out_w; ++o) {
            const double* wrow = wv + o * in;
            double acc = bv[o];
            for (std::size_t l = 0; l < in; ++l) acc += xrow[l] * wrow[l];
            orow[o] = acc;
        }
    }
    return make_op("affine", {B, out_w}, std::move(out), {x, w, b},
                   [B, in, out_w](detail::TapeNode& self) {
                       const auto& xn = self.inputs[0];
                       const auto& wn = self.inputs[1];
                       const auto& bn = self.inputs[2];
                       const double* g = self.grad.data();
                       if (wants_grad(xn)) {
                           double* dx = grad_of(xn).data();
                           const double* wvv = wn->values.data();
                           for (std::size_t i = 0; i < B; ++i) {
                               const double* grow = g + i * out_w;
                               double* dxrow = dx + i * in;
                               for (std::size_t o = 0; o < out_w; ++o) {
                                   const double gio = grow[o];
                                   if (gio == 0.0) continue;
                                   const double* wrow = wvv + o * in;
                                   for (std::size_t l = 0; l < in; ++l) dxrow[l] += gio * wrow[l];
                               }
                           }
                       }
                       if (wants_grad(wn)) {
                           double* dw = grad_of(wn).data();
                           const double* xvv = xn->values.data();
                           for (std::size_t i = 0; i < B; ++i) {
                               const double* grow = g + i * out_w;
                               const double* xrow = xvv + i * in;
                               for (std::size_t o = 0; o < out_w; ++o) {
                                   const double gio = grow[o];
                                   if (gio == 0.0) continue;
                                   double* dwrow = dw + o * in;
                                   for (std::size_t l = 0; l < in; ++l) dwrow[l] += gio * xrow[l];
                               }
                           }
                       }
                       if (wants_grad(bn)) {
                           double* db = grad_of(bn).data();
                           for (std::size_t i = 0; i < B; ++i) {
                               const double* grow = g + i * out_w;
                               for (std::size_t o = 0; o < out_w; ++o) db[o] += grow[o];
                           }
                       }
                   });
}

// ---- binary elementwise ---------------------------------------------------------

namespace {

enum class BinKind { add, sub, mul };

Tensor binary_op(BinKind kind, const char* name, const Tensor& a, const Tensor& b) {
    check_defined(a, name);
    check_defined(b, name);
    const bool same = a.shape() == b.shape();
    const bool b_scalar = !same && b.size() == 1;
    const bool a_scalar = !same && !b_scalar && a.size() == 1;
    if (!same && !a_scalar && !b_scalar) {
        throw ShapeError(std::string(name) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()) + " (equal shapes or scalar operand required)");
    }
    const Tensor& big = a_scalar ? b : a;
    const std::size_t n = big.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    const double* bv = b.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double x = a_scalar ? av[0] : av[i];
        const double y = b_scalar ? bv[0] : bv[i];
        switch (kind) {
            case BinKind::add: out[i] = x + y; break;
            case BinKind::sub: out[i] = x - y; break;
            case BinKind::mul: out[i] = x * y; break;
        }
    }
    return make_op(name, big.shape(), std::move(out), {a, b},
                   [kind, a_scalar, b_scalar, n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       const auto& bn = self.inputs[1];
                       const double* g = self.grad.data();
                       const double* av = an->values.data();
                       const double* bv = bn->values.data();
                       if (wants_grad(an)) {
                           double* da = grad_of(an).data();
                           for (std::size_t i = 0; i < n; ++i) {
                               double piece = 0.0;
                               switch (kind) {
                                   case BinKind::add:
                                   case BinKind::sub: piece = g[i]; break;
                                   case BinKind::mul: piece = g[i] * (b_scalar ? bv[0] : bv[i]); break;
                               }
                               da[a_scalar ? 0 : i] += piece;
                           }
                       }
                       if (wants_grad(bn)) {
                           double* db = grad_of(bn).data();
                           for (std::size_t i = 0; i < n; ++i) {
                               double piece = 0.0;
                               switch (kind) {
                                   case BinKind::add: piece = g[i]; break;
                                   case BinKind::sub: piece = -g[i]; break;
                                   case BinKind::mul: piece = g[i] * (a_scalar ? av[0] : av[i]); break;
                               }
                               db[b_scalar ? 0 : i] += piece;
                           }
                       }
                   });
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_op(BinKind::add, "add", a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_op(BinKind::sub, "sub", a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return binary_op(BinKind::mul, "mul", a, b); }

Tensor scalar_mul(const Tensor& a, double s) {
    check_defined(a, "scalar_mul");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = av[i] * s;
    return make_op("scalar_mul", a.shape(), std::move(out), {a},
                   [s, n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * s;
                   });
}

Tensor add_scalar(const Tensor& a, double s) {
    check_defined(a, "add_scalar");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + s;
    return make_op("add_scalar", a.shape(), std::move(out), {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       for (std::size_t i = 0; i < n; ++i) da[i] += g[i];
                   });
}

// ---- unary elementwise -----------------------------------------------------------

Tensor exp(const Tensor& a) {
    check_defined(a, "exp");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(av[i]);
    return make_op("exp", a.shape(), std::move(out), {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       const double* y = self.values.data();
                       for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * y[i];
                   });
}

Tensor pow_int(const Tensor& a, int degree) {
    check_defined(a, "pow_int");
    if (degree < 1) {
        throw std::invalid_argument("pow_int: degree must be >= 1, got " +
                                    std::to_string(degree));
    }
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = ipow(av[i], degree);
    return make_op("pow_int", a.shape(), std::move(out), {a},
                   [n, degree](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       const double* x = an->values.data();
                       for (std::size_t i = 0; i < n; ++i) {
                           da[i] += g[i] * degree * ipow(x[i], degree - 1);
                       }
                   });
}

Tensor tanh(const Tensor& a) {
    check_defined(a, "tanh");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(av[i]);
    return make_op("tanh", a.shape(), std::move(out), {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       const double* y = self.values.data();
                       for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * (1.0 - y[i] * y[i]);
                   });
}

Tensor sigmoid(const Tensor& a) {
    check_defined(a, "sigmoid");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = stable_sigmoid(av[i]);
    return make_op("sigmoid", a.shape(), std::move(out), {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       const double* y = self.values.data();
                       for (std::size_t i = 0; i < n; ++i) da[i] += g[i] * y[i] * (1.0 - y[i]);
                   });
}

Tensor relu(const Tensor& a) {
    check_defined(a, "relu");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
    return make_op("relu", a.shape(), std::move(out), {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       const double* x = an->values.data();
                       for (std::size_t i = 0; i < n; ++i) {
                           if (x[i] > 0.0) da[i] += g[i];
                       }
                   });
}

Tensor swish(const Tensor& a) {
    check_defined(a, "swish");
    const std::size_t n = a.size();
    std::vector<double> out(n);
    std::vector<double> sig(n);
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) {
        sig[i] = stable_sigmoid(av[i]);
        out[i] = av[i] * sig[i];
    }
    return make_op("swish", a.shape(), std::move(out), {a},
                   [n, sig = std::move(sig)](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       const double* x = an->values.data();
                       for (std::size_t i = 0; i < n; ++i) {
                           da[i] += g[i] * sig[i] * (1.0 + x[i] * (1.0 - sig[i]));
                       }
                   });
}

// ---- reductions ---------------------------------------------------------------

Tensor sum(const Tensor& a) {
    check_defined(a, "sum");
    const std::size_t n = a.size();
    double acc = 0.0;
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) acc += av[i];
    return make_op("sum", {1}, {acc}, {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double g = self.grad[0];
                       for (std::size_t i = 0; i < n; ++i) da[i] += g;
                   });
}

Tensor mean(const Tensor& a) {
    check_defined(a, "mean");
    const std::size_t n = a.size();
    double acc = 0.0;
    const double* av = a.values().data();
    for (std::size_t i = 0; i < n; ++i) acc += av[i];
    acc /= static_cast<double>(n);
    return make_op("mean", {1}, {acc}, {a},
                   [n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double g = self.grad[0] / static_cast<double>(n);
                       for (std::size_t i = 0; i < n; ++i) da[i] += g;
                   });
}

namespace {

Tensor reduce_axis(const Tensor& a, std::size_t axis, bool take_mean, const char* name) {
    check_defined(a, name);
    if (axis >= a.rank()) {
        throw ShapeError(std::string(name) + ": axis " + std::to_string(axis) +
                         " out of range for " + shape_str(a.shape()));
    }
    const Shape& s = a.shape();
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    const std::size_t len = s[axis];
    Shape out_shape;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i != axis) out_shape.push_back(s[i]);
    }
    if (out_shape.empty()) out_shape = {1};
    std::vector<double> out(outer * inner, 0.0);
    const double* av = a.values().data();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t l = 0; l < len; ++l) {
            const double* src = av + (o * len + l) * inner;
            double* dst = out.data() + o * inner;
            for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
        }
    }
    const double scale = take_mean ? 1.0 / static_cast<double>(len) : 1.0;
    if (take_mean) {
        for (double& v : out) v *= scale;
    }
    return make_op(name, std::move(out_shape), std::move(out), {a},
                   [outer, inner, len, scale](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       for (std::size_t o = 0; o < outer; ++o) {
                           for (std::size_t l = 0; l < len; ++l) {
                               double* dst = da + (o * len + l) * inner;
                               const double* src = g + o * inner;
                               for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i] * scale;
                           }
                       }
                   });
}

} // namespace

Tensor sum(const Tensor& a, std::size_t axis) { return reduce_axis(a, axis, false, "sum_axis"); }
Tensor mean(const Tensor& a, std::size_t axis) { return reduce_axis(a, axis, true, "mean_axis"); }

// ---- slicing / reshaping ---------------------------------------------------------

Tensor slice_view(const Tensor& a, std::size_t start, std::size_t end, Shape new_shape) {
    check_defined(a, "slice_view");
    if (start >= end || end > a.size()) {
        throw ShapeError("slice_view: range [" + std::to_string(start) + ", " +
                         std::to_string(end) + ") out of bounds for size " +
                         std::to_string(a.size()));
    }
    if (shape_size(new_shape) != end - start) {
        throw ShapeError("slice_view: new shape " + shape_str(new_shape) +
                         " does not cover " + std::to_string(end - start) + " elements");
    }
    std::vector<double> out(a.values().begin() + static_cast<std::ptrdiff_t>(start),
                            a.values().begin() + static_cast<std::ptrdiff_t>(end));
    const std::size_t n = end - start;
    return make_op("slice_view", std::move(new_shape), std::move(out), {a},
                   [start, n](detail::TapeNode& self) {
                       const auto& an = self.inputs[0];
                       if (!wants_grad(an)) return;
                       double* da = grad_of(an).data();
                       const double* g = self.grad.data();
                       for (std::size_t i = 0; i < n; ++i) da[start + i] += g[i];
                   });
}

Tensor reshape(const Tensor& a, Shape new_shape) {
    return slice_view(a, 0, a.size(), std::move(new_shape));
}

Tensor concat_rows(std::span<const Tensor> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no tensors given");
    const Shape& first = parts[0].shape();
    Shape trailing(first.begin() + 1, first.end());
    std::size_t rows = 0;
    std::size_t total = 0;
    for (const Tensor& t : parts) {
        check_defined(t, "concat_rows");
        if (t.rank() != first.size() ||
            Shape(t.shape().begin() + 1, t.shape().end()) != trailing) {
            throw ShapeError("concat_rows: trailing dimensions differ: " +
                             shape_str(first) + " vs " + shape_str(t.shape()));
        }
        rows += t.dim(0);
        total += t.size();
    }
    std::vector<double> out;
    out.reserve(total);
    std::vector<std::size_t> offsets;
    offsets.reserve(parts.size());
    for (const Tensor& t : parts) {
        offsets.push_back(out.size());
        out.insert(out.end(), t.values().begin(), t.values().end());
    }
    Shape out_shape;
    out_shape.push_back(rows);
    out_shape.insert(out_shape.end(), trailing.begin(), trailing.end());
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    return make_op("concat_rows", std::move(out_shape), std::move(out), std::move(inputs),
                   [offsets = std::move(offsets)](detail::TapeNode& self) {
                       const double* g = self.grad.data();
                       for (std::size_t idx = 0; idx < self.inputs.size(); ++idx) {
                           const auto& in = self.inputs[idx];
                           if (!wants_grad(in)) continue;
                           double* da = grad_of(in).data();
                           const std::size_t n = in->values.size();
                           const double* src = g + offsets[idx];
                           for (std::size_t i = 0; i < n; ++i) da[i] += src[i];
                       }
                   });
}

} // namespace hyperenergy
