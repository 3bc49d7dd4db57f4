#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "msgat/tensor.hpp"

namespace msgat::ad {

// Inside divisions the Euclidean norm is floored at this value, which resolves
// the 0/0 in direction terms like v/||v|| without disturbing gradients at the
// tolerances this project tests against.
inline constexpr double kNormFloor = 1e-15;

enum class OpKind {
    Leaf,
    Add,
    Sub,
    Mul,       // elementwise; either side may be a 1x1 scalar (scalar-mul)
    Div,       // elementwise; either side may be a 1x1 scalar
    AddConst,  // x + p0
    MulConst,  // x * p0
    MatVec,
    MatMul,
    Inner,
    Norm,  // max(||v||, kNormFloor)
    Tanh,
    Artanh,  // throws if |x| >= 1: a clamp is missing upstream
    LeakyRelu,
    Sigmoid,
    Softmax,
    Log,
    Exp,
    Mean,    // elementwise mean over k same-shape inputs
    Concat,  // column vectors stacked into one column vector
    Softplus,
    Clamp,  // numerical guard; gradient passes only on the unclamped side
};

class Tape;

// Cheap handle to one tape slot. Valid for the lifetime of its tape epoch
// (until clear()).
struct Var {
    Tape* tape = nullptr;
    int idx = -1;

    bool valid() const { return tape != nullptr && idx >= 0; }
    const Tensor& val() const;
    const Tensor& grad() const;
    double scalar() const;
    int rows() const;
    int cols() const;
};

// Reverse-mode tape over dense tensors. Nodes are recorded in execution order;
// backward() replays them in exact reverse insertion order. One tape is
// single-threaded; distinct tapes are independent.
class Tape {
public:
    Var leaf(Tensor value);
    Var leaf(double scalar_value) { return leaf(Tensor::scalar(scalar_value)); }
    // cached constant leaf (no gradient consumer ever reads it back)
    Var constant(double x);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var div(Var a, Var b);
    Var add_const(Var a, double k);
    Var mul_const(Var a, double k);
    Var matvec(Var m, Var x);
    Var matmul(Var a, Var b);
    Var inner(Var a, Var b);
    Var norm(Var v);
    Var tanh(Var x);
    Var artanh(Var x);
    Var leaky_relu(Var x, double slope);
    Var sigmoid(Var x);
    Var softmax(Var x);
    Var log(Var x);
    Var exp(Var x);
    Var mean(std::span<const Var> xs);
    Var concat(std::span<const Var> xs);
    Var softplus(Var x);
    Var clamp(Var x, double lo, double hi);

    // composite: exp(0.5 * log(x)), valid for x > 0
    Var sqrt(Var x);

    // Seeds d(loss)/d(loss) = 1 and accumulates gradients into every ancestor.
    // Calling it twice without reset_grads()/clear() is an error.
    void backward(Var loss);
    void reset_grads();
    void clear();

    size_t size() const { return nodes_.size(); }
    const Tensor& value_of(int idx) const { return nodes_[static_cast<size_t>(idx)].value; }
    const Tensor& grad_of(int idx) const;

private:
    struct Node {
        OpKind kind = OpKind::Leaf;
        Tensor value;
        Tensor grad;  // allocated lazily during backward
        int a = -1;
        int b = -1;
        std::vector<int> many;  // Mean / Concat inputs
        double p0 = 0.0;
        double p1 = 0.0;
    };

    Var push(Node n);
    Node& node(Var v);
    Tensor& grad_slot(int idx);
    void backward_step(int idx);

    std::deque<Node> nodes_;
    std::vector<std::pair<double, int>> const_cache_;
    bool backward_done_ = false;
};

// Max over all parameter coordinates of
// |analytic - central difference| / max(1, |central difference|).
// `build` must be deterministic: it is re-run with perturbed parameter values.
double grad_check(std::span<Tensor* const> params,
                  const std::function<Var(Tape&, std::span<const Var>)>& build, double h = 1e-5);

}  // namespace msgat::ad
