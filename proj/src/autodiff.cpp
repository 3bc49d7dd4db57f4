#include "msgat/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace msgat::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                                b.shape_str());
}

bool broadcast_ok(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) || a.is_scalar() || b.is_scalar();
}

double stable_sigmoid(double x) {
    if (x >= 0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double stable_softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

}  // namespace

const Tensor& Var::val() const { return tape->value_of(idx); }
const Tensor& Var::grad() const { return tape->grad_of(idx); }
double Var::scalar() const {
    const Tensor& t = val();
    if (!t.is_scalar()) throw std::invalid_argument("Var::scalar on non-scalar " + t.shape_str());
    return t.v[0];
}
int Var::rows() const { return val().rows; }
int Var::cols() const { return val().cols; }

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(Var v) {
    if (v.tape != this) throw std::invalid_argument("Var belongs to a different tape");
    return nodes_[static_cast<size_t>(v.idx)];
}

const Tensor& Tape::grad_of(int idx) const {
    static const Tensor empty;
    const Tensor& g = nodes_[static_cast<size_t>(idx)].grad;
    return g.size() > 0 ? g : empty;
}

Tensor& Tape::grad_slot(int idx) {
    Node& n = nodes_[static_cast<size_t>(idx)];
    if (n.grad.size() == 0) n.grad = Tensor::zeros(n.value.rows, n.value.cols);
    return n.grad;
}

Var Tape::leaf(Tensor value) {
    Node n;
    n.kind = OpKind::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::constant(double x) {
    for (const auto& [v, i] : const_cache_)
        if (v == x) return Var{this, i};
    Var c = leaf(x);
    if (const_cache_.size() < 64) const_cache_.emplace_back(x, c.idx);
    return c;
}

Var Tape::add(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!broadcast_ok(ta, tb)) shape_error("add", ta, tb);
    Node n;
    n.kind = OpKind::Add;
    n.a = a.idx;
    n.b = b.idx;
    const Tensor& big = ta.is_scalar() ? tb : ta;
    n.value = Tensor::zeros(big.rows, big.cols);
    for (int i = 0; i < big.size(); ++i)
        n.value[i] = (ta.is_scalar() ? ta.v[0] : ta[i]) + (tb.is_scalar() ? tb.v[0] : tb[i]);
    return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!broadcast_ok(ta, tb)) shape_error("sub", ta, tb);
    Node n;
    n.kind = OpKind::Sub;
    n.a = a.idx;
    n.b = b.idx;
    const Tensor& big = ta.is_scalar() ? tb : ta;
    n.value = Tensor::zeros(big.rows, big.cols);
    for (int i = 0; i < big.size(); ++i)
        n.value[i] = (ta.is_scalar() ? ta.v[0] : ta[i]) - (tb.is_scalar() ? tb.v[0] : tb[i]);
    return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!broadcast_ok(ta, tb)) shape_error("mul", ta, tb);
    Node n;
    n.kind = OpKind::Mul;
    n.a = a.idx;
    n.b = b.idx;
    const Tensor& big = ta.is_scalar() ? tb : ta;
    n.value = Tensor::zeros(big.rows, big.cols);
    for (int i = 0; i < big.size(); ++i)
        n.value[i] = (ta.is_scalar() ? ta.v[0] : ta[i]) * (tb.is_scalar() ? tb.v[0] : tb[i]);
    return push(std::move(n));
}

Var Tape::div(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!broadcast_ok(ta, tb)) shape_error("div", ta, tb);
    Node n;
    n.kind = OpKind::Div;
    n.a = a.idx;
    n.b = b.idx;
    const Tensor& big = ta.is_scalar() ? tb : ta;
    n.value = Tensor::zeros(big.rows, big.cols);
    for (int i = 0; i < big.size(); ++i)
        n.value[i] = (ta.is_scalar() ? ta.v[0] : ta[i]) / (tb.is_scalar() ? tb.v[0] : tb[i]);
    return push(std::move(n));
}

Var Tape::add_const(Var a, double k) {
    Node n;
    n.kind = OpKind::AddConst;
    n.a = a.idx;
    n.p0 = k;
    n.value = node(a).value;
    for (auto& x : n.value.v) x += k;
    return push(std::move(n));
}

Var Tape::mul_const(Var a, double k) {
    Node n;
    n.kind = OpKind::MulConst;
    n.a = a.idx;
    n.p0 = k;
    n.value = node(a).value;
    for (auto& x : n.value.v) x *= k;
    return push(std::move(n));
}

Var Tape::matvec(Var m, Var x) {
    const Tensor& tm = node(m).value;
    const Tensor& tx = node(x).value;
    if (!tx.is_vector() || tm.cols != tx.rows) shape_error("matvec", tm, tx);
    Node n;
    n.kind = OpKind::MatVec;
    n.a = m.idx;
    n.b = x.idx;
    n.value = Tensor::zeros(tm.rows, 1);
    for (int i = 0; i < tm.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < tm.cols; ++j) s += tm.at(i, j) * tx[j];
        n.value[i] = s;
    }
    return push(std::move(n));
}

Var Tape::matmul(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (ta.cols != tb.rows) shape_error("matmul", ta, tb);
    Node n;
    n.kind = OpKind::MatMul;
    n.a = a.idx;
    n.b = b.idx;
    n.value = Tensor::zeros(ta.rows, tb.cols);
    for (int i = 0; i < ta.rows; ++i)
        for (int k = 0; k < ta.cols; ++k) {
            double aik = ta.at(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < tb.cols; ++j) n.value.at(i, j) += aik * tb.at(k, j);
        }
    return push(std::move(n));
}

Var Tape::inner(Var a, Var b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb)) shape_error("inner", ta, tb);
    Node n;
    n.kind = OpKind::Inner;
    n.a = a.idx;
    n.b = b.idx;
    double s = 0.0;
    for (int i = 0; i < ta.size(); ++i) s += ta[i] * tb[i];
    n.value = Tensor::scalar(s);
    return push(std::move(n));
}

Var Tape::norm(Var v) {
    const Tensor& tv = node(v).value;
    Node n;
    n.kind = OpKind::Norm;
    n.a = v.idx;
    double s = 0.0;
    for (int i = 0; i < tv.size(); ++i) s += tv[i] * tv[i];
    n.value = Tensor::scalar(std::max(std::sqrt(s), kNormFloor));
    return push(std::move(n));
}

Var Tape::tanh(Var x) {
    Node n;
    n.kind = OpKind::Tanh;
    n.a = x.idx;
    n.value = node(x).value;
    for (auto& t : n.value.v) t = std::tanh(t);
    return push(std::move(n));
}

Var Tape::artanh(Var x) {
    Node n;
    n.kind = OpKind::Artanh;
    n.a = x.idx;
    n.value = node(x).value;
    for (auto& t : n.value.v) {
        if (std::abs(t) >= 1.0)
            throw std::domain_error("artanh: |input| >= 1 (missing clamp upstream)");
        t = std::atanh(t);
    }
    return push(std::move(n));
}

Var Tape::leaky_relu(Var x, double slope) {
    Node n;
    n.kind = OpKind::LeakyRelu;
    n.a = x.idx;
    n.p0 = slope;
    n.value = node(x).value;
    for (auto& t : n.value.v) t = t >= 0.0 ? t : slope * t;
    return push(std::move(n));
}

Var Tape::sigmoid(Var x) {
    Node n;
    n.kind = OpKind::Sigmoid;
    n.a = x.idx;
    n.value = node(x).value;
    for (auto& t : n.value.v) t = stable_sigmoid(t);
    return push(std::move(n));
}

Var Tape::softmax(Var x) {
    const Tensor& tx = node(x).value;
    if (!tx.is_vector()) shape_error("softmax", tx, tx);
    Node n;
    n.kind = OpKind::Softmax;
    n.a = x.idx;
    n.value = tx;
    double m = *std::max_element(n.value.v.begin(), n.value.v.end());
    double z = 0.0;
    for (auto& t : n.value.v) {
        t = std::exp(t - m);
        z += t;
    }
    for (auto& t : n.value.v) t /= z;
    return push(std::move(n));
}

Var Tape::log(Var x) {
    Node n;
    n.kind = OpKind::Log;
    n.a = x.idx;
    n.value = node(x).value;
    for (auto& t : n.value.v) {
        if (t <= 0.0) throw std::domain_error("log: input <= 0 (missing clamp upstream)");
        t = std::log(t);
    }
    return push(std::move(n));
}

Var Tape::exp(Var x) {
    Node n;
    n.kind = OpKind::Exp;
    n.a = x.idx;
    n.value = node(x).value;
    for (auto& t : n.value.v) t = std::exp(t);
    return push(std::move(n));
}

Var Tape::mean(std::span<const Var> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty input list");
    Node n;
    n.kind = OpKind::Mean;
    const Tensor& first = node(xs[0]).value;
    n.value = Tensor::zeros(first.rows, first.cols);
    for (Var x : xs) {
        const Tensor& t = node(x).value;
        if (!t.same_shape(first)) shape_error("mean", first, t);
        for (int i = 0; i < t.size(); ++i) n.value[i] += t[i];
        n.many.push_back(x.idx);
    }
    double inv = 1.0 / static_cast<double>(xs.size());
    for (auto& t : n.value.v) t *= inv;
    return push(std::move(n));
}

Var Tape::concat(std::span<const Var> xs) {
    if (xs.empty()) throw std::invalid_argument("concat: empty input list");
    Node n;
    n.kind = OpKind::Concat;
    int total = 0;
    for (Var x : xs) {
        const Tensor& t = node(x).value;
        if (!t.is_vector()) shape_error("concat", t, t);
        total += t.rows;
        n.many.push_back(x.idx);
    }
    n.value = Tensor::zeros(total, 1);
    int off = 0;
    for (Var x : xs) {
        const Tensor& t = node(x).value;
        for (int i = 0; i < t.rows; ++i) n.value[off + i] = t[i];
        off += t.rows;
    }
    return push(std::move(n));
}

Var Tape::softplus(Var x) {
    Node n;
    n.kind = OpKind::Softplus;
    n.a = x.idx;
    n.value = node(x).value;
    for (auto& t : n.value.v) t = stable_softplus(t);
    return push(std::move(n));
}

Var Tape::clamp(Var x, double lo, double hi) {
    Node n;
    n.kind = OpKind::Clamp;
    n.a = x.idx;
    n.p0 = lo;
    n.p1 = hi;
    n.value = node(x).value;
    for (auto& t : n.value.v) t = std::min(std::max(t, lo), hi);
    return push(std::move(n));
}

Var Tape::sqrt(Var x) { return exp(mul_const(log(x), 0.5)); }

void Tape::reset_grads() {
    for (auto& n : nodes_) n.grad = Tensor();
    backward_done_ = false;
}

void Tape::clear() {
    nodes_.clear();
    const_cache_.clear();
    backward_done_ = false;
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: Var from a different tape");
    if (!nodes_[static_cast<size_t>(loss.idx)].value.is_scalar())
        throw std::invalid_argument("backward: loss must be scalar");
    if (backward_done_) throw std::logic_error("backward called twice without reset");
    backward_done_ = true;
    grad_slot(loss.idx).v[0] = 1.0;
    for (int i = loss.idx; i >= 0; --i) backward_step(i);
}

void Tape::backward_step(int idx) {
    Node& n = nodes_[static_cast<size_t>(idx)];
    if (n.grad.size() == 0) return;  // not an ancestor of the loss
    const Tensor& g = n.grad;
    const Tensor& y = n.value;
    switch (n.kind) {
        case OpKind::Leaf:
            break;
        case OpKind::Add: {
            Tensor& ga = grad_slot(n.a);
            Tensor& gb = grad_slot(n.b);
            for (int i = 0; i < g.size(); ++i) {
                ga[ga.is_scalar() ? 0 : i] += g[i];
                gb[gb.is_scalar() ? 0 : i] += g[i];
            }
            break;
        }
        case OpKind::Sub: {
            Tensor& ga = grad_slot(n.a);
            Tensor& gb = grad_slot(n.b);
            for (int i = 0; i < g.size(); ++i) {
                ga[ga.is_scalar() ? 0 : i] += g[i];
                gb[gb.is_scalar() ? 0 : i] -= g[i];
            }
            break;
        }
        case OpKind::Mul: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.a)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.b)].value;
            Tensor& ga = grad_slot(n.a);
            Tensor& gb = grad_slot(n.b);
            for (int i = 0; i < g.size(); ++i) {
                double av = ta.is_scalar() ? ta.v[0] : ta[i];
                double bv = tb.is_scalar() ? tb.v[0] : tb[i];
                ga[ga.is_scalar() ? 0 : i] += g[i] * bv;
                gb[gb.is_scalar() ? 0 : i] += g[i] * av;
            }
            break;
        }
        case OpKind::Div: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.a)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.b)].value;
            Tensor& ga = grad_slot(n.a);
            Tensor& gb = grad_slot(n.b);
            for (int i = 0; i < g.size(); ++i) {
                double av = ta.is_scalar() ? ta.v[0] : ta[i];
                double bv = tb.is_scalar() ? tb.v[0] : tb[i];
                ga[ga.is_scalar() ? 0 : i] += g[i] / bv;
                gb[gb.is_scalar() ? 0 : i] -= g[i] * av / (bv * bv);
            }
            break;
        }
        case OpKind::AddConst: {
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i];
            break;
        }
        case OpKind::MulConst: {
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * n.p0;
            break;
        }
        case OpKind::MatVec: {
            const Tensor& tm = nodes_[static_cast<size_t>(n.a)].value;
            const Tensor& tx = nodes_[static_cast<size_t>(n.b)].value;
            Tensor& gm = grad_slot(n.a);
            Tensor& gx = grad_slot(n.b);
            for (int i = 0; i < tm.rows; ++i) {
                double gi = g[i];
                if (gi == 0.0) continue;
                for (int j = 0; j < tm.cols; ++j) {
                    gm.at(i, j) += gi * tx[j];
                    gx[j] += gi * tm.at(i, j);
                }
            }
            break;
        }
        case OpKind::MatMul: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.a)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.b)].value;
            Tensor& ga = grad_slot(n.a);
            Tensor& gb = grad_slot(n.b);
            for (int i = 0; i < ta.rows; ++i)
                for (int j = 0; j < tb.cols; ++j) {
                    double gij = g.at(i, j);
                    if (gij == 0.0) continue;
                    for (int k = 0; k < ta.cols; ++k) {
                        ga.at(i, k) += gij * tb.at(k, j);
                        gb.at(k, j) += gij * ta.at(i, k);
                    }
                }
            break;
        }
        case OpKind::Inner: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.a)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.b)].value;
            Tensor& ga = grad_slot(n.a);
            Tensor& gb = grad_slot(n.b);
            double gs = g.v[0];
            for (int i = 0; i < ta.size(); ++i) {
                ga[i] += gs * tb[i];
                gb[i] += gs * ta[i];
            }
            break;
        }
        case OpKind::Norm: {
            const Tensor& tv = nodes_[static_cast<size_t>(n.a)].value;
            Tensor& gv = grad_slot(n.a);
            double inv = g.v[0] / y.v[0];
            for (int i = 0; i < tv.size(); ++i) gv[i] += inv * tv[i];
            break;
        }
        case OpKind::Tanh: {
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
            break;
        }
        case OpKind::Artanh: {
            const Tensor& tx = nodes_[static_cast<size_t>(n.a)].value;
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] / (1.0 - tx[i] * tx[i]);
            break;
        }
        case OpKind::LeakyRelu: {
            const Tensor& tx = nodes_[static_cast<size_t>(n.a)].value;
            Tensor& ga = grad_slot(n.a);
            // subgradient at 0 fixed to the positive-side slope 1
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * (tx[i] >= 0.0 ? 1.0 : n.p0);
            break;
        }
        case OpKind::Sigmoid: {
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
            break;
        }
        case OpKind::Softmax: {
            Tensor& ga = grad_slot(n.a);
            double dot = 0.0;
            for (int i = 0; i < g.size(); ++i) dot += g[i] * y[i];
            for (int i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - dot);
            break;
        }
        case OpKind::Log: {
            const Tensor& tx = nodes_[static_cast<size_t>(n.a)].value;
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] / tx[i];
            break;
        }
        case OpKind::Exp: {
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
            break;
        }
        case OpKind::Mean: {
            double inv = 1.0 / static_cast<double>(n.many.size());
            for (int src : n.many) {
                Tensor& gs = grad_slot(src);
                for (int i = 0; i < g.size(); ++i) gs[i] += g[i] * inv;
            }
            break;
        }
        case OpKind::Concat: {
            int off = 0;
            for (int src : n.many) {
                Tensor& gs = grad_slot(src);
                for (int i = 0; i < gs.size(); ++i) gs[i] += g[off + i];
                off += gs.size();
            }
            break;
        }
        case OpKind::Softplus: {
            const Tensor& tx = nodes_[static_cast<size_t>(n.a)].value;
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i) ga[i] += g[i] * stable_sigmoid(tx[i]);
            break;
        }
        case OpKind::Clamp: {
            const Tensor& tx = nodes_[static_cast<size_t>(n.a)].value;
            Tensor& ga = grad_slot(n.a);
            for (int i = 0; i < g.size(); ++i)
                if (tx[i] > n.p0 && tx[i] < n.p1) ga[i] += g[i];
            break;
        }
    }
}

double grad_check(std::span<Tensor* const> params,
                  const std::function<Var(Tape&, std::span<const Var>)>& build, double h) {
    auto eval = [&]() {
        Tape tape;
        std::vector<Var> vars;
        vars.reserve(params.size());
        for (Tensor* p : params) vars.push_back(tape.leaf(*p));
        return build(tape, vars).scalar();
    };

    Tape tape;
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (Tensor* p : params) vars.push_back(tape.leaf(*p));
    Var loss = build(tape, vars);
    tape.backward(loss);

    double max_rel = 0.0;
    for (size_t k = 0; k < params.size(); ++k) {
        const Tensor& analytic = vars[k].grad();
        for (int i = 0; i < params[k]->size(); ++i) {
            double keep = (*params[k])[i];
            (*params[k])[i] = keep + h;
            double fp = eval();
            (*params[k])[i] = keep - h;
            double fm = eval();
            (*params[k])[i] = keep;
            double fd = (fp - fm) / (2.0 * h);
            double an = analytic.size() > 0 ? analytic[i] : 0.0;
            double rel = std::abs(an - fd) / std::max(1.0, std::abs(fd));
            max_rel = std::max(max_rel, rel);
        }
    }
    return max_rel;
}

}  // namespace msgat::ad
