#include "gin/autograd.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace gin {

namespace {
Fault g_fault = Fault::kNone;
}

void set_fault_injection(Fault f) { g_fault = f; }
Fault fault_injection() { return g_fault; }

int ParamStore::add(std::string name, Tensor value) {
    entries_.push_back(Entry{std::move(name), std::move(value), Tensor{}});
    return static_cast<int>(entries_.size()) - 1;
}

Tensor& ParamStore::grad(int idx) {
    Entry& e = entries_.at(static_cast<size_t>(idx));
    if (e.grad.empty()) e.grad = Tensor::zeros(e.value.shape());
    return e.grad;
}

void ParamStore::zero_grads() {
    for (Entry& e : entries_) {
        if (!e.grad.empty()) e.grad.fill(0.0);
    }
}

long long ParamStore::total_elements() const {
    long long n = 0;
    for (const Entry& e : entries_) n += e.value.numel();
    return n;
}

Var Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Graph::Node& Graph::node(Var v) { return nodes_.at(static_cast<size_t>(v.id)); }
const Graph::Node& Graph::node(Var v) const { return nodes_.at(static_cast<size_t>(v.id)); }

Var Graph::param(int param_index) {
    if (!params_) throw std::logic_error("graph has no parameter store");
    Node n;
    n.op = Op::kParam;
    n.param_index = param_index;
    n.value = params_->value(param_index);
    return push(std::move(n));
}

Var Graph::constant(Tensor value) {
    Node n;
    n.op = Op::kConst;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
    Node n;
    n.op = Op::kMatmul;
    n.in0 = a.id;
    n.in1 = b.id;
    n.value = tmath::matmul(node(a).value, node(b).value);
    return push(std::move(n));
}

Var Graph::add(Var a, Var b) {
    Node n;
    n.op = Op::kAdd;
    n.in0 = a.id;
    n.in1 = b.id;
    n.value = tmath::add(node(a).value, node(b).value);
    return push(std::move(n));
}

Var Graph::mul(Var a, Var b) {
    Node n;
    n.op = Op::kMul;
    n.in0 = a.id;
    n.in1 = b.id;
    n.value = tmath::mul(node(a).value, node(b).value);
    return push(std::move(n));
}

Var Graph::relu(Var x) {
    Node n;
    n.op = Op::kRelu;
    n.in0 = x.id;
    n.value = tmath::relu(node(x).value);
    return push(std::move(n));
}

Var Graph::tanh(Var x) {
    Node n;
    n.op = Op::kTanh;
    n.in0 = x.id;
    n.value = tmath::tanh(node(x).value);
    return push(std::move(n));
}

Var Graph::exp(Var x) {
    Node n;
    n.op = Op::kExp;
    n.in0 = x.id;
    n.value = tmath::exp(node(x).value);
    return push(std::move(n));
}

Var Graph::log(Var x) {
    Node n;
    n.op = Op::kLog;
    n.in0 = x.id;
    n.value = tmath::log(node(x).value);
    return push(std::move(n));
}

Var Graph::reciprocal(Var x) {
    Node n;
    n.op = Op::kReciprocal;
    n.in0 = x.id;
    n.value = tmath::reciprocal(node(x).value);
    return push(std::move(n));
}

Var Graph::neg(Var x) {
    Node n;
    n.op = Op::kNeg;
    n.in0 = x.id;
    n.value = tmath::neg(node(x).value);
    return push(std::move(n));
}

Var Graph::scale(Var x, double alpha) {
    Node n;
    n.op = Op::kScale;
    n.in0 = x.id;
    n.alpha = alpha;
    n.value = tmath::scale(node(x).value, alpha);
    return push(std::move(n));
}

Var Graph::sum(Var x, int axis) {
    Node n;
    n.op = Op::kSumAxis;
    n.in0 = x.id;
    n.axis = axis;
    n.value = tmath::reduce_sum(node(x).value, axis);
    return push(std::move(n));
}

Var Graph::mean(Var x, int axis) {
    Node n;
    n.op = Op::kMeanAxis;
    n.in0 = x.id;
    n.axis = axis;
    n.value = tmath::reduce_mean(node(x).value, axis);
    return push(std::move(n));
}

Var Graph::sum_all(Var x) {
    Var v = sum(x, 0);
    if (value(v).numel() > 1) v = sum(v, 1);
    return v;
}

Var Graph::mean_all(Var x) {
    Var v = mean(x, 0);
    if (value(v).numel() > 1) v = mean(v, 1);
    return v;
}

Var Graph::slice_cols(Var x, int lo, int hi) {
    Node n;
    n.op = Op::kSlice;
    n.in0 = x.id;
    n.lo = lo;
    n.hi = hi;
    n.value = tmath::slice_cols(node(x).value, lo, hi);
    return push(std::move(n));
}

Var Graph::concat_cols(Var a, Var b) {
    Node n;
    n.op = Op::kConcat;
    n.in0 = a.id;
    n.in1 = b.id;
    n.value = tmath::concat_cols(node(a).value, node(b).value);
    return push(std::move(n));
}

Var Graph::gather_cols(Var x, std::vector<int> idx) {
    Node n;
    n.op = Op::kGather;
    n.in0 = x.id;
    n.index = std::move(idx);
    n.value = tmath::gather_cols(node(x).value, n.index);
    return push(std::move(n));
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

double Graph::scalar(Var v) const {
    const Tensor& t = node(v).value;
    if (t.numel() != 1) throw DimensionError("scalar(): node is not a single value");
    return t[0];
}

void Graph::accumulate(int id, const Tensor& g) {
    Node& n = nodes_.at(static_cast<size_t>(id));
    if (!n.grad_set) {
        n.grad = g;
        n.grad_set = true;
        return;
    }
    const long long count = g.numel();
    for (long long i = 0; i < count; ++i) n.grad[i] += g[i];
}

void Graph::reset() {
    backward_done_ = false;
    for (Node& n : nodes_) {
        n.grad = Tensor{};
        n.grad_set = false;
    }
}

void Graph::backward(Var loss, ParamStore& sink) {
    if (backward_done_) {
        throw std::logic_error("backward() called twice without reset()");
    }
    const Node& top = node(loss);
    if (top.value.numel() != 1) {
        throw DimensionError("backward(): loss must have exactly one element");
    }
    backward_done_ = true;

    accumulate(loss.id, Tensor::full(top.value.shape(), 1.0));

    for (int id = loss.id; id >= 0; --id) {
        Node& n = nodes_[static_cast<size_t>(id)];
        if (!n.grad_set) continue;
        const Tensor& g = n.grad;
        switch (n.op) {
        case Op::kParam: {
            Tensor& slot = sink.grad(n.param_index);
            for (long long i = 0; i < g.numel(); ++i) slot[i] += g[i];
            if (g_fault == Fault::kNanGradient) {
                slot[0] = std::numeric_limits<double>::quiet_NaN();
            }
            break;
        }
        case Op::kConst:
            break;
        case Op::kMatmul: {
            const Tensor& a = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& b = nodes_[static_cast<size_t>(n.in1)].value;
            // da = g . b^T ; db = a^T . g
            const int m = a.rows(), k = a.cols(), c = b.cols();
            Tensor da({m, k});
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < k; ++j) {
                    double acc = 0.0;
                    for (int t = 0; t < c; ++t) acc += g.at(i, t) * b.at(j, t);
                    da.at(i, j) = acc;
                }
            }
            Tensor db({k, c});
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < c; ++j) {
                    double acc = 0.0;
                    for (int t = 0; t < m; ++t) acc += a.at(t, i) * g.at(t, j);
                    db.at(i, j) = acc;
                }
            }
            accumulate(n.in0, da);
            accumulate(n.in1, db);
            break;
        }
        case Op::kAdd: {
            const Tensor& a = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& b = nodes_[static_cast<size_t>(n.in1)].value;
            accumulate(n.in0, g);
            if (a.same_shape(b)) {
                accumulate(n.in1, g);
            } else {
                // bias row vector: column sums
                accumulate(n.in1, tmath::reduce_sum(g, 0));
            }
            break;
        }
        case Op::kMul: {
            const Tensor& a = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& b = nodes_[static_cast<size_t>(n.in1)].value;
            if (a.same_shape(b)) {
                accumulate(n.in0, tmath::mul(g, b));
                accumulate(n.in1, tmath::mul(g, a));
            } else {
                accumulate(n.in0, tmath::mul(g, b));  // broadcast path
                accumulate(n.in1, tmath::reduce_sum(tmath::mul(g, a), 0));
            }
            break;
        }
        case Op::kRelu: {
            const Tensor& x = nodes_[static_cast<size_t>(n.in0)].value;
            Tensor dx(g.shape());
            for (long long i = 0; i < g.numel(); ++i) dx[i] = x[i] > 0.0 ? g[i] : 0.0;
            accumulate(n.in0, dx);
            break;
        }
        case Op::kTanh: {
            Tensor dx(g.shape());
            if (g_fault == Fault::kTanhGrad) {
                for (long long i = 0; i < g.numel(); ++i) dx[i] = g[i] * (1.0 - n.value[i]);
            } else {
                for (long long i = 0; i < g.numel(); ++i) {
                    dx[i] = g[i] * (1.0 - n.value[i] * n.value[i]);
                }
            }
            accumulate(n.in0, dx);
            break;
        }
        case Op::kExp:
            accumulate(n.in0, tmath::mul(g, n.value));
            break;
        case Op::kLog: {
            const Tensor& x = nodes_[static_cast<size_t>(n.in0)].value;
            Tensor dx(g.shape());
            for (long long i = 0; i < g.numel(); ++i) dx[i] = g[i] / x[i];
            accumulate(n.in0, dx);
            break;
        }
        case Op::kReciprocal: {
            Tensor dx(g.shape());
            for (long long i = 0; i < g.numel(); ++i) {
                dx[i] = -g[i] * n.value[i] * n.value[i];
            }
            accumulate(n.in0, dx);
            break;
        }
        case Op::kNeg:
            accumulate(n.in0, tmath::neg(g));
            break;
        case Op::kScale:
            accumulate(n.in0, tmath::scale(g, n.alpha));
            break;
        case Op::kSumAxis:
        case Op::kMeanAxis: {
            const Tensor& x = nodes_[static_cast<size_t>(n.in0)].value;
            Tensor dx(x.shape());
            const double w =
                n.op == Op::kMeanAxis
                    ? 1.0 / static_cast<double>(x.rank() == 1 ? x.numel() : x.dim(n.axis))
                    : 1.0;
            if (x.rank() == 1) {
                for (long long i = 0; i < x.numel(); ++i) dx[i] = g[0] * w;
            } else if (n.axis == 0) {
                for (int i = 0; i < x.rows(); ++i) {
                    for (int j = 0; j < x.cols(); ++j) dx.at(i, j) = g[j] * w;
                }
            } else {
                for (int i = 0; i < x.rows(); ++i) {
                    for (int j = 0; j < x.cols(); ++j) dx.at(i, j) = g[i] * w;
                }
            }
            accumulate(n.in0, dx);
            break;
        }
        case Op::kSlice: {
            const Tensor& x = nodes_[static_cast<size_t>(n.in0)].value;
            Tensor dx(x.shape());
            if (x.rank() == 1) {
                for (int i = n.lo; i < n.hi; ++i) dx[i] = g[i - n.lo];
            } else {
                for (int i = 0; i < x.rows(); ++i) {
                    for (int j = n.lo; j < n.hi; ++j) dx.at(i, j) = g.at(i, j - n.lo);
                }
            }
            accumulate(n.in0, dx);
            break;
        }
        case Op::kConcat: {
            const Tensor& a = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& b = nodes_[static_cast<size_t>(n.in1)].value;
            if (a.rank() == 1) {
                accumulate(n.in0, tmath::slice_cols(g, 0, a.dim(0)));
                accumulate(n.in1, tmath::slice_cols(g, a.dim(0), a.dim(0) + b.dim(0)));
            } else {
                accumulate(n.in0, tmath::slice_cols(g, 0, a.cols()));
                accumulate(n.in1, tmath::slice_cols(g, a.cols(), a.cols() + b.cols()));
            }
            break;
        }
        case Op::kGather: {
            const Tensor& x = nodes_[static_cast<size_t>(n.in0)].value;
            Tensor dx(x.shape());
            for (int i = 0; i < x.rows(); ++i) {
                for (size_t j = 0; j < n.index.size(); ++j) {
                    dx.at(i, n.index[j]) += g.at(i, static_cast<int>(j));
                }
            }
            accumulate(n.in0, dx);
            break;
        }
        }
    }
}

double grad_check(const std::function<Var(Graph&)>& build, ParamStore& params, double eps) {
    if (!(eps > 1e-8 && eps < 1e-3)) {
        throw std::invalid_argument("grad_check: eps must lie in (1e-8, 1e-3)");
    }

    params.zero_grads();
    {
        Graph g(&params);
        Var loss = build(g);
        if (!g.value(loss).all_finite()) {
            throw NumericError("grad_check: non-finite loss value");
        }
        g.backward(loss, params);
    }

    auto eval = [&](void) -> double {
        Graph g(&params);
        Var loss = build(g);
        double v = g.scalar(loss);
        if (!std::isfinite(v)) throw NumericError("grad_check: non-finite intermediate value");
        return v;
    };

    double worst = 0.0;
    for (int p = 0; p < params.size(); ++p) {
        Tensor& theta = params.value(p);
        const Tensor& analytic = params.grad(p);
        for (long long i = 0; i < theta.numel(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + eps;
            const double up = eval();
            theta[i] = saved - eps;
            const double down = eval();
            theta[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double err = std::fabs(analytic[i] - numeric) /
                               std::max(1.0, std::fabs(numeric));
            if (err > worst) worst = err;
        }
    }
    return worst;
}

} // namespace gin
