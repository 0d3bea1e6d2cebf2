#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gin/tensor.hpp"

namespace gin {

// Named leaf tensors with gradient slots. Indices are stable, so optimizer
// state can be keyed by them.
class ParamStore {
public:
    int add(std::string name, Tensor value);
    int size() const { return static_cast<int>(entries_.size()); }
    const std::string& name(int idx) const { return entries_.at(static_cast<size_t>(idx)).name; }
    Tensor& value(int idx) { return entries_.at(static_cast<size_t>(idx)).value; }
    const Tensor& value(int idx) const { return entries_.at(static_cast<size_t>(idx)).value; }
    // Lazily sized to the parameter shape.
    Tensor& grad(int idx);
    void zero_grads();
    long long total_elements() const;

private:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
    };
    std::vector<Entry> entries_;
};

// Handle to a node in a Graph.
struct Var {
    int id = -1;
};

// Deliberately wrong behavior, switchable at runtime, for negative tests of
// the gradient checker and the selftest command.
enum class Fault {
    kNone,
    kTanhGrad,     // uses (1 - y) instead of (1 - y^2)
    kNanGradient,  // poisons one accumulated parameter gradient with NaN
};

void set_fault_injection(Fault f);
Fault fault_injection();

// Dynamic reverse-mode tape. Nodes are appended in creation order, which is
// already topological; values are computed eagerly. A graph reads parameter
// values at build time and writes gradients only in backward().
class Graph {
public:
    explicit Graph(const ParamStore* params = nullptr) : params_(params) {}

    Var param(int param_index);
    Var constant(Tensor value);

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var mul(Var a, Var b);
    Var relu(Var x);
    Var tanh(Var x);
    Var exp(Var x);
    Var log(Var x);
    Var reciprocal(Var x);
    Var neg(Var x);
    Var scale(Var x, double alpha);
    Var sum(Var x, int axis);
    Var mean(Var x, int axis);
    Var sum_all(Var x);
    Var mean_all(Var x);
    Var slice_cols(Var x, int lo, int hi);
    Var concat_cols(Var a, Var b);
    Var gather_cols(Var x, std::vector<int> idx);

    const Tensor& value(Var v) const;
    double scalar(Var v) const;
    int size() const { return static_cast<int>(nodes_.size()); }

    // Accumulates dLoss/dParam into `sink` for every parameter node. `loss`
    // must have exactly one element. A second call without reset() throws.
    void backward(Var loss, ParamStore& sink);
    void reset();

private:
    enum class Op {
        kParam,
        kConst,
        kMatmul,
        kAdd,
        kMul,
        kRelu,
        kTanh,
        kExp,
        kLog,
        kReciprocal,
        kNeg,
        kScale,
        kSumAxis,
        kMeanAxis,
        kSlice,
        kConcat,
        kGather,
    };

    struct Node {
        Op op;
        int in0 = -1;
        int in1 = -1;
        Tensor value;
        Tensor grad;
        bool grad_set = false;
        double alpha = 0.0;       // kScale
        int axis = -1;            // reductions
        int lo = 0, hi = 0;       // kSlice
        std::vector<int> index;   // kGather
        int param_index = -1;     // kParam
    };

    Var push(Node n);
    Node& node(Var v);
    const Node& node(Var v) const;
    void accumulate(int id, const Tensor& g);

    const ParamStore* params_;
    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

// Max over parameters and elements of
// |analytic - central difference| / max(1, |central difference|).
// `build` must construct the scalar loss from `params` through the given
// graph. eps must lie in (1e-8, 1e-3).
double grad_check(const std::function<Var(Graph&)>& build, ParamStore& params, double eps);

} // namespace gin
