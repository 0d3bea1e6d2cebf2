#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gin {

// Shape or index mismatch in tensor arithmetic.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite value where a finite one is required (training aborts, flow
// evaluation, gradient checking).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Dense row-major fp64 array. Rank 1 and 2 cover everything this project
// needs; rank() is derived from the shape vector.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<double> values);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, double value);

    int rank() const { return static_cast<int>(shape_.size()); }
    const std::vector<int>& shape() const { return shape_; }
    int dim(int axis) const;
    long long numel() const { return static_cast<long long>(data_.size()); }
    bool empty() const { return data_.empty(); }

    // Rank-2 accessors.
    int rows() const;
    int cols() const;
    double& at(int r, int c);
    double at(int r, int c) const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double& operator[](long long i) { return data_[static_cast<size_t>(i)]; }
    double operator[](long long i) const { return data_[static_cast<size_t>(i)]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(double v);

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<double> data_;
};

long long shape_numel(const std::vector<int>& shape);

// Value-level kernels shared by graph ops and plain flow evaluation, so both
// paths produce bit-identical results.
namespace tmath {

Tensor matmul(const Tensor& a, const Tensor& b);
// Same-shape pairs, or rank-2 `a` with `b` a 1 x cols row vector (bias add).
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor relu(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor reciprocal(const Tensor& x);
Tensor neg(const Tensor& x);
Tensor scale(const Tensor& x, double alpha);
// Reductions keep the reduced axis with size 1.
Tensor reduce_sum(const Tensor& x, int axis);
Tensor reduce_mean(const Tensor& x, int axis);
// Rank 1: element range [lo, hi). Rank 2: column range.
Tensor slice_cols(const Tensor& x, int lo, int hi);
Tensor concat_cols(const Tensor& a, const Tensor& b);
// Rank 2 column gather; out[:, j] = x[:, idx[j]].
Tensor gather_cols(const Tensor& x, const std::vector<int>& idx);

} // namespace tmath
} // namespace gin
