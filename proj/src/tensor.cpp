#include "gin/tensor.hpp"

#include <cmath>
#include <sstream>

namespace gin {

long long shape_numel(const std::vector<int>& shape) {
    long long n = 1;
    for (int d : shape) {
        if (d <= 0) throw DimensionError("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(shape_numel(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
    if (shape_numel(shape_) != static_cast<long long>(data_.size())) {
        throw DimensionError("tensor value count does not match shape");
    }
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

int Tensor::dim(int axis) const {
    if (axis < 0 || axis >= rank()) throw DimensionError("axis out of range");
    return shape_[static_cast<size_t>(axis)];
}

int Tensor::rows() const {
    if (rank() != 2) throw DimensionError("rows(): tensor is not rank 2");
    return shape_[0];
}

int Tensor::cols() const {
    if (rank() != 2) throw DimensionError("cols(): tensor is not rank 2");
    return shape_[1];
}

double& Tensor::at(int r, int c) {
    return data_[static_cast<size_t>(r) * static_cast<size_t>(cols()) + static_cast<size_t>(c)];
}

double Tensor::at(int r, int c) const {
    return data_[static_cast<size_t>(r) * static_cast<size_t>(cols()) + static_cast<size_t>(c)];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double v) {
    for (double& x : data_) x = v;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << '[';
    for (size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << 'x';
        os << shape_[i];
    }
    os << ']';
    return os.str();
}

namespace tmath {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
    }
}

bool bias_broadcastable(const Tensor& a, const Tensor& b) {
    return a.rank() == 2 && b.rank() == 2 && b.shape()[0] == 1 && b.shape()[1] == a.shape()[1];
}

template <typename F>
Tensor map(const Tensor& x, F f) {
    Tensor out(x.shape());
    const double* src = x.data();
    double* dst = out.data();
    const long long n = x.numel();
    for (long long i = 0; i < n; ++i) dst[i] = f(src[i]);
    return out;
}

template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, const char* op, F f) {
    if (a.same_shape(b)) {
        Tensor out(a.shape());
        const long long n = a.numel();
        for (long long i = 0; i < n; ++i) out[i] = f(a[i], b[i]);
        return out;
    }
    if (bias_broadcastable(a, b)) {
        Tensor out(a.shape());
        const int r = a.rows(), c = a.cols();
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) out.at(i, j) = f(a.at(i, j), b[j]);
        }
        return out;
    }
    throw DimensionError(std::string(op) + ": shapes " + a.shape_str() + " and " + b.shape_str() +
                         " are neither equal nor matrix/row-vector");
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) throw DimensionError("matmul: operands must be rank 2");
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions disagree " + a.shape_str() + " vs " +
                             b.shape_str());
    }
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (int i = 0; i < m; ++i) {
        double* orow = po + static_cast<size_t>(i) * n;
        const double* arow = pa + static_cast<size_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            const double* brow = pb + static_cast<size_t>(kk) * n;
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return zip(a, b, "mul", [](double x, double y) { return x * y; });
}

Tensor relu(const Tensor& x) {
    return map(x, [](double v) { return v > 0.0 ? v : 0.0; });
}

Tensor tanh(const Tensor& x) {
    return map(x, [](double v) { return std::tanh(v); });
}

Tensor exp(const Tensor& x) {
    return map(x, [](double v) { return std::exp(v); });
}

Tensor log(const Tensor& x) {
    return map(x, [](double v) { return std::log(v); });
}

Tensor reciprocal(const Tensor& x) {
    return map(x, [](double v) { return 1.0 / v; });
}

Tensor neg(const Tensor& x) {
    return map(x, [](double v) { return -v; });
}

Tensor scale(const Tensor& x, double alpha) {
    return map(x, [alpha](double v) { return alpha * v; });
}

namespace {

Tensor reduce(const Tensor& x, int axis, bool mean) {
    if (axis < 0 || axis >= x.rank()) throw DimensionError("reduce: axis out of range");
    if (x.rank() == 1) {
        double acc = 0.0;
        for (long long i = 0; i < x.numel(); ++i) acc += x[i];
        if (mean) acc /= static_cast<double>(x.numel());
        return Tensor({1}, {acc});
    }
    if (x.rank() != 2) throw DimensionError("reduce: rank > 2 unsupported");
    const int r = x.rows(), c = x.cols();
    if (axis == 0) {
        Tensor out({1, c});
        for (int i = 0; i < r; ++i) {
            for (int j = 0; j < c; ++j) out[j] += x.at(i, j);
        }
        if (mean) {
            for (int j = 0; j < c; ++j) out[j] /= static_cast<double>(r);
        }
        return out;
    }
    Tensor out({r, 1});
    for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        for (int j = 0; j < c; ++j) acc += x.at(i, j);
        out[i] = mean ? acc / static_cast<double>(c) : acc;
    }
    return out;
}

} // namespace

Tensor reduce_sum(const Tensor& x, int axis) { return reduce(x, axis, false); }
Tensor reduce_mean(const Tensor& x, int axis) { return reduce(x, axis, true); }

Tensor slice_cols(const Tensor& x, int lo, int hi) {
    const int width = x.rank() == 1 ? x.dim(0) : x.cols();
    if (lo < 0 || hi > width || lo >= hi) throw DimensionError("slice: range out of bounds");
    if (x.rank() == 1) {
        Tensor out({hi - lo});
        for (int i = lo; i < hi; ++i) out[i - lo] = x[i];
        return out;
    }
    const int r = x.rows();
    Tensor out({r, hi - lo});
    for (int i = 0; i < r; ++i) {
        for (int j = lo; j < hi; ++j) out.at(i, j - lo) = x.at(i, j);
    }
    return out;
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() != b.rank()) throw DimensionError("concat: rank mismatch");
    if (a.rank() == 1) {
        Tensor out({a.dim(0) + b.dim(0)});
        for (int i = 0; i < a.dim(0); ++i) out[i] = a[i];
        for (int i = 0; i < b.dim(0); ++i) out[a.dim(0) + i] = b[i];
        return out;
    }
    if (a.rank() != 2 || a.rows() != b.rows()) {
        throw DimensionError("concat: row counts disagree " + a.shape_str() + " vs " +
                             b.shape_str());
    }
    const int r = a.rows(), ca = a.cols(), cb = b.cols();
    Tensor out({r, ca + cb});
    for (int i = 0; i < r; ++i) {
        for (int j = 0; j < ca; ++j) out.at(i, j) = a.at(i, j);
        for (int j = 0; j < cb; ++j) out.at(i, ca + j) = b.at(i, j);
    }
    return out;
}

Tensor gather_cols(const Tensor& x, const std::vector<int>& idx) {
    if (x.rank() != 2) throw DimensionError("gather: tensor must be rank 2");
    const int r = x.rows(), c = x.cols();
    for (int j : idx) {
        if (j < 0 || j >= c) throw DimensionError("gather: column index out of range");
    }
    Tensor out({r, static_cast<int>(idx.size())});
    for (int i = 0; i < r; ++i) {
        for (size_t j = 0; j < idx.size(); ++j) {
            out.at(i, static_cast<int>(j)) = x.at(i, idx[j]);
        }
    }
    return out;
}

} // namespace tmath
} // namespace gin
