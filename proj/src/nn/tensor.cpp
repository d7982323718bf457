#include "nn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace caa::nn {

std::int64_t shape_numel(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) {
        if (d < 0) raise(ErrorKind::InvalidArgument, "negative tensor dimension");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(std::size_t(shape_numel(shape_)), 0.0f);
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
    if (shape_numel(shape) != numel())
        raise(ErrorKind::InvalidArgument,
              "reshape element count mismatch: " + shape_str());
    Tensor t = *this;
    t.shape_ = std::move(shape);
    return t;
}

void Tensor::fill(float value) {
    for (auto& v : data_) v = value;
}

bool Tensor::all_finite() const {
    for (float v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ",";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

void add_inplace(Tensor& y, const Tensor& x) {
    if (!y.same_shape(x)) raise(ErrorKind::InvalidArgument, "add_inplace shape mismatch");
    float* yp = y.data();
    const float* xp = x.data();
    for (std::int64_t i = 0, n = y.numel(); i < n; ++i) yp[i] += xp[i];
}

void axpby(float a, const Tensor& x, float b, Tensor& y) {
    if (!y.same_shape(x)) raise(ErrorKind::InvalidArgument, "axpby shape mismatch");
    float* yp = y.data();
    const float* xp = x.data();
    for (std::int64_t i = 0, n = y.numel(); i < n; ++i) yp[i] = a * xp[i] + b * yp[i];
}

double l2_distance(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) raise(ErrorKind::InvalidArgument, "l2_distance shape mismatch");
    double acc = 0.0;
    const float* ap = a.data();
    const float* bp = b.data();
    for (std::int64_t i = 0, n = a.numel(); i < n; ++i) {
        double d = double(ap[i]) - double(bp[i]);
        acc += d * d;
    }
    return std::sqrt(acc);
}

double l2_norm(const Tensor& x) {
    double acc = 0.0;
    const float* xp = x.data();
    for (std::int64_t i = 0, n = x.numel(); i < n; ++i) acc += double(xp[i]) * double(xp[i]);
    return std::sqrt(acc);
}

} // namespace caa::nn
