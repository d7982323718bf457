#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace caa::nn {

// Dense row-major float32 tensor. All layer code assumes contiguous storage;
// views and broadcasting are intentionally absent.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<int> shape);
    Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, float value);

    const std::vector<int>& shape() const noexcept { return shape_; }
    int dim(int i) const { return shape_.at(std::size_t(i)); }
    int ndim() const noexcept { return int(shape_.size()); }
    std::int64_t numel() const noexcept { return std::int64_t(data_.size()); }

    float* data() noexcept { return data_.data(); }
    const float* data() const noexcept { return data_.data(); }
    float& operator[](std::int64_t i) { return data_[std::size_t(i)]; }
    float operator[](std::int64_t i) const { return data_[std::size_t(i)]; }

    // Reinterpret the buffer with a new shape of equal element count.
    Tensor reshaped(std::vector<int> shape) const;
    void fill(float value);
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    std::string shape_str() const;

private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

std::int64_t shape_numel(const std::vector<int>& shape);

// y += x (shapes must match)
void add_inplace(Tensor& y, const Tensor& x);
// y = a*x + b*y elementwise
void axpby(float a, const Tensor& x, float b, Tensor& y);
// Euclidean norm of (a - b), accumulated in double.
double l2_distance(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& x);

} // namespace caa::nn
