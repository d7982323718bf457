#pragma once

#include <cstdint>
#include <vector>

#include "nn/tensor.hpp"

namespace caa::nn {

// Row-wise softmax of logits [N,K]; each row computed with a double
// accumulator so outputs sum to 1 well within the 1e-5 simplex tolerance.
Tensor softmax(const Tensor& logits);

struct LossGrad {
    double loss = 0.0;
    Tensor grad; // d(loss)/d(input), already divided by batch size
};

LossGrad cross_entropy(const Tensor& logits, const std::vector<std::uint8_t>& labels);
LossGrad mse(const Tensor& pred, const Tensor& target);

} // namespace caa::nn
