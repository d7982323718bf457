#include "nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "core/error.hpp"

namespace caa::nn {

Tensor softmax(const Tensor& logits) {
    if (logits.ndim() != 2) raise(ErrorKind::Input, "softmax expects [N,K] logits");
    const int n = logits.dim(0), k = logits.dim(1);
    Tensor probs({n, k});
    for (int i = 0; i < n; ++i) {
        const float* row = logits.data() + std::int64_t(i) * k;
        float* out = probs.data() + std::int64_t(i) * k;
        float mx = row[0];
        for (int j = 1; j < k; ++j) mx = std::max(mx, row[j]);
        double denom = 0.0;
        for (int j = 0; j < k; ++j) denom += std::exp(double(row[j]) - mx);
        for (int j = 0; j < k; ++j) out[j] = float(std::exp(double(row[j]) - mx) / denom);
    }
    return probs;
}

LossGrad cross_entropy(const Tensor& logits, const std::vector<std::uint8_t>& labels) {
    const int n = logits.dim(0), k = logits.dim(1);
    if (int(labels.size()) != n) raise(ErrorKind::Input, "cross_entropy label count mismatch");
    LossGrad out;
    out.grad = Tensor({n, k});
    Tensor probs = softmax(logits);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const int y = labels[std::size_t(i)];
        if (y < 0 || y >= k) raise(ErrorKind::Input, "label out of range");
        const float* p = probs.data() + std::int64_t(i) * k;
        loss -= std::log(std::max(double(p[y]), 1e-12));
        float* g = out.grad.data() + std::int64_t(i) * k;
        for (int j = 0; j < k; ++j) g[j] = (p[j] - (j == y ? 1.0f : 0.0f)) / float(n);
    }
    out.loss = loss / n;
    return out;
}

LossGrad mse(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) raise(ErrorKind::Input, "mse shape mismatch");
    LossGrad out;
    out.grad = Tensor(pred.shape());
    const std::int64_t n = pred.numel();
    double loss = 0.0;
    const float* pp = pred.data();
    const float* tp = target.data();
    float* g = out.grad.data();
    for (std::int64_t i = 0; i < n; ++i) {
        const double d = double(pp[i]) - tp[i];
        loss += d * d;
        g[i] = float(2.0 * d / double(n));
    }
    out.loss = loss / double(n);
    return out;
}

} // namespace caa::nn
