#include "nn/optim.hpp"

#include <cmath>

namespace caa::nn {

SgdMomentum::SgdMomentum(std::vector<ParamRef> params, float lr, float momentum,
                         float weight_decay)
    : Optimizer(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
    lr_ = lr;
    velocity_.reserve(params_.size());
    for (auto& p : params_) velocity_.emplace_back(p.value->shape());
}

void SgdMomentum::step() {
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        float* w = params_[pi].value->data();
        const float* g = params_[pi].grad->data();
        float* v = velocity_[pi].data();
        const std::int64_t n = params_[pi].value->numel();
        for (std::int64_t i = 0; i < n; ++i) {
            const float eff = g[i] + weight_decay_ * w[i];
            v[i] = momentum_ * v[i] + eff;
            w[i] -= lr_ * v[i];
        }
    }
}

Adam::Adam(std::vector<ParamRef> params, float lr, float beta1, float beta2, float eps)
    : Optimizer(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    lr_ = lr;
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto& p : params_) {
        m_.emplace_back(p.value->shape());
        v_.emplace_back(p.value->shape());
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(double(beta1_), double(t_));
    const double bc2 = 1.0 - std::pow(double(beta2_), double(t_));
    const float step_size = float(double(lr_) * std::sqrt(bc2) / bc1);
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
        float* w = params_[pi].value->data();
        const float* g = params_[pi].grad->data();
        float* m = m_[pi].data();
        float* v = v_[pi].data();
        const std::int64_t n = params_[pi].value->numel();
        for (std::int64_t i = 0; i < n; ++i) {
            m[i] = beta1_ * m[i] + (1.0f - beta1_) * g[i];
            v[i] = beta2_ * v[i] + (1.0f - beta2_) * g[i] * g[i];
            w[i] -= step_size * m[i] / (std::sqrt(v[i]) + eps_);
        }
    }
}

} // namespace caa::nn
