#pragma once

#include <vector>

#include "nn/layers.hpp"

namespace caa::nn {

class Optimizer {
public:
    explicit Optimizer(std::vector<ParamRef> params) : params_(std::move(params)) {}
    virtual ~Optimizer() = default;
    virtual void step() = 0;

    void set_lr(float lr) { lr_ = lr; }
    float lr() const { return lr_; }

protected:
    std::vector<ParamRef> params_;
    float lr_ = 0.0f;
};

class SgdMomentum : public Optimizer {
public:
    SgdMomentum(std::vector<ParamRef> params, float lr, float momentum, float weight_decay);
    void step() override;

private:
    float momentum_, weight_decay_;
    std::vector<Tensor> velocity_;
};

class Adam : public Optimizer {
public:
    Adam(std::vector<ParamRef> params, float lr, float beta1 = 0.9f, float beta2 = 0.999f,
         float eps = 1e-8f);
    void step() override;

private:
    float beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace caa::nn
