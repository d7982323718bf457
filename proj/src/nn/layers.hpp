#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace caa::nn {

// Named view of a learnable parameter (or plain state when grad == nullptr).
struct ParamRef {
    std::string name;
    Tensor* value = nullptr;
    Tensor* grad = nullptr;
};

// Layers own their parameters and, after forward(train=true), the caches
// needed by backward. Training is single-writer per module instance; forward
// with train=false writes no member state and is safe to call concurrently.
class Module {
public:
    virtual ~Module() = default;

    virtual Tensor forward(const Tensor& x, bool train) = 0;
    virtual Tensor backward(const Tensor& dy) = 0;

    virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {}
    virtual void collect_state(const std::string& prefix, std::vector<ParamRef>& out) {}
    virtual void zero_grad();
    virtual void clear_cache() {}

    virtual std::string kind() const = 0;
    // True for units whose output is a post-ReLU convolutional activation,
    // i.e. valid split targets when resolving the default split point.
    virtual bool conv_activation_unit() const { return false; }
};

using ModulePtr = std::unique_ptr<Module>;

// conv + batchnorm + relu fused into one unit so that architecture layer
// indices count conceptual blocks, not individual primitives.
class Conv2d : public Module {
public:
    Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias = true);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void clear_cache() override { cols_cache_.clear(); cols_cache_.shrink_to_fit(); }
    std::string kind() const override { return "conv2d"; }

    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }

    Tensor weight; // [out_c, in_c*k*k]
    Tensor bias;   // [out_c] (empty when disabled)
    Tensor weight_grad;
    Tensor bias_grad;

private:
    int in_c_, out_c_, k_, stride_, pad_;
    bool has_bias_;
    std::vector<float> cols_cache_; // im2col of the last training input
    int in_h_ = 0, in_w_ = 0, in_n_ = 0;
};

class ConvTranspose2d : public Module {
public:
    ConvTranspose2d(int in_c, int out_c, int kernel, int stride, int pad, int out_pad,
                    bool bias = true);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void clear_cache() override { x2d_cache_.clear(); x2d_cache_.shrink_to_fit(); }
    std::string kind() const override { return "conv_transpose2d"; }

    Tensor weight; // [in_c, out_c*k*k]
    Tensor bias;   // [out_c]
    Tensor weight_grad;
    Tensor bias_grad;

private:
    int in_c_, out_c_, k_, stride_, pad_, out_pad_;
    bool has_bias_;
    std::vector<float> x2d_cache_; // channel-major copy of the last training input
    int in_h_ = 0, in_w_ = 0, in_n_ = 0;
};

class BatchNorm2d : public Module {
public:
    explicit BatchNorm2d(int channels, float momentum = 0.1f, float eps = 1e-5f);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_state(const std::string& prefix, std::vector<ParamRef>& out) override;
    void clear_cache() override;
    std::string kind() const override { return "batchnorm2d"; }

    Tensor gamma, beta, gamma_grad, beta_grad;
    Tensor running_mean, running_var;

private:
    int channels_;
    float momentum_, eps_;
    Tensor xhat_cache_;
    std::vector<double> invstd_cache_;
};

class ReLU : public Module {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void clear_cache() override { output_cache_ = Tensor(); }
    std::string kind() const override { return "relu"; }

private:
    Tensor output_cache_;
};

class MaxPool2d : public Module {
public:
    explicit MaxPool2d(int kernel = 2, int stride = 2);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void clear_cache() override;
    std::string kind() const override { return "maxpool2d"; }

private:
    int k_, stride_;
    std::vector<int> input_shape_;
    std::vector<std::int64_t> argmax_cache_;
};

class Flatten : public Module {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    std::string kind() const override { return "flatten"; }

private:
    std::vector<int> input_shape_;
};

class Linear : public Module {
public:
    Linear(int in_f, int out_f);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void clear_cache() override { input_cache_ = Tensor(); }
    std::string kind() const override { return "linear"; }

    Tensor weight; // [out_f, in_f]
    Tensor bias;   // [out_f]
    Tensor weight_grad;
    Tensor bias_grad;

private:
    int in_f_, out_f_;
    Tensor input_cache_;
};

// conv3x3 -> bn -> relu as a single architecture unit.
class ConvBlock : public Module {
public:
    ConvBlock(int in_c, int out_c, int kernel = 3, int stride = 1, int pad = 1);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_state(const std::string& prefix, std::vector<ParamRef>& out) override;
    void zero_grad() override;
    void clear_cache() override;
    std::string kind() const override { return "conv_block"; }
    bool conv_activation_unit() const override { return true; }

    Conv2d conv;
    BatchNorm2d bn;
    ReLU relu;
};

// Basic two-conv residual block with optional projection shortcut.
class ResidualBlock : public Module {
public:
    ResidualBlock(int in_c, int out_c, int stride);

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_state(const std::string& prefix, std::vector<ParamRef>& out) override;
    void zero_grad() override;
    void clear_cache() override;
    std::string kind() const override { return "residual_block"; }
    bool conv_activation_unit() const override { return true; }

private:
    Conv2d conv1_;
    BatchNorm2d bn1_;
    Conv2d conv2_;
    BatchNorm2d bn2_;
    bool projected_;
    std::unique_ptr<Conv2d> proj_conv_;
    std::unique_ptr<BatchNorm2d> proj_bn_;
    Tensor relu1_out_, out_cache_, input_cache_shapeonly_;
};

// Global average over spatial dimensions: [N,C,H,W] -> [N,C].
class GlobalAvgPool : public Module {
public:
    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    std::string kind() const override { return "global_avg_pool"; }

private:
    std::vector<int> input_shape_;
};

class Sequential : public Module {
public:
    Sequential() = default;

    void append(ModulePtr m) { layers_.push_back(std::move(m)); }
    int size() const { return int(layers_.size()); }
    Module& at(int i) { return *layers_.at(std::size_t(i)); }
    const Module& at(int i) const { return *layers_.at(std::size_t(i)); }
    ModulePtr take(int i) { return std::move(layers_.at(std::size_t(i))); }

    Tensor forward(const Tensor& x, bool train) override;
    Tensor backward(const Tensor& dy) override;
    // Runs layers [from, to) only; used by split-classifier head/tail passes.
    Tensor forward_range(const Tensor& x, int from, int to, bool train);
    Tensor backward_range(const Tensor& dy, int from, int to);

    void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
    void collect_state(const std::string& prefix, std::vector<ParamRef>& out) override;
    void zero_grad() override;
    void clear_cache() override;
    std::string kind() const override { return "sequential"; }

private:
    std::vector<ModulePtr> layers_;
};

} // namespace caa::nn
