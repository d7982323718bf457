#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "nn/layers.hpp"
#include "zoo/arch.hpp"

namespace caa::zoo {

struct SplitSpec {
    bool use_default = true; // resolve to the activation after the last conv unit
    int explicit_index = -1;

    static SplitSpec default_split() { return {}; }
    static SplitSpec at(int index) { return {false, index}; }
};

// A classifier with a designated split index t. The head runs units [0, t],
// the tail units [t+1, end) plus a softmax stage. The monolithic forward is a
// single pass over all units, so head/tail agreement is a real invariant, not
// an identity.
class SplitClassifier {
public:
    SplitClassifier(const ArchitectureSpec& arch, SplitSpec split, std::uint64_t init_seed);

    const ArchitectureSpec& arch() const { return arch_; }
    int split_index() const { return split_index_; }
    int unit_count() const { return net_.size(); }
    const std::vector<int>& code_shape() const { return code_shape_; }
    std::uint64_t init_seed() const { return init_seed_; }

    nn::Sequential& net() { return net_; }
    const nn::Sequential& net() const { return net_; }

    // Probability vectors over classes (rows sum to 1).
    nn::Tensor forward(const nn::Tensor& x) const;
    // Raw logits; used by the training loop.
    nn::Tensor logits_train(const nn::Tensor& x);
    nn::Tensor forward_head(const nn::Tensor& x) const;
    nn::Tensor forward_tail(const nn::Tensor& code) const;

    std::vector<int> predict(const nn::Tensor& x, int batch = 500) const;
    double evaluate_accuracy(const data::StandardizedSet& set, int batch = 500) const;

    std::vector<nn::ParamRef> parameters();
    std::vector<nn::ParamRef> state();
    // SHA-256 over all parameter and state bytes in canonical order; the
    // identity used to bind activation decoders to their classifier.
    std::string param_hash() const;

private:
    ArchitectureSpec arch_;
    int split_index_;
    std::uint64_t init_seed_;
    std::vector<int> code_shape_;
    mutable nn::Sequential net_;
};

SplitClassifier build(const ArchitectureSpec& arch, SplitSpec split = SplitSpec::default_split(),
                      std::uint64_t init_seed = 1);

std::int64_t parameter_count(SplitClassifier& model);

} // namespace caa::zoo
