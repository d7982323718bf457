#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/layers.hpp"
#include "recon/latent.hpp"
#include "zoo/classifier.hpp"

namespace caa::data {
struct StandardizedSet;
}

namespace caa::recon {

struct ReconTrainOptions;
struct ReconReport;

// Decoder R inverting classifier activations: trained to minimize
// ||X - R(head(X))|| against a frozen classifier. Bound to that classifier by
// its parameter hash; loading or decoding against any other model is refused.
class ActivationDecoder {
public:
    ActivationDecoder(const std::vector<int>& code_shape, std::uint64_t init_seed);

    const std::vector<int>& code_shape() const { return code_shape_; }
    std::uint64_t init_seed() const { return init_seed_; }

    const std::string& bound_classifier_hash() const { return bound_hash_; }
    void bind(const std::string& classifier_hash) { bound_hash_ = classifier_hash; }
    bool is_bound() const { return !bound_hash_.empty(); }
    void require_bound_to(const zoo::SplitClassifier& classifier) const;

    nn::Sequential& decoder() { return decoder_; }
    const nn::Sequential& decoder() const { return decoder_; }

    nn::Tensor decode_batch(const nn::Tensor& codes) const;
    nn::Tensor decode(const LatentCode& code) const;

    std::vector<nn::ParamRef> parameters();
    std::vector<nn::ParamRef> state();
    std::string param_hash() const;

    double holdout_error = -1.0;

private:
    std::vector<int> code_shape_;
    std::uint64_t init_seed_;
    std::string bound_hash_;
    mutable nn::Sequential decoder_;
};

ReconReport train_activation_decoder(ActivationDecoder& dec,
                                     const zoo::SplitClassifier& classifier,
                                     const data::StandardizedSet& data,
                                     const ReconTrainOptions& opts);

// Tagged classifier-space encoding of a batch of images.
LatentCode encode_classifier(const zoo::SplitClassifier& classifier, const nn::Tensor& images);

// X' = R(head(X)): the class-information-only reconstruction.
nn::Tensor classifier_reconstruct(const ActivationDecoder& dec,
                                  const zoo::SplitClassifier& classifier,
                                  const nn::Tensor& images, int batch = 500);

} // namespace caa::recon
