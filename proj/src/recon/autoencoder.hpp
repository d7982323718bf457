#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/layers.hpp"
#include "recon/latent.hpp"
#include "zoo/arch.hpp"

namespace caa::data {
struct StandardizedSet;
}

namespace caa::recon {

// Builds the standard reconstruction decoder: 5x5 transposed convolutions
// doubling the spatial size until 32x32 (widths halving per stage), then a
// linear 5x5 convolution down to one channel.
nn::Sequential build_reconstruction_decoder(const std::vector<int>& code_shape);

// Image autoencoder (E, R'): the encoder shares the classifier head
// architecture, the decoder is the reconstruction stack above. Trained purely
// for reconstruction.
class Autoencoder {
public:
    Autoencoder(const zoo::ArchitectureSpec& encoder_arch, std::uint64_t init_seed);

    const std::vector<int>& latent_shape() const { return latent_shape_; }
    std::uint64_t init_seed() const { return init_seed_; }
    const zoo::ArchitectureSpec& encoder_arch() const { return arch_; }

    nn::Sequential& encoder() { return encoder_; }
    nn::Sequential& decoder() { return decoder_; }
    const nn::Sequential& encoder() const { return encoder_; }
    const nn::Sequential& decoder() const { return decoder_; }

    // Batched inference paths; inputs [N,1,32,32] / codes [N,C,h,w].
    nn::Tensor encode_batch(const nn::Tensor& images) const;
    nn::Tensor decode_batch(const nn::Tensor& codes) const;

    // Tagged single-batch wrappers used by the attack pipelines.
    LatentCode encode(const nn::Tensor& images) const;
    nn::Tensor decode(const LatentCode& code) const;

    std::vector<nn::ParamRef> parameters();
    std::vector<nn::ParamRef> state();
    std::string param_hash() const;

    double holdout_error = -1.0; // mean per-image L2 on held-out data

private:
    zoo::ArchitectureSpec arch_;
    std::uint64_t init_seed_;
    std::vector<int> latent_shape_;
    mutable nn::Sequential encoder_;
    mutable nn::Sequential decoder_;
};

struct ReconTrainOptions {
    int epochs = 64;
    double lr = 1e-3;
    int batch_size = 250;
    std::uint64_t seed = 1;
    int max_train_samples = 0;   // 0 = all
    double holdout_fraction = 0.05;
};

struct ReconReport {
    std::vector<double> epoch_loss; // training MSE per epoch
    double holdout_l2 = 0.0;        // mean per-image L2 on the held-out tail
    double seconds = 0.0;
};

ReconReport train_autoencoder(Autoencoder& ae, const data::StandardizedSet& data,
                              const ReconTrainOptions& opts);

// R'(E(X)) for every image, in batches.
nn::Tensor reconstruct_batched(const Autoencoder& ae, const nn::Tensor& images, int batch);

// Mean per-image L2 reconstruction error over a set of images.
double mean_reconstruction_l2(const Autoencoder& ae, const nn::Tensor& images, int batch = 500);

} // namespace caa::recon
