#include "recon/autoencoder.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "data/dataset.hpp"
#include "nn/init.hpp"
#include "nn/loss.hpp"
#include "nn/optim.hpp"

namespace caa::recon {

namespace {

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("CAA_LOG");
        return !(v && std::string(v) == "0");
    }();
    return on;
}

// vgg-style feature units up to and including the last conv block.
nn::Sequential build_encoder(const zoo::ArchitectureSpec& spec, std::vector<int>& latent_shape) {
    zoo::BuiltNet built = zoo::build_network(spec);
    nn::Sequential enc;
    for (int i = 0; i <= built.default_split_index; ++i) {
        // Rebuilding would lose initialization; instead the caller re-inits, so
        // moving units out of the built network is safe here.
        enc.append(std::move(built.net.take(i)));
    }
    latent_shape = zoo::unit_output_shape(spec, built.default_split_index);
    return enc;
}

} // namespace

nn::Sequential build_reconstruction_decoder(const std::vector<int>& code_shape) {
    if (code_shape.size() != 3)
        raise(ErrorKind::Config, "reconstruction decoder needs a [C,H,W] code shape");
    const int c0 = code_shape[0];
    int hw = code_shape[1];
    if (code_shape[1] != code_shape[2] || hw < 1 || 32 % hw != 0)
        raise(ErrorKind::Config, "unsupported code spatial size for decoder");

    nn::Sequential dec;
    int c = c0;
    while (hw < 32) {
        const int next_c = std::max(8, c / 2);
        dec.append(std::make_unique<nn::ConvTranspose2d>(c, next_c, 5, 2, 2, 1));
        dec.append(std::make_unique<nn::BatchNorm2d>(next_c));
        dec.append(std::make_unique<nn::ReLU>());
        c = next_c;
        hw *= 2;
    }
    // final linear layer: standardized pixels are unbounded, so no squashing
    dec.append(std::make_unique<nn::Conv2d>(c, 1, 5, 1, 2));
    return dec;
}

Autoencoder::Autoencoder(const zoo::ArchitectureSpec& encoder_arch, std::uint64_t init_seed)
    : arch_(encoder_arch), init_seed_(init_seed) {
    encoder_ = build_encoder(arch_, latent_shape_);
    decoder_ = build_reconstruction_decoder(latent_shape_);
    nn::init_parameters(encoder_, child_seed(init_seed, "encoder"));
    nn::init_parameters(decoder_, child_seed(init_seed, "decoder"));
}

nn::Tensor Autoencoder::encode_batch(const nn::Tensor& images) const {
    if (images.ndim() != 4 || images.dim(1) != 1 || images.dim(2) != 32 || images.dim(3) != 32)
        raise(ErrorKind::Config, "autoencoder expects [N,1,32,32] input, got " +
                                     images.shape_str());
    return encoder_.forward_range(images, 0, encoder_.size(), false);
}

nn::Tensor Autoencoder::decode_batch(const nn::Tensor& codes) const {
    std::vector<int> expect = latent_shape_;
    expect.insert(expect.begin(), codes.ndim() ? codes.dim(0) : 0);
    if (codes.shape() != expect)
        raise(ErrorKind::Input, "decode: code shape " + codes.shape_str() +
                                    " does not match latent shape");
    return decoder_.forward_range(codes, 0, decoder_.size(), false);
}

LatentCode Autoencoder::encode(const nn::Tensor& images) const {
    LatentCode code;
    code.values = encode_batch(images);
    code.space = SpaceTag::Autoencoder;
    code.space_id = param_hash();
    return code;
}

nn::Tensor Autoencoder::decode(const LatentCode& code) const {
    if (code.space != SpaceTag::Autoencoder)
        raise(ErrorKind::Type, std::string("decode expects autoencoder codes, got ") +
                                   space_name(code.space));
    if (code.space_id != param_hash())
        raise(ErrorKind::Type, "decode: code belongs to a different autoencoder");
    return decode_batch(code.values);
}

std::vector<nn::ParamRef> Autoencoder::parameters() {
    std::vector<nn::ParamRef> refs;
    encoder_.collect_params("encoder.", refs);
    decoder_.collect_params("decoder.", refs);
    return refs;
}

std::vector<nn::ParamRef> Autoencoder::state() {
    std::vector<nn::ParamRef> refs;
    encoder_.collect_state("encoder.", refs);
    decoder_.collect_state("decoder.", refs);
    return refs;
}

std::string Autoencoder::param_hash() const {
    Sha256 h;
    std::vector<nn::ParamRef> refs;
    encoder_.collect_params("encoder.", refs);
    decoder_.collect_params("decoder.", refs);
    encoder_.collect_state("encoder.", refs);
    decoder_.collect_state("decoder.", refs);
    for (auto& r : refs) {
        h.update(r.name.data(), r.name.size());
        h.update(r.value->data(), std::size_t(r.value->numel()) * sizeof(float));
    }
    return to_hex(h.digest());
}

ReconReport train_autoencoder(Autoencoder& ae, const data::StandardizedSet& data,
                              const ReconTrainOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    int n = data.count();
    if (n < 2) raise(ErrorKind::Protocol, "autoencoder training needs at least 2 samples");
    if (opts.max_train_samples > 0) n = std::min(n, opts.max_train_samples);

    int holdout = std::clamp(int(n * opts.holdout_fraction), 1, 2000);
    if (holdout >= n) holdout = std::max(1, n / 5);
    const int n_train = n - holdout;

    std::vector<nn::ParamRef> params = ae.parameters();
    nn::Adam opt(params, float(opts.lr));

    ReconReport report;
    std::vector<int> order(std::size_t(n_train));
    std::iota(order.begin(), order.end(), 0);
    const std::int64_t img = 32 * 32;

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        Rng rng = make_rng(child_seed(opts.seed, std::uint64_t(epoch) + 1));
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n_train; start += opts.batch_size) {
            const int bn = std::min(opts.batch_size, n_train - start);
            if (bn < 2) break;
            nn::Tensor xb({bn, 1, 32, 32});
            for (int i = 0; i < bn; ++i) {
                const int src = order[std::size_t(start + i)];
                std::copy(data.images.data() + src * img, data.images.data() + (src + 1) * img,
                          xb.data() + std::int64_t(i) * img);
            }
            ae.encoder().zero_grad();
            ae.decoder().zero_grad();
            nn::Tensor code = ae.encoder().forward_range(xb, 0, ae.encoder().size(), true);
            nn::Tensor rec = ae.decoder().forward_range(code, 0, ae.decoder().size(), true);
            auto lg = nn::mse(rec, xb);
            if (!std::isfinite(lg.loss))
                raise(ErrorKind::Training,
                      "autoencoder training diverged at epoch " + std::to_string(epoch));
            nn::Tensor dcode = ae.decoder().backward(lg.grad);
            ae.encoder().backward(dcode);
            opt.step();
            epoch_loss += lg.loss;
            ++batches;
        }
        epoch_loss /= std::max(1, batches);
        report.epoch_loss.push_back(epoch_loss);
        if (log_enabled())
            std::fprintf(stderr, "[caa] autoencoder epoch %d/%d mse %.5f\n", epoch + 1,
                         opts.epochs, epoch_loss);
    }
    ae.encoder().clear_cache();
    ae.decoder().clear_cache();

    // held-out reconstruction error (mean per-image L2)
    nn::Tensor hx({holdout, 1, 32, 32});
    std::copy(data.images.data() + std::int64_t(n_train) * img,
              data.images.data() + std::int64_t(n) * img, hx.data());
    report.holdout_l2 = mean_reconstruction_l2(ae, hx);
    ae.holdout_error = report.holdout_l2;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (log_enabled())
        std::fprintf(stderr, "[caa] autoencoder holdout mean L2 %.3f\n", report.holdout_l2);
    return report;
}

nn::Tensor reconstruct_batched(const Autoencoder& ae, const nn::Tensor& images, int batch) {
    if (images.ndim() != 4 || images.dim(1) != 1 || images.dim(2) != 32 || images.dim(3) != 32)
        raise(ErrorKind::Config,
              "autoencoder input shape mismatch: expected [N,1,32,32], got " +
                  images.shape_str());
    const int n = images.dim(0);
    const std::int64_t img = 32 * 32;
    nn::Tensor out(images.shape());
    for (int start = 0; start < n; start += batch) {
        const int bn = std::min(batch, n - start);
        nn::Tensor xb({bn, 1, 32, 32});
        std::copy(images.data() + start * img, images.data() + (start + bn) * img, xb.data());
        nn::Tensor rec = ae.decode_batch(ae.encode_batch(xb));
        std::copy(rec.data(), rec.data() + rec.numel(), out.data() + start * img);
    }
    return out;
}

double mean_reconstruction_l2(const Autoencoder& ae, const nn::Tensor& images, int batch) {
    const int n = images.dim(0);
    if (n == 0) raise(ErrorKind::Protocol, "empty set");
    nn::Tensor rec = reconstruct_batched(ae, images, batch);
    const std::int64_t img = 32 * 32;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double d2 = 0.0;
        const float* a = images.data() + i * img;
        const float* b = rec.data() + i * img;
        for (std::int64_t j = 0; j < img; ++j) {
            const double d = double(a[j]) - b[j];
            d2 += d * d;
        }
        acc += std::sqrt(d2);
    }
    return acc / n;
}

} // namespace caa::recon
