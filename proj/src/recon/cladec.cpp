#include "recon/cladec.hpp"

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
#include "recon/autoencoder.hpp"

namespace caa::recon {

namespace {

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("CAA_LOG");
        return !(v && std::string(v) == "0");
    }();
    return on;
}

} // namespace

ActivationDecoder::ActivationDecoder(const std::vector<int>& code_shape,
                                     std::uint64_t init_seed)
    : code_shape_(code_shape), init_seed_(init_seed) {
    decoder_ = build_reconstruction_decoder(code_shape);
    nn::init_parameters(decoder_, child_seed(init_seed, "cladec"));
}

void ActivationDecoder::require_bound_to(const zoo::SplitClassifier& classifier) const {
    if (!is_bound())
        raise(ErrorKind::Config, "activation decoder is not bound to any classifier");
    if (bound_hash_ != classifier.param_hash())
        raise(ErrorKind::Integrity,
              "activation decoder is bound to a different classifier (expected " +
                  bound_hash_.substr(0, 12) + "...)");
}

nn::Tensor ActivationDecoder::decode_batch(const nn::Tensor& codes) const {
    std::vector<int> expect = code_shape_;
    expect.insert(expect.begin(), codes.ndim() ? codes.dim(0) : 0);
    if (codes.shape() != expect)
        raise(ErrorKind::Input, "activation decoder: code shape " + codes.shape_str() +
                                    " does not match layer-t shape");
    return decoder_.forward_range(codes, 0, decoder_.size(), false);
}

nn::Tensor ActivationDecoder::decode(const LatentCode& code) const {
    if (code.space != SpaceTag::ClassifierT)
        raise(ErrorKind::Type, std::string("activation decoder expects classifier codes, got ") +
                                   space_name(code.space));
    if (is_bound() && code.space_id != bound_hash_)
        raise(ErrorKind::Type, "activation decoder: code from a different classifier");
    return decode_batch(code.values);
}

std::vector<nn::ParamRef> ActivationDecoder::parameters() {
    std::vector<nn::ParamRef> refs;
    decoder_.collect_params("decoder.", refs);
    return refs;
}

std::vector<nn::ParamRef> ActivationDecoder::state() {
    std::vector<nn::ParamRef> refs;
    decoder_.collect_state("decoder.", refs);
    return refs;
}

std::string ActivationDecoder::param_hash() const {
    Sha256 h;
    std::vector<nn::ParamRef> refs;
    decoder_.collect_params("decoder.", refs);
    decoder_.collect_state("decoder.", refs);
    for (auto& r : refs) {
        h.update(r.name.data(), r.name.size());
        h.update(r.value->data(), std::size_t(r.value->numel()) * sizeof(float));
    }
    return to_hex(h.digest());
}

ReconReport train_activation_decoder(ActivationDecoder& dec,
                                     const zoo::SplitClassifier& classifier,
                                     const data::StandardizedSet& data,
                                     const ReconTrainOptions& opts) {
    if (dec.code_shape() != classifier.code_shape())
        raise(ErrorKind::Config, "decoder code shape does not match classifier layer-t shape");

    const auto t_start = std::chrono::steady_clock::now();
    int n = data.count();
    if (n < 2) raise(ErrorKind::Protocol, "decoder training needs at least 2 samples");
    if (opts.max_train_samples > 0) n = std::min(n, opts.max_train_samples);

    int holdout = std::clamp(int(n * opts.holdout_fraction), 1, 2000);
    if (holdout >= n) holdout = std::max(1, n / 5);
    const int n_train = n - holdout;

    std::vector<nn::ParamRef> params = dec.parameters();
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
            // classifier stays frozen: activations come from the inference path
            nn::Tensor code = classifier.forward_head(xb);
            dec.decoder().zero_grad();
            nn::Tensor rec = dec.decoder().forward_range(code, 0, dec.decoder().size(), true);
            auto lg = nn::mse(rec, xb);
            if (!std::isfinite(lg.loss))
                raise(ErrorKind::Training,
                      "decoder training diverged at epoch " + std::to_string(epoch));
            dec.decoder().backward(lg.grad);
            opt.step();
            epoch_loss += lg.loss;
            ++batches;
        }
        epoch_loss /= std::max(1, batches);
        report.epoch_loss.push_back(epoch_loss);
        if (log_enabled())
            std::fprintf(stderr, "[caa] activation decoder epoch %d/%d mse %.5f\n", epoch + 1,
                         opts.epochs, epoch_loss);
    }
    dec.decoder().clear_cache();
    dec.bind(classifier.param_hash());

    nn::Tensor hx({holdout, 1, 32, 32});
    std::copy(data.images.data() + std::int64_t(n_train) * img,
              data.images.data() + std::int64_t(n) * img, hx.data());
    nn::Tensor rec = classifier_reconstruct(dec, classifier, hx);
    double acc = 0.0;
    for (int i = 0; i < holdout; ++i) {
        double d2 = 0.0;
        for (std::int64_t j = 0; j < img; ++j) {
            const double d = double(hx[i * img + j]) - rec[i * img + j];
            d2 += d * d;
        }
        acc += std::sqrt(d2);
    }
    report.holdout_l2 = acc / holdout;
    dec.holdout_error = report.holdout_l2;
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (log_enabled())
        std::fprintf(stderr, "[caa] activation decoder holdout mean L2 %.3f\n",
                     report.holdout_l2);
    return report;
}

LatentCode encode_classifier(const zoo::SplitClassifier& classifier, const nn::Tensor& images) {
    LatentCode code;
    code.values = classifier.forward_head(images);
    code.space = SpaceTag::ClassifierT;
    code.space_id = classifier.param_hash();
    return code;
}

nn::Tensor classifier_reconstruct(const ActivationDecoder& dec,
                                  const zoo::SplitClassifier& classifier,
                                  const nn::Tensor& images, int batch) {
    dec.require_bound_to(classifier);
    const int n = images.dim(0);
    const std::int64_t img = 32 * 32;
    nn::Tensor out(images.shape());
    for (int start = 0; start < n; start += batch) {
        const int bn = std::min(batch, n - start);
        nn::Tensor xb({bn, 1, 32, 32});
        std::copy(images.data() + start * img, images.data() + (start + bn) * img, xb.data());
        nn::Tensor rec = dec.decode_batch(classifier.forward_head(xb));
        std::copy(rec.data(), rec.data() + rec.numel(), out.data() + start * img);
    }
    return out;
}

} // namespace caa::recon
