#include "zoo/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "nn/loss.hpp"
#include "nn/optim.hpp"

namespace caa::zoo {

namespace {

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("CAA_LOG");
        return !(v && std::string(v) == "0");
    }();
    return on;
}

} // namespace

void TrainingSchedule::validate() const {
    if (epochs < 0) raise(ErrorKind::Config, "epochs must be non-negative");
    if (initial_lr <= 0) raise(ErrorKind::Config, "initial_lr must be positive");
    if (batch_size < 2) raise(ErrorKind::Config, "batch_size must be at least 2");
    for (std::size_t i = 0; i < decay_epochs.size(); ++i) {
        if (decay_epochs[i] >= epochs)
            raise(ErrorKind::Config, "decay epoch " + std::to_string(decay_epochs[i]) +
                                         " not below epochs=" + std::to_string(epochs));
        if (i > 0 && decay_epochs[i] <= decay_epochs[i - 1])
            raise(ErrorKind::Config, "decay_epochs must be strictly increasing");
    }
}

TrainReport train_classifier(SplitClassifier& model, const data::StandardizedSet& data,
                             const TrainingSchedule& sched) {
    sched.validate();
    const auto t_start = std::chrono::steady_clock::now();

    int n = data.count();
    if (n == 0) raise(ErrorKind::Protocol, "empty training set");
    if (sched.max_train_samples > 0) n = std::min(n, sched.max_train_samples);

    std::vector<nn::ParamRef> params = model.parameters();
    nn::SgdMomentum opt(params, float(sched.initial_lr), float(sched.momentum),
                        float(sched.weight_decay));

    TrainReport report;
    std::vector<int> order(std::size_t(n));
    std::iota(order.begin(), order.end(), 0);

    const std::int64_t img = 32 * 32;
    for (int epoch = 0; epoch < sched.epochs; ++epoch) {
        double lr = sched.initial_lr;
        for (int de : sched.decay_epochs)
            if (epoch >= de) lr *= sched.decay_factor;
        opt.set_lr(float(lr));

        Rng rng = make_rng(child_seed(sched.seed, std::uint64_t(epoch) + 1));
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n; start += sched.batch_size) {
            const int bn = std::min(sched.batch_size, n - start);
            if (bn < 2) break; // a 1-sample batch has no batch statistics
            nn::Tensor xb({bn, 1, 32, 32});
            std::vector<std::uint8_t> yb(std::size_t(bn));
            for (int i = 0; i < bn; ++i) {
                const int src = order[std::size_t(start + i)];
                std::copy(data.images.data() + src * img, data.images.data() + (src + 1) * img,
                          xb.data() + std::int64_t(i) * img);
                yb[std::size_t(i)] = data.labels[std::size_t(src)];
            }
            model.net().zero_grad();
            nn::Tensor logits = model.logits_train(xb);
            auto lg = nn::cross_entropy(logits, yb);
            if (!std::isfinite(lg.loss))
                raise(ErrorKind::Training,
                      "training diverged (non-finite loss) at epoch " + std::to_string(epoch));
            model.net().backward(lg.grad);
            opt.step();
            epoch_loss += lg.loss;
            ++batches;
        }
        epoch_loss /= std::max(1, batches);
        report.epoch_loss.push_back(epoch_loss);
        if (log_enabled())
            std::fprintf(stderr, "[caa] %s epoch %d/%d lr %.4f loss %.4f\n",
                         family_name(model.arch().family), epoch + 1, sched.epochs, lr,
                         epoch_loss);
    }
    model.net().clear_cache();
    report.final_loss = report.epoch_loss.empty() ? 0.0 : report.epoch_loss.back();
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

} // namespace caa::zoo
