#include "zoo/classifier.hpp"

#include "core/error.hpp"
#include "core/sha256.hpp"
#include "nn/init.hpp"
#include "nn/loss.hpp"

namespace caa::zoo {

SplitClassifier::SplitClassifier(const ArchitectureSpec& arch, SplitSpec split,
                                 std::uint64_t init_seed)
    : arch_(arch), split_index_(0), init_seed_(init_seed) {
    BuiltNet built = build_network(arch);
    net_ = std::move(built.net);

    if (split.use_default) {
        split_index_ = built.default_split_index;
    } else {
        if (split.explicit_index < 0 || split.explicit_index >= net_.size())
            raise(ErrorKind::Config,
                  "split index " + std::to_string(split.explicit_index) +
                      " out of range [0," + std::to_string(net_.size()) + ")");
        split_index_ = split.explicit_index;
    }
    code_shape_ = unit_output_shape(arch_, split_index_);
    nn::init_parameters(net_, init_seed);
}

SplitClassifier build(const ArchitectureSpec& arch, SplitSpec split, std::uint64_t init_seed) {
    return SplitClassifier(arch, split, init_seed);
}

nn::Tensor SplitClassifier::forward(const nn::Tensor& x) const {
    return nn::softmax(net_.forward_range(x, 0, net_.size(), false));
}

nn::Tensor SplitClassifier::logits_train(const nn::Tensor& x) {
    return net_.forward_range(x, 0, net_.size(), true);
}

nn::Tensor SplitClassifier::forward_head(const nn::Tensor& x) const {
    if (x.ndim() != 4 || x.dim(1) != 1 || x.dim(2) != 32 || x.dim(3) != 32)
        raise(ErrorKind::Input, "forward_head expects [N,1,32,32], got " + x.shape_str());
    return net_.forward_range(x, 0, split_index_ + 1, false);
}

nn::Tensor SplitClassifier::forward_tail(const nn::Tensor& code) const {
    std::vector<int> expect = code_shape_;
    expect.insert(expect.begin(), code.ndim() ? code.dim(0) : 0);
    if (code.shape() != expect)
        raise(ErrorKind::Input, "forward_tail code shape " + code.shape_str() +
                                    " does not match layer-t shape");
    return nn::softmax(net_.forward_range(code, split_index_ + 1, net_.size(), false));
}

std::vector<int> SplitClassifier::predict(const nn::Tensor& x, int batch) const {
    const int n = x.dim(0);
    const std::int64_t img = x.numel() / n;
    std::vector<int> preds(std::size_t(n));
    for (int start = 0; start < n; start += batch) {
        const int bn = std::min(batch, n - start);
        nn::Tensor xb({bn, x.dim(1), x.dim(2), x.dim(3)});
        std::copy(x.data() + start * img, x.data() + (start + bn) * img, xb.data());
        nn::Tensor probs = forward(xb);
        const int k = probs.dim(1);
        for (int i = 0; i < bn; ++i) {
            const float* row = probs.data() + std::int64_t(i) * k;
            int best = 0;
            for (int j = 1; j < k; ++j)
                if (row[j] > row[best]) best = j;
            preds[std::size_t(start + i)] = best;
        }
    }
    return preds;
}

double SplitClassifier::evaluate_accuracy(const data::StandardizedSet& set, int batch) const {
    if (set.count() == 0) raise(ErrorKind::Protocol, "evaluate_accuracy on empty set");
    std::vector<int> preds = predict(set.images, batch);
    std::int64_t correct = 0;
    for (int i = 0; i < set.count(); ++i)
        if (preds[std::size_t(i)] == int(set.labels[std::size_t(i)])) ++correct;
    return double(correct) / set.count();
}

std::vector<nn::ParamRef> SplitClassifier::parameters() {
    std::vector<nn::ParamRef> refs;
    net_.collect_params("net.", refs);
    return refs;
}

std::vector<nn::ParamRef> SplitClassifier::state() {
    std::vector<nn::ParamRef> refs;
    net_.collect_state("net.", refs);
    return refs;
}

std::string SplitClassifier::param_hash() const {
    Sha256 h;
    std::vector<nn::ParamRef> refs;
    net_.collect_params("net.", refs);
    net_.collect_state("net.", refs);
    for (auto& r : refs) {
        h.update(r.name.data(), r.name.size());
        h.update(r.value->data(), std::size_t(r.value->numel()) * sizeof(float));
    }
    return to_hex(h.digest());
}

std::int64_t parameter_count(SplitClassifier& model) {
    std::int64_t n = 0;
    for (auto& r : model.parameters()) n += r.value->numel();
    return n;
}

} // namespace caa::zoo
