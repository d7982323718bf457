#include "eval/protocol.hpp"

#include <cstdio>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace caa::eval {

namespace {

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("CAA_LOG");
        return !(v && std::string(v) == "0");
    }();
    return on;
}

constexpr std::int64_t kImg = 32 * 32;

} // namespace

ProtocolRun run_protocol(const data::StandardizedSet& test_set,
                         const attack::ModelRefs& models,
                         const std::vector<EvalModelRef>& eval_models,
                         const ProtocolOptions& opts) {
    if (!models.classifier) raise(ErrorKind::Config, "protocol requires the attacked model");
    if (test_set.count() == 0) raise(ErrorKind::Protocol, "protocol on empty test set");
    for (auto v : opts.variants) models.require_for(v);

    ProtocolRun run;
    run.dataset = data::dataset_name(test_set.dataset);
    run.run_index = opts.run_index;
    run.master_seed = opts.master_seed;
    run.attacked_hash = models.classifier->param_hash();
    for (const auto& em : eval_models) {
        if (!em.model) raise(ErrorKind::Config, "null evaluation model: " + em.name);
        run.eval_hashes[em.name] = em.model->param_hash();
    }

    // pair streams per class, capped deterministically from the front
    std::vector<data::PairStream> streams = data::full_pairing(test_set, opts.master_seed);
    std::vector<data::Pair> all_pairs;
    for (auto& s : streams) {
        std::size_t keep = s.pairs.size();
        if (opts.pairs_per_class > 0)
            keep = std::min<std::size_t>(keep, std::size_t(opts.pairs_per_class));
        all_pairs.insert(all_pairs.end(), s.pairs.begin(), s.pairs.begin() + long(keep));
    }
    const int total = int(all_pairs.size());

    for (auto variant : opts.variants) {
        VariantRun vr;
        vr.variant = variant;
        vr.xa_images = nn::Tensor({total, 1, 32, 32});
        vr.records.reserve(std::size_t(total));

        attack::AttackSpec spec;
        spec.variant = variant;
        spec.eta = opts.eta;
        spec.epsilon = opts.epsilon;
        spec.paper_update_rule = opts.paper_update_rule;

        for (int start = 0; start < total; start += opts.batch_size) {
            const int bn = std::min(opts.batch_size, total - start);
            nn::Tensor x_o({bn, 1, 32, 32}), x_t({bn, 1, 32, 32});
            std::vector<int> lab_o(std::size_t(bn)), lab_t(std::size_t(bn));
            for (int i = 0; i < bn; ++i) {
                const auto& p = all_pairs[std::size_t(start + i)];
                std::copy(test_set.image(p.original_index),
                          test_set.image(p.original_index) + kImg,
                          x_o.data() + std::int64_t(i) * kImg);
                std::copy(test_set.image(p.target_index),
                          test_set.image(p.target_index) + kImg,
                          x_t.data() + std::int64_t(i) * kImg);
                lab_o[std::size_t(i)] = p.original_label;
                lab_t[std::size_t(i)] = p.target_label;
            }
            auto outcomes = attack::run_attack_batch(spec, x_o, x_t, lab_o, lab_t, models);
            for (int i = 0; i < bn; ++i) {
                const auto& p = all_pairs[std::size_t(start + i)];
                const auto& oc = outcomes[std::size_t(i)];
                std::copy(oc.adversarial.data(), oc.adversarial.data() + kImg,
                          vr.xa_images.data() + std::int64_t(start + i) * kImg);
                attack::OutcomeRecord rec;
                rec.pair_id = start + i;
                rec.variant = attack::variant_name(variant);
                rec.b_star = oc.b_star;
                rec.d_orig = oc.dist_to_original;
                rec.d_target = oc.dist_to_target;
                rec.pred = oc.pred_class;
                rec.fooled = oc.fooled;
                rec.correct = oc.correct;
                rec.feasible = oc.feasible;
                rec.run_seed = opts.master_seed;
                rec.orig_index = p.original_index;
                rec.orig_label = p.original_label;
                rec.target_index = p.target_index;
                rec.target_label = p.target_label;
                rec.xa_sha256 = attack::hash_image_row(vr.xa_images, start + i);
                vr.records.push_back(std::move(rec));
            }
            if (log_enabled() && (start / opts.batch_size) % 5 == 0)
                std::fprintf(stderr, "[caa] attack %s %s: %d/%d pairs\n", run.dataset.c_str(),
                             attack::variant_name(variant), start + bn, total);
        }

        for (const auto& em : eval_models)
            vr.eval_preds[em.name] = em.model->predict(vr.xa_images);
        run.variants.push_back(std::move(vr));
    }
    return run;
}

} // namespace caa::eval
