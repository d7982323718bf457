#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "attack/engine.hpp"
#include "attack/records.hpp"
#include "data/pairing.hpp"

namespace caa::eval {

struct ProtocolOptions {
    int pairs_per_class = 0; // 0 = every non-target-class test sample
    std::uint64_t master_seed = 1;
    double eta = 0.0;
    double epsilon = 1e-2;
    bool paper_update_rule = false;
    std::vector<attack::PipelineVariant> variants = {
        attack::PipelineVariant::Image, attack::PipelineVariant::Cls,
        attack::PipelineVariant::AeToDenoised, attack::PipelineVariant::AeFromDenoised};
    int batch_size = 250;
    int run_index = 1;
};

struct EvalModelRef {
    std::string name;
    const zoo::SplitClassifier* model = nullptr;
};

struct VariantRun {
    attack::PipelineVariant variant = attack::PipelineVariant::Image;
    std::vector<attack::OutcomeRecord> records;
    nn::Tensor xa_images; // [R,1,32,32] aligned with records
    // per evaluation model: predicted class per record (scored on the exact
    // same xa_images bytes)
    std::map<std::string, std::vector<int>> eval_preds;
};

struct ProtocolRun {
    std::string dataset;
    int run_index = 1;
    std::uint64_t master_seed = 0;
    std::string attacked_hash;
    std::map<std::string, std::string> eval_hashes;
    std::vector<VariantRun> variants;
};

// Full per-class protocol: every test sample of a class != c paired with a
// random class-c sample, attacked once per variant, classified by M and by
// every evaluation model on the identical adversarial bytes.
ProtocolRun run_protocol(const data::StandardizedSet& test_set,
                         const attack::ModelRefs& models,
                         const std::vector<EvalModelRef>& eval_models,
                         const ProtocolOptions& opts);

} // namespace caa::eval
