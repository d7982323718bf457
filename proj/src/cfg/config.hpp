#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attack/engine.hpp"
#include "data/dataset.hpp"

namespace caa::cfg {

struct ScheduleConfig {
    int epochs = 0;
    double lr = 0.0;
    int batch_size = 250;
    double momentum = 0.9;         // classifiers only
    double weight_decay = 5e-4;    // classifiers only
    double decay_factor = 0.1;     // classifiers only
    std::vector<int> decay_epochs; // classifiers only
    int max_train_samples = 0;     // 0 = all
};

struct ExperimentConfig {
    std::string dataset = "mnist";
    std::string profile = "desk"; // desk | paper
    std::uint64_t seed = 1;

    struct Paths {
        std::string data_dir = "data";
        std::string checkpoint_dir = "checkpoints";
        std::string results_dir = "results";
    } paths;

    struct Model {
        double width_scale = 0.125;
        std::string split = "second_last_conv_block"; // or an integer string
    } model;

    ScheduleConfig classifier_sched;
    ScheduleConfig eval_model_sched;
    ScheduleConfig autoencoder_sched;
    ScheduleConfig cladec_sched;

    struct Attack {
        double eta = 0.0; // 0 = dataset default (25 mnist, 15 fashion_mnist)
        double epsilon = 1e-2;
        std::vector<std::string> variants = {"image", "cls", "ae_to_denoised",
                                             "ae_from_denoised"};
        bool paper_update_rule = false;
    } attack;

    struct Eval {
        std::vector<std::string> eval_models = {"vgg13", "resnet10"};
        int pairs_per_class = 500;
        int n_runs = 1;
        bool rank_based_test = false;
    } eval;

    int threads = 0; // 0 = hardware default
    bool force = false; // overwrite existing outputs instead of skipping

    double resolved_eta() const;
    data::DatasetId dataset_id() const { return data::dataset_from_name(dataset); }
    std::vector<attack::PipelineVariant> resolved_variants() const;

    void validate() const;
    std::string to_json() const;
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig defaults(const std::string& dataset, const std::string& profile);

    // Stable hash of the canonical JSON form; used in run ids and manifests.
    std::string config_hash() const;
};

} // namespace caa::cfg
