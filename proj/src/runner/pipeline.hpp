#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cfg/config.hpp"
#include "cfg/manifest.hpp"
#include "data/dataset.hpp"
#include "eval/aggregate.hpp"
#include "recon/autoencoder.hpp"
#include "recon/cladec.hpp"
#include "zoo/checkpoint.hpp"
#include "zoo/classifier.hpp"

namespace caa::runner {

// Applies config.threads to the compute backend (idempotent).
void apply_threads(int threads);

// Canonical artifact names: "autoencoder", "classifier:vgg11",
// "classifier:vgg13", "classifier:resnet10", "cladec".
std::string checkpoint_path(const cfg::ExperimentConfig& config, const std::string& target);

// Trains the named artifact unless its checkpoint already exists (config.force
// retrains). Returns the checkpoint path. Raises a dependency error naming the
// missing prerequisite checkpoint.
std::string cmd_train(const cfg::ExperimentConfig& config, const std::string& target);

struct PreparedData {
    data::StandardizedSet train; // smoothed
    data::StandardizedSet test;  // smoothed
    data::StandardizationStats stats;
};

// Loads, resizes, standardizes and (if an autoencoder is given) smooths both
// splits.
PreparedData prepare_data(const cfg::ExperimentConfig& config,
                          const recon::Autoencoder* smoother);

struct LoadedModels {
    std::unique_ptr<recon::Autoencoder> autoencoder;
    std::unique_ptr<zoo::SplitClassifier> attacked; // vgg11
    std::unique_ptr<recon::ActivationDecoder> cladec;
    std::vector<std::pair<std::string, std::unique_ptr<zoo::SplitClassifier>>> eval_models;
    std::map<std::string, std::string> checkpoint_hashes;
};

// Loads every artifact the configured attack needs, verifying dataset tags
// and the decoder binding.
LoadedModels load_models(const cfg::ExperimentConfig& config, bool with_eval_models);

// Runs the attack protocol for every configured run and variant; writes
// JSON-lines records, adversarial-image blobs and a manifest. Returns the
// output directory. Skips work when the same config already produced outputs
// (config.force overwrites).
std::string cmd_attack(const cfg::ExperimentConfig& config);

// Scores records with the evaluation models (verifying adversarial-image
// hashes), aggregates the results table, and writes CSV/JSON plus a pairwise
// significance matrix. records_dir may be empty to mean the attack output
// directory for this config.
struct EvaluateResult {
    std::string table_csv_path;
    std::string table_json_path;
    std::string significance_json_path;
    eval::ResultsTable table;
};
EvaluateResult cmd_evaluate(const cfg::ExperimentConfig& config, std::string records_dir);

// Renders the qualitative grid from attack records. records_dir as above.
std::string cmd_render_grid(const cfg::ExperimentConfig& config, std::string records_dir,
                            int n_examples, std::string out_path);

std::string attack_output_dir(const cfg::ExperimentConfig& config);

const char* code_version();

} // namespace caa::runner
