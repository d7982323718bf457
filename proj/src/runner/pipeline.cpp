#include "runner/pipeline.hpp"

#include <cblas.h>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "core/sha256.hpp"
#include "data/pairing.hpp"
#include "eval/protocol.hpp"
#include "eval/stats.hpp"
#include "report/grid.hpp"
#include "zoo/train.hpp"

namespace caa::runner {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

#ifndef CAA_VERSION
#define CAA_VERSION "dev"
#endif

bool log_enabled() {
    static const bool on = [] {
        const char* v = std::getenv("CAA_LOG");
        return !(v && std::string(v) == "0");
    }();
    return on;
}

void log_line(const std::string& msg) {
    if (log_enabled()) std::fprintf(stderr, "[caa] %s\n", msg.c_str());
}

zoo::SplitSpec split_from_config(const cfg::ExperimentConfig& config) {
    if (config.model.split == "second_last_conv_block") return zoo::SplitSpec::default_split();
    try {
        return zoo::SplitSpec::at(std::stoi(config.model.split));
    } catch (const std::exception&) {
        raise(ErrorKind::Config, "model.split must be 'second_last_conv_block' or an integer");
    }
}

zoo::TrainingSchedule to_training_schedule(const cfg::ScheduleConfig& s, std::uint64_t seed) {
    zoo::TrainingSchedule sched;
    sched.epochs = s.epochs;
    sched.initial_lr = s.lr;
    sched.decay_factor = s.decay_factor;
    sched.decay_epochs = s.decay_epochs;
    sched.momentum = s.momentum;
    sched.weight_decay = s.weight_decay;
    sched.batch_size = s.batch_size;
    sched.max_train_samples = s.max_train_samples;
    sched.seed = seed;
    return sched;
}

recon::ReconTrainOptions to_recon_options(const cfg::ScheduleConfig& s, std::uint64_t seed) {
    recon::ReconTrainOptions opts;
    opts.epochs = s.epochs;
    opts.lr = s.lr;
    opts.batch_size = s.batch_size;
    opts.max_train_samples = s.max_train_samples;
    opts.seed = seed;
    return opts;
}

void require_dataset_match(const zoo::ArtifactInfo& info, const cfg::ExperimentConfig& config,
                           const std::string& path) {
    if (info.dataset != config.dataset)
        raise(ErrorKind::Integrity, "checkpoint " + path + " was trained on " + info.dataset +
                                        " but the config selects " + config.dataset);
}

struct DataCacheEntry {
    std::string key;
    std::shared_ptr<PreparedData> data;
};

} // namespace

void apply_threads(int threads) {
    static int applied = -1;
    int n = threads > 0 ? threads : int(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (applied == n) return;
    applied = n;
    // OpenMP owns parallelism; BLAS calls stay single-threaded inside the
    // deterministic partitioned GEMM wrapper.
    omp_set_num_threads(n);
    openblas_set_num_threads(1);
}

const char* code_version() { return CAA_VERSION; }

std::string checkpoint_path(const cfg::ExperimentConfig& config, const std::string& target) {
    std::string stem;
    if (target == "autoencoder")
        stem = "autoencoder";
    else if (target == "cladec")
        stem = "cladec";
    else if (target.rfind("classifier:", 0) == 0)
        stem = target.substr(std::string("classifier:").size());
    else
        raise(ErrorKind::Config, "unknown train target: " + target);
    return (fs::path(config.paths.checkpoint_dir) / config.dataset / (stem + ".caac"))
        .string();
}

PreparedData prepare_data(const cfg::ExperimentConfig& config,
                          const recon::Autoencoder* smoother) {
    PreparedData out;
    data::LabeledImageSet train_raw =
        data::load_labeled_set(config.paths.data_dir, config.dataset_id(), data::SplitTag::Train);
    data::LabeledImageSet test_raw =
        data::load_labeled_set(config.paths.data_dir, config.dataset_id(), data::SplitTag::Test);

    auto [train_std, stats] = data::preprocess(train_raw);
    auto [test_std, stats2] = data::preprocess(test_raw, stats);
    out.stats = stats;
    if (smoother) {
        out.train = data::smooth_with_autoencoder(train_std, *smoother);
        out.test = data::smooth_with_autoencoder(test_std, *smoother);
    } else {
        out.train = std::move(train_std);
        out.test = std::move(test_std);
    }
    return out;
}

std::string cmd_train(const cfg::ExperimentConfig& config, const std::string& target) {
    config.validate();
    apply_threads(config.threads);
    const std::string path = checkpoint_path(config, target);
    if (fs::exists(path) && !config.force) {
        log_line("checkpoint exists, skipping: " + path);
        return path;
    }
    const auto t_start = std::chrono::steady_clock::now();

    zoo::ArtifactInfo info;
    info.dataset = config.dataset;
    info.seed = config.seed;

    cfg::RunManifest manifest;
    manifest.command = "train " + target;
    manifest.config_json = config.to_json();
    manifest.config_hash = config.config_hash();
    manifest.code_version = CAA_VERSION;

    if (target == "autoencoder") {
        // trained on standardized (unsmoothed) data; it defines the smoothing
        PreparedData data = prepare_data(config, nullptr);
        zoo::ArchitectureSpec arch{zoo::Family::Vgg11, config.model.width_scale, 10};
        recon::Autoencoder ae(arch, child_seed(config.seed, "autoencoder"));
        auto report = recon::train_autoencoder(
            ae, data.train, to_recon_options(config.autoencoder_sched,
                                             child_seed(config.seed, "autoencoder.train")));
        info.epochs = config.autoencoder_sched.epochs;
        info.stats = data.stats;
        info.smoothed_inputs = false;
        zoo::save_autoencoder(path, ae, info);
        manifest.timings_seconds["train"] = report.seconds;
    } else if (target.rfind("classifier:", 0) == 0) {
        const std::string family = target.substr(std::string("classifier:").size());
        const std::string ae_path = checkpoint_path(config, "autoencoder");
        if (!fs::exists(ae_path))
            raise(ErrorKind::Dependency,
                  "training " + target + " requires the autoencoder checkpoint " + ae_path +
                      " (run: train autoencoder)");
        auto ae = zoo::load_autoencoder(ae_path);
        require_dataset_match(ae.info, config, ae_path);
        PreparedData data = prepare_data(config, ae.model.get());

        zoo::ArchitectureSpec arch{zoo::family_from_name(family), config.model.width_scale, 10};
        zoo::SplitClassifier model(arch, split_from_config(config),
                                   child_seed(config.seed, "classifier." + family));
        const auto& sched_cfg =
            family == "vgg11" ? config.classifier_sched : config.eval_model_sched;
        auto report = zoo::train_classifier(
            model, data.train,
            to_training_schedule(sched_cfg, child_seed(config.seed, "train." + family)));
        const double acc = model.evaluate_accuracy(data.test);
        log_line(target + " test accuracy " + std::to_string(acc));
        info.epochs = sched_cfg.epochs;
        info.stats = data.stats;
        info.smoothed_inputs = true;
        info.test_accuracy = acc;
        zoo::save_classifier(path, model, info);
        manifest.timings_seconds["train"] = report.seconds;
        manifest.checkpoint_hashes["autoencoder"] = Sha256::hex_of_file(ae_path);
    } else if (target == "cladec") {
        const std::string cls_path = checkpoint_path(config, "classifier:vgg11");
        if (!fs::exists(cls_path))
            raise(ErrorKind::Dependency,
                  "training cladec requires the classifier checkpoint " + cls_path +
                      " (run: train classifier:vgg11)");
        const std::string ae_path = checkpoint_path(config, "autoencoder");
        if (!fs::exists(ae_path))
            raise(ErrorKind::Dependency,
                  "training cladec requires the autoencoder checkpoint " + ae_path +
                      " (run: train autoencoder)");
        auto cls = zoo::load_classifier(cls_path);
        auto ae = zoo::load_autoencoder(ae_path);
        require_dataset_match(cls.info, config, cls_path);
        require_dataset_match(ae.info, config, ae_path);
        PreparedData data = prepare_data(config, ae.model.get());

        recon::ActivationDecoder dec(cls.model->code_shape(),
                                     child_seed(config.seed, "cladec"));
        auto report = recon::train_activation_decoder(
            dec, *cls.model, data.train,
            to_recon_options(config.cladec_sched, child_seed(config.seed, "cladec.train")));
        info.epochs = config.cladec_sched.epochs;
        info.stats = data.stats;
        info.smoothed_inputs = true;
        zoo::save_activation_decoder(path, dec, info);
        manifest.timings_seconds["train"] = report.seconds;
        manifest.checkpoint_hashes["classifier:vgg11"] = Sha256::hex_of_file(cls_path);
        manifest.checkpoint_hashes["autoencoder"] = Sha256::hex_of_file(ae_path);
    } else {
        raise(ErrorKind::Config, "unknown train target: " + target);
    }

    manifest.run_id = cfg::make_run_id(config);
    manifest.checkpoint_hashes[target] = Sha256::hex_of_file(path);
    manifest.outputs = {fs::path(path).filename().string()};
    manifest.timings_seconds["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    manifest.save(path + ".manifest.json");
    return path;
}

LoadedModels load_models(const cfg::ExperimentConfig& config, bool with_eval_models) {
    LoadedModels out;
    const std::string ae_path = checkpoint_path(config, "autoencoder");
    const std::string cls_path = checkpoint_path(config, "classifier:vgg11");
    const std::string dec_path = checkpoint_path(config, "cladec");
    for (const std::string& p : {ae_path, cls_path, dec_path})
        if (!fs::exists(p))
            raise(ErrorKind::Dependency, "missing checkpoint: " + p + " (run the train command)");

    auto ae = zoo::load_autoencoder(ae_path);
    auto cls = zoo::load_classifier(cls_path);
    require_dataset_match(ae.info, config, ae_path);
    require_dataset_match(cls.info, config, cls_path);
    auto dec = zoo::load_activation_decoder(dec_path, cls.model.get());
    require_dataset_match(dec.info, config, dec_path);

    out.checkpoint_hashes["autoencoder"] = Sha256::hex_of_file(ae_path);
    out.checkpoint_hashes["classifier:vgg11"] = Sha256::hex_of_file(cls_path);
    out.checkpoint_hashes["cladec"] = Sha256::hex_of_file(dec_path);
    out.autoencoder = std::move(ae.model);
    out.attacked = std::move(cls.model);
    out.cladec = std::move(dec.model);

    if (with_eval_models) {
        for (const auto& family : config.eval.eval_models) {
            const std::string p = checkpoint_path(config, "classifier:" + family);
            if (!fs::exists(p))
                raise(ErrorKind::Dependency, "missing evaluation model checkpoint: " + p);
            auto m = zoo::load_classifier(p);
            require_dataset_match(m.info, config, p);
            out.checkpoint_hashes["classifier:" + family] = Sha256::hex_of_file(p);
            out.eval_models.emplace_back(family, std::move(m.model));
        }
    }
    return out;
}

std::string attack_output_dir(const cfg::ExperimentConfig& config) {
    return (fs::path(config.paths.results_dir) / config.dataset /
            ("attack-" + config.config_hash().substr(0, 8)))
        .string();
}

std::string cmd_attack(const cfg::ExperimentConfig& config) {
    config.validate();
    apply_threads(config.threads);
    const std::string out_dir = attack_output_dir(config);
    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    if (fs::exists(manifest_path) && !config.force) {
        cfg::RunManifest existing = cfg::RunManifest::load(manifest_path);
        if (existing.config_hash == config.config_hash()) {
            log_line("attack outputs exist, skipping: " + out_dir);
            return out_dir;
        }
        raise(ErrorKind::Config,
              "output directory " + out_dir + " holds results for a different config; " +
                  "use force to overwrite");
    }
    const auto t_start = std::chrono::steady_clock::now();

    LoadedModels models = load_models(config, false);
    PreparedData data = prepare_data(config, models.autoencoder.get());

    attack::ModelRefs refs;
    refs.classifier = models.attacked.get();
    refs.cladec = models.cladec.get();
    refs.autoencoder = models.autoencoder.get();

    cfg::RunManifest manifest;
    manifest.run_id = cfg::make_run_id(config);
    manifest.command = "attack";
    manifest.config_json = config.to_json();
    manifest.config_hash = config.config_hash();
    manifest.code_version = CAA_VERSION;
    manifest.checkpoint_hashes = models.checkpoint_hashes;

    for (int run = 1; run <= config.eval.n_runs; ++run) {
        eval::ProtocolOptions opts;
        opts.pairs_per_class = config.eval.pairs_per_class;
        opts.master_seed = child_seed(config.seed, "attack.run." + std::to_string(run));
        opts.eta = config.resolved_eta();
        opts.epsilon = config.attack.epsilon;
        opts.paper_update_rule = config.attack.paper_update_rule;
        opts.variants = config.resolved_variants();
        opts.run_index = run;

        eval::ProtocolRun protocol = eval::run_protocol(data.test, refs, {}, opts);
        for (const auto& vr : protocol.variants) {
            const std::string stem =
                std::string("records_") + attack::variant_name(vr.variant) + "_run" +
                std::to_string(run);
            const std::string rec_path = (fs::path(out_dir) / (stem + ".jsonl")).string();
            attack::write_records_jsonl(rec_path, vr.records);
            attack::XaBlobWriter blob(attack::xa_path_for(rec_path));
            blob.append_rows(vr.xa_images);
            blob.close();
            manifest.outputs.push_back(stem + ".jsonl");
            manifest.outputs.push_back(stem + ".xa");
        }
    }
    manifest.timings_seconds["total"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    manifest.save(manifest_path);
    return out_dir;
}

namespace {

struct RecordsOnDisk {
    int run_index;
    attack::PipelineVariant variant;
    std::vector<attack::OutcomeRecord> records;
    std::string records_path;
};

std::vector<RecordsOnDisk> scan_records(const std::string& dir) {
    std::vector<RecordsOnDisk> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("records_", 0) != 0 || entry.path().extension() != ".jsonl") continue;
        const std::string stem = entry.path().stem().string(); // records_<variant>_run<r>
        const auto run_pos = stem.rfind("_run");
        if (run_pos == std::string::npos) continue;
        RecordsOnDisk r;
        r.run_index = std::stoi(stem.substr(run_pos + 4));
        r.variant = attack::variant_from_name(stem.substr(8, run_pos - 8));
        r.records_path = entry.path().string();
        r.records = attack::read_records_jsonl(r.records_path);
        out.push_back(std::move(r));
    }
    if (out.empty()) raise(ErrorKind::Io, "no record files found in " + dir);
    std::sort(out.begin(), out.end(), [](const RecordsOnDisk& a, const RecordsOnDisk& b) {
        if (a.run_index != b.run_index) return a.run_index < b.run_index;
        return int(a.variant) < int(b.variant);
    });
    return out;
}

} // namespace

EvaluateResult cmd_evaluate(const cfg::ExperimentConfig& config, std::string records_dir) {
    config.validate();
    apply_threads(config.threads);
    if (records_dir.empty()) records_dir = attack_output_dir(config);
    if (!fs::exists(records_dir)) raise(ErrorKind::Io, "records directory not found: " + records_dir);

    // hash-link check: the checkpoints named by the attack manifest must be
    // the ones on disk now
    const std::string manifest_path = (fs::path(records_dir) / "manifest.json").string();
    cfg::RunManifest attack_manifest;
    if (fs::exists(manifest_path)) {
        attack_manifest = cfg::RunManifest::load(manifest_path);
        for (const auto& [artifact, hash] : attack_manifest.checkpoint_hashes) {
            const std::string p = checkpoint_path(config, artifact);
            if (!fs::exists(p) || Sha256::hex_of_file(p) != hash)
                raise(ErrorKind::Integrity,
                      "checkpoint " + artifact + " changed since the records in " +
                          records_dir + " were produced");
        }
    }

    LoadedModels models = load_models(config, true);

    std::vector<RecordsOnDisk> on_disk = scan_records(records_dir);

    // run index -> ProtocolRun
    std::map<int, eval::ProtocolRun> runs;
    for (auto& rd : on_disk) {
        nn::Tensor xa = attack::read_xa_blob(attack::xa_path_for(rd.records_path));
        if (xa.dim(0) != int(rd.records.size()))
            raise(ErrorKind::Corruption, "blob/record count mismatch for " + rd.records_path);
        // transfer integrity: the scored bytes must be the recorded bytes
        for (std::size_t i = 0; i < rd.records.size(); ++i)
            if (attack::hash_image_row(xa, int(i)) != rd.records[i].xa_sha256)
                raise(ErrorKind::Integrity,
                      "adversarial image hash mismatch at record " + std::to_string(i) +
                          " in " + rd.records_path);

        eval::VariantRun vr;
        vr.variant = rd.variant;
        vr.records = std::move(rd.records);
        vr.xa_images = std::move(xa);
        for (auto& [name, model] : models.eval_models)
            vr.eval_preds[name] = model->predict(vr.xa_images);

        auto& run = runs[rd.run_index];
        run.dataset = config.dataset;
        run.run_index = rd.run_index;
        run.attacked_hash = models.attacked->param_hash();
        for (auto& [name, model] : models.eval_models)
            run.eval_hashes[name] = model->param_hash();
        run.variants.push_back(std::move(vr));
    }

    std::vector<eval::ProtocolRun> run_list;
    for (auto& [idx, run] : runs) run_list.push_back(std::move(run));
    eval::ResultsTable table = eval::aggregate(run_list);

    // pairwise significance over records pooled across runs
    json sig = json::array();
    const auto variants = config.resolved_variants();
    for (auto metric : {eval::Metric::Acc, eval::Metric::DistToTarget}) {
        const char* metric_name = metric == eval::Metric::Acc ? "acc" : "dist_to_target";
        for (std::size_t i = 0; i < variants.size(); ++i) {
            for (std::size_t j = i + 1; j < variants.size(); ++j) {
                std::vector<attack::OutcomeRecord> a, b;
                for (const auto& run : run_list)
                    for (const auto& vr : run.variants) {
                        if (vr.variant == variants[i])
                            a.insert(a.end(), vr.records.begin(), vr.records.end());
                        if (vr.variant == variants[j])
                            b.insert(b.end(), vr.records.begin(), vr.records.end());
                    }
                if (a.size() < 2 || b.size() < 2) continue;
                auto res = eval::significance(a, b, metric, config.eval.rank_based_test);
                json cell;
                cell["metric"] = metric_name;
                cell["variant_a"] = attack::variant_name(variants[i]);
                cell["variant_b"] = attack::variant_name(variants[j]);
                cell["statistic"] = res.statistic;
                cell["df"] = res.df;
                cell["p_value"] = res.p_value;
                sig.push_back(cell);
            }
        }
    }

    EvaluateResult result;
    result.table = std::move(table);
    const fs::path out_dir = fs::path(records_dir);
    result.table_csv_path = (out_dir / "table.csv").string();
    result.table_json_path = (out_dir / "table.json").string();
    result.significance_json_path = (out_dir / "significance.json").string();
    {
        std::ofstream csv(result.table_csv_path, std::ios::trunc);
        csv << eval::table_to_csv(result.table);
        std::ofstream js(result.table_json_path, std::ios::trunc);
        js << eval::table_to_json(result.table);
        std::ofstream sg(result.significance_json_path, std::ios::trunc);
        sg << sig.dump(2);
    }

    cfg::RunManifest manifest;
    manifest.run_id = cfg::make_run_id(config);
    manifest.command = "evaluate";
    manifest.config_json = config.to_json();
    manifest.config_hash = config.config_hash();
    manifest.code_version = CAA_VERSION;
    manifest.checkpoint_hashes = models.checkpoint_hashes;
    manifest.outputs = {"table.csv", "table.json", "significance.json"};
    manifest.save((out_dir / "evaluate.manifest.json").string());
    return result;
}

std::string cmd_render_grid(const cfg::ExperimentConfig& config, std::string records_dir,
                            int n_examples, std::string out_path) {
    config.validate();
    apply_threads(config.threads);
    if (records_dir.empty()) records_dir = attack_output_dir(config);
    if (out_path.empty()) out_path = (fs::path(records_dir) / "grid.png").string();

    LoadedModels models = load_models(config, false);
    PreparedData data = prepare_data(config, models.autoencoder.get());

    std::vector<RecordsOnDisk> on_disk = scan_records(records_dir);
    const attack::PipelineVariant order[] = {
        attack::PipelineVariant::Image, attack::PipelineVariant::Cls,
        attack::PipelineVariant::AeToDenoised, attack::PipelineVariant::AeFromDenoised};

    std::vector<report::VariantColumn> columns;
    for (auto v : order) {
        for (auto& rd : on_disk) {
            if (rd.variant != v || rd.run_index != 1) continue;
            report::VariantColumn col;
            col.variant = attack::variant_name(v);
            col.xa_images = attack::read_xa_blob(attack::xa_path_for(rd.records_path));
            col.records = std::move(rd.records);
            columns.push_back(std::move(col));
            break;
        }
    }

    report::GridOptions opts;
    opts.n_examples = n_examples;
    opts.seed = child_seed(config.seed, "render-grid");
    report::GrayImage img = render_grid(data.test, data.stats, columns, opts);
    report::write_png_gray(out_path, img);
    log_line("grid written: " + out_path);
    return out_path;
}

} // namespace caa::runner
