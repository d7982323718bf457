#include "cfg/config.hpp"

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/sha256.hpp"

namespace caa::cfg {

using json = nlohmann::json;

namespace {

json sched_to_json(const ScheduleConfig& s) {
    json j;
    j["epochs"] = s.epochs;
    j["lr"] = s.lr;
    j["batch_size"] = s.batch_size;
    j["momentum"] = s.momentum;
    j["weight_decay"] = s.weight_decay;
    j["decay_factor"] = s.decay_factor;
    j["decay_epochs"] = s.decay_epochs;
    j["max_train_samples"] = s.max_train_samples;
    return j;
}

void sched_from_json(const json& j, ScheduleConfig& s) {
    s.epochs = j.value("epochs", s.epochs);
    s.lr = j.value("lr", s.lr);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.momentum = j.value("momentum", s.momentum);
    s.weight_decay = j.value("weight_decay", s.weight_decay);
    s.decay_factor = j.value("decay_factor", s.decay_factor);
    s.decay_epochs = j.value("decay_epochs", s.decay_epochs);
    s.max_train_samples = j.value("max_train_samples", s.max_train_samples);
}

} // namespace

double ExperimentConfig::resolved_eta() const {
    if (attack.eta > 0.0) return attack.eta;
    return dataset_id() == data::DatasetId::Mnist ? 25.0 : 15.0;
}

std::vector<attack::PipelineVariant> ExperimentConfig::resolved_variants() const {
    std::vector<attack::PipelineVariant> out;
    for (const auto& name : attack.variants) out.push_back(attack::variant_from_name(name));
    if (out.empty()) raise(ErrorKind::Config, "no attack variants configured");
    return out;
}

void ExperimentConfig::validate() const {
    dataset_id(); // raises on unknown names
    if (profile != "desk" && profile != "paper")
        raise(ErrorKind::Config, "unknown profile: " + profile);
    if (!(resolved_eta() > 0.0)) raise(ErrorKind::Config, "eta must be positive");
    if (!(attack.epsilon > 0.0 && attack.epsilon < 1.0))
        raise(ErrorKind::Config, "epsilon must be in (0,1)");
    resolved_variants();
    if (eval.n_runs < 1) raise(ErrorKind::Config, "n_runs must be at least 1");
    if (eval.pairs_per_class < 0) raise(ErrorKind::Config, "pairs_per_class must be >= 0");
    if (model.width_scale <= 0) raise(ErrorKind::Config, "width_scale must be positive");
    for (const auto& name : eval.eval_models)
        zoo::family_from_name(name);
}

ExperimentConfig ExperimentConfig::defaults(const std::string& dataset,
                                            const std::string& profile) {
    ExperimentConfig c;
    c.dataset = dataset.empty() ? "mnist" : dataset;
    c.profile = profile.empty() ? "desk" : profile;
    const bool mnist = c.dataset_id() == data::DatasetId::Mnist;

    if (c.profile == "paper") {
        c.model.width_scale = 1.0;
        c.classifier_sched = {64, 0.1, 128, 0.9, 5e-4, 0.1, {32, 48}, 0};
        c.eval_model_sched = c.classifier_sched;
        c.autoencoder_sched = {64, 1e-3, 128, 0.9, 0.0, 0.1, {}, 0};
        c.cladec_sched = c.autoencoder_sched;
        c.eval.pairs_per_class = 0; // the full ~9k per class
        c.eval.n_runs = 3;
    } else {
        // reduced-width, few-epoch profile sized for a small CPU box
        c.model.width_scale = 0.125;
        if (mnist) {
            c.classifier_sched = {2, 0.1, 250, 0.9, 5e-4, 0.1, {1}, 0};
            c.eval_model_sched = {2, 0.1, 250, 0.9, 5e-4, 0.1, {1}, 30000};
            c.autoencoder_sched = {3, 1e-3, 250, 0.9, 0.0, 0.1, {}, 20000};
            c.cladec_sched = {3, 1e-3, 250, 0.9, 0.0, 0.1, {}, 20000};
        } else {
            c.classifier_sched = {4, 0.1, 250, 0.9, 5e-4, 0.1, {3}, 0};
            c.eval_model_sched = {3, 0.1, 250, 0.9, 5e-4, 0.1, {2}, 30000};
            c.autoencoder_sched = {3, 1e-3, 250, 0.9, 0.0, 0.1, {}, 30000};
            c.cladec_sched = {3, 1e-3, 250, 0.9, 0.0, 0.1, {}, 30000};
        }
        c.eval.pairs_per_class = 500;
        c.eval.n_runs = 1;
    }
    return c;
}

std::string ExperimentConfig::to_json() const {
    json j;
    j["dataset"] = dataset;
    j["profile"] = profile;
    j["seed"] = seed;
    j["paths"] = {{"data_dir", paths.data_dir},
                  {"checkpoint_dir", paths.checkpoint_dir},
                  {"results_dir", paths.results_dir}};
    j["model"] = {{"width_scale", model.width_scale}, {"split", model.split}};
    j["train"] = {{"classifier", sched_to_json(classifier_sched)},
                  {"eval_model", sched_to_json(eval_model_sched)},
                  {"autoencoder", sched_to_json(autoencoder_sched)},
                  {"cladec", sched_to_json(cladec_sched)}};
    j["attack"] = {{"eta", attack.eta},
                   {"epsilon", attack.epsilon},
                   {"variants", attack.variants},
                   {"paper_update_rule", attack.paper_update_rule}};
    j["eval"] = {{"eval_models", eval.eval_models},
                 {"pairs_per_class", eval.pairs_per_class},
                 {"n_runs", eval.n_runs},
                 {"rank_based_test", eval.rank_based_test}};
    j["threads"] = threads;
    j["force"] = force;
    return j.dump(2);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Format, "malformed config JSON");

    const std::string dataset = j.value("dataset", "mnist");
    const std::string profile = j.value("profile", "desk");
    ExperimentConfig c = defaults(dataset, profile);

    c.seed = j.value("seed", c.seed);
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        c.paths.data_dir = p.value("data_dir", c.paths.data_dir);
        c.paths.checkpoint_dir = p.value("checkpoint_dir", c.paths.checkpoint_dir);
        c.paths.results_dir = p.value("results_dir", c.paths.results_dir);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        c.model.width_scale = m.value("width_scale", c.model.width_scale);
        c.model.split = m.value("split", c.model.split);
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        if (t.contains("classifier")) sched_from_json(t["classifier"], c.classifier_sched);
        if (t.contains("eval_model")) sched_from_json(t["eval_model"], c.eval_model_sched);
        if (t.contains("autoencoder")) sched_from_json(t["autoencoder"], c.autoencoder_sched);
        if (t.contains("cladec")) sched_from_json(t["cladec"], c.cladec_sched);
    }
    if (j.contains("attack")) {
        const auto& a = j["attack"];
        c.attack.eta = a.value("eta", c.attack.eta);
        c.attack.epsilon = a.value("epsilon", c.attack.epsilon);
        c.attack.variants = a.value("variants", c.attack.variants);
        c.attack.paper_update_rule = a.value("paper_update_rule", c.attack.paper_update_rule);
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        c.eval.eval_models = e.value("eval_models", c.eval.eval_models);
        c.eval.pairs_per_class = e.value("pairs_per_class", c.eval.pairs_per_class);
        c.eval.n_runs = e.value("n_runs", c.eval.n_runs);
        c.eval.rank_based_test = e.value("rank_based_test", c.eval.rank_based_test);
    }
    c.threads = j.value("threads", c.threads);
    c.force = j.value("force", c.force);
    c.validate();
    return c;
}

std::string ExperimentConfig::config_hash() const {
    const std::string text = to_json();
    return Sha256::hex(text.data(), text.size());
}

} // namespace caa::cfg
