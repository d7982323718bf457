#include "caa/caa.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "cfg/config.hpp"
#include "core/error.hpp"
#include "runner/pipeline.hpp"
#include "zoo/checkpoint.hpp"

using caa::ErrorKind;

struct caa_config {
    caa::cfg::ExperimentConfig value;
};

struct caa_model {
    caa::zoo::ArtifactInfo info;
    std::string path;
};

namespace {

thread_local std::string g_last_error;

caa_status status_of(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return CAA_ERR_INVALID_ARGUMENT;
        case ErrorKind::Format: return CAA_ERR_FORMAT;
        case ErrorKind::Corruption: return CAA_ERR_CORRUPTION;
        case ErrorKind::Config: return CAA_ERR_CONFIG;
        case ErrorKind::DegenerateData: return CAA_ERR_DEGENERATE_DATA;
        case ErrorKind::Protocol: return CAA_ERR_PROTOCOL;
        case ErrorKind::Training: return CAA_ERR_TRAINING;
        case ErrorKind::Input: return CAA_ERR_INPUT;
        case ErrorKind::Numerical: return CAA_ERR_NUMERICAL;
        case ErrorKind::Type: return CAA_ERR_TYPE;
        case ErrorKind::Dependency: return CAA_ERR_DEPENDENCY;
        case ErrorKind::Integrity: return CAA_ERR_INTEGRITY;
        case ErrorKind::Io: return CAA_ERR_IO;
        case ErrorKind::Internal: return CAA_ERR_INTERNAL;
    }
    return CAA_ERR_INTERNAL;
}

template <typename Fn>
caa_status guarded(Fn&& fn) {
    try {
        fn();
        return CAA_OK;
    } catch (const caa::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CAA_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CAA_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

caa_status require(bool cond, const char* message) {
    if (cond) return CAA_OK;
    g_last_error = message;
    return CAA_ERR_INVALID_ARGUMENT;
}

} // namespace

extern "C" {

const char* caa_version(void) { return caa::runner::code_version(); }

const char* caa_last_error(void) { return g_last_error.c_str(); }

void caa_string_free(char* s) { std::free(s); }

caa_status caa_set_threads(int n) {
    return guarded([&] { caa::runner::apply_threads(n); });
}

caa_status caa_config_create(const char* dataset, const char* profile, caa_config_t** out) {
    if (auto s = require(out != nullptr, "out must not be null")) return s;
    return guarded([&] {
        auto cfg = caa::cfg::ExperimentConfig::defaults(dataset ? dataset : "mnist",
                                                        profile ? profile : "desk");
        cfg.validate();
        *out = new caa_config{std::move(cfg)};
    });
}

caa_status caa_config_from_json(const char* json_text, caa_config_t** out) {
    if (auto s = require(out != nullptr && json_text != nullptr,
                         "json_text and out must not be null"))
        return s;
    return guarded([&] {
        *out = new caa_config{caa::cfg::ExperimentConfig::from_json(json_text)};
    });
}

caa_status caa_config_merge_json(caa_config_t* config, const char* json_text) {
    if (auto s = require(config != nullptr && json_text != nullptr,
                         "config and json_text must not be null"))
        return s;
    return guarded([&] {
        nlohmann::json base = nlohmann::json::parse(config->value.to_json());
        nlohmann::json patch = nlohmann::json::parse(json_text, nullptr, false);
        if (patch.is_discarded())
            caa::raise(ErrorKind::Format, "malformed config patch JSON");
        base.merge_patch(patch);
        config->value = caa::cfg::ExperimentConfig::from_json(base.dump());
    });
}

caa_status caa_config_to_json(const caa_config_t* config, char** out_json) {
    if (auto s = require(config != nullptr && out_json != nullptr,
                         "config and out_json must not be null"))
        return s;
    return guarded([&] { *out_json = dup_string(config->value.to_json()); });
}

caa_status caa_config_set_seed(caa_config_t* config, uint64_t seed) {
    if (auto s = require(config != nullptr, "config must not be null")) return s;
    config->value.seed = seed;
    return CAA_OK;
}

void caa_config_destroy(caa_config_t* config) { delete config; }

caa_status caa_train(const caa_config_t* config, const char* target,
                     char** out_checkpoint_path) {
    if (auto s = require(config != nullptr && target != nullptr,
                         "config and target must not be null"))
        return s;
    return guarded([&] {
        const std::string path = caa::runner::cmd_train(config->value, target);
        if (out_checkpoint_path) *out_checkpoint_path = dup_string(path);
    });
}

caa_status caa_attack(const caa_config_t* config, char** out_records_dir) {
    if (auto s = require(config != nullptr, "config must not be null")) return s;
    return guarded([&] {
        const std::string dir = caa::runner::cmd_attack(config->value);
        if (out_records_dir) *out_records_dir = dup_string(dir);
    });
}

caa_status caa_evaluate(const caa_config_t* config, const char* records_dir,
                        char** out_paths_json) {
    if (auto s = require(config != nullptr, "config must not be null")) return s;
    return guarded([&] {
        auto result = caa::runner::cmd_evaluate(config->value,
                                                records_dir ? records_dir : "");
        nlohmann::json j;
        j["table_csv"] = result.table_csv_path;
        j["table_json"] = result.table_json_path;
        j["significance_json"] = result.significance_json_path;
        if (out_paths_json) *out_paths_json = dup_string(j.dump(2));
    });
}

caa_status caa_render_grid(const caa_config_t* config, const char* records_dir,
                           int n_examples, const char* out_path, char** out_png_path) {
    if (auto s = require(config != nullptr, "config must not be null")) return s;
    return guarded([&] {
        const std::string path = caa::runner::cmd_render_grid(
            config->value, records_dir ? records_dir : "", n_examples,
            out_path ? out_path : "");
        if (out_png_path) *out_png_path = dup_string(path);
    });
}

caa_status caa_model_open(const char* checkpoint_path, caa_model_t** out) {
    if (auto s = require(checkpoint_path != nullptr && out != nullptr,
                         "checkpoint_path and out must not be null"))
        return s;
    return guarded([&] {
        auto info = caa::zoo::checkpoint_info(checkpoint_path);
        *out = new caa_model{std::move(info), checkpoint_path};
    });
}

caa_status caa_model_metadata_json(const caa_model_t* model, char** out_json) {
    if (auto s = require(model != nullptr && out_json != nullptr,
                         "model and out_json must not be null"))
        return s;
    return guarded([&] { *out_json = dup_string(model->info.to_json()); });
}

void caa_model_destroy(caa_model_t* model) { delete model; }

} // extern "C"
