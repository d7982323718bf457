// Command-line front end. Talks to the core exclusively through the public
// C API in caa/caa.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "caa/caa.h"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string dataset = "mnist";
    std::string profile = "desk";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool force = false;
};

[[noreturn]] void fail(const char* what, caa_status status) {
    std::fprintf(stderr, "error: %s failed (status %d): %s\n", what, int(status),
                 caa_last_error());
    std::exit(1);
}

// Builds the effective config: file (if given) -> CLI overrides.
caa_config_t* make_config(const CommonOpts& opts) {
    caa_config_t* config = nullptr;
    caa_status st;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) {
            std::fprintf(stderr, "error: cannot open config file %s\n",
                         opts.config_path.c_str());
            std::exit(1);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        st = caa_config_from_json(ss.str().c_str(), &config);
    } else {
        st = caa_config_create(opts.dataset.c_str(), opts.profile.c_str(), &config);
    }
    if (st != CAA_OK) fail("config", st);

    nlohmann::json patch;
    if (!opts.config_path.empty()) {
        // explicit flags still win over the file
        if (opts.dataset != "mnist") patch["dataset"] = opts.dataset;
        if (opts.profile != "desk") patch["profile"] = opts.profile;
    }
    if (opts.threads > 0) patch["threads"] = opts.threads;
    if (opts.force) patch["force"] = true;
    if (!patch.empty()) {
        st = caa_config_merge_json(config, patch.dump().c_str());
        if (st != CAA_OK) fail("config", st);
    }
    if (opts.seed_set) caa_config_set_seed(config, opts.seed);
    return config;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--dataset", opts.dataset, "mnist | fashion_mnist")
        ->default_val("mnist");
    cmd->add_option("--profile", opts.profile, "desk | paper")->default_val("desk");
    cmd->add_option("--seed", opts.seed, "master seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
    cmd->add_flag("--force", opts.force, "overwrite existing outputs");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"concept-space adversarial attack toolkit"};
    app.require_subcommand(1);

    CommonOpts train_opts, attack_opts, eval_opts, grid_opts;

    auto* train = app.add_subcommand(
        "train", "train an artifact (autoencoder, classifier:<family>, cladec)");
    std::string train_target;
    train->add_option("target", train_target,
                      "autoencoder | classifier:vgg11 | classifier:vgg13 | "
                      "classifier:resnet10 | cladec")
        ->required();
    add_common(train, train_opts);

    auto* attack = app.add_subcommand("attack", "generate adversarial records");
    add_common(attack, attack_opts);

    auto* evaluate = app.add_subcommand("evaluate", "aggregate records into result tables");
    std::string eval_records;
    evaluate->add_option("--records", eval_records, "records directory (default: attack output)");
    add_common(evaluate, eval_opts);

    auto* grid = app.add_subcommand("render-grid", "render the qualitative sample grid");
    std::string grid_records, grid_out;
    int grid_n = 4;
    grid->add_option("--records", grid_records, "records directory (default: attack output)");
    grid->add_option("--n", grid_n, "rows in the grid")->default_val(4);
    grid->add_option("--out", grid_out, "output PNG path");
    add_common(grid, grid_opts);

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) {
        caa_config_t* config = make_config(train_opts);
        char* path = nullptr;
        caa_status st = caa_train(config, train_target.c_str(), &path);
        if (st != CAA_OK) fail("train", st);
        std::printf("checkpoint: %s\n", path);
        caa_string_free(path);
        caa_config_destroy(config);
    } else if (attack->parsed()) {
        caa_config_t* config = make_config(attack_opts);
        char* dir = nullptr;
        caa_status st = caa_attack(config, &dir);
        if (st != CAA_OK) fail("attack", st);
        std::printf("records: %s\n", dir);
        caa_string_free(dir);
        caa_config_destroy(config);
    } else if (evaluate->parsed()) {
        caa_config_t* config = make_config(eval_opts);
        char* paths = nullptr;
        caa_status st = caa_evaluate(config, eval_records.empty() ? nullptr : eval_records.c_str(),
                                     &paths);
        if (st != CAA_OK) fail("evaluate", st);
        std::printf("%s\n", paths);
        caa_string_free(paths);
        caa_config_destroy(config);
    } else if (grid->parsed()) {
        caa_config_t* config = make_config(grid_opts);
        char* png = nullptr;
        caa_status st = caa_render_grid(config, grid_records.empty() ? nullptr : grid_records.c_str(),
                                        grid_n, grid_out.empty() ? nullptr : grid_out.c_str(),
                                        &png);
        if (st != CAA_OK) fail("render-grid", st);
        std::printf("grid: %s\n", png);
        caa_string_free(png);
        caa_config_destroy(config);
    }
    return 0;
}
