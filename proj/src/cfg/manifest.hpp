#pragma once

#include <map>
#include <string>
#include <vector>

#include "cfg/config.hpp"

namespace caa::cfg {

// Written next to every command's outputs: enough to reproduce the run and to
// detect stale or mixed outputs on re-runs.
struct RunManifest {
    std::string run_id;
    std::string command;
    std::string config_json;
    std::string config_hash;
    std::string code_version;
    std::map<std::string, std::string> checkpoint_hashes; // artifact -> sha256
    std::map<std::string, double> timings_seconds;
    std::vector<std::string> outputs; // files produced, relative to the manifest

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);

    void save(const std::string& path) const;
    static RunManifest load(const std::string& path);
};

std::string make_run_id(const ExperimentConfig& config);

} // namespace caa::cfg
