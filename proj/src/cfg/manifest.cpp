#include "cfg/manifest.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"

namespace caa::cfg {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string RunManifest::to_json() const {
    json j;
    j["run_id"] = run_id;
    j["command"] = command;
    j["config"] = json::parse(config_json);
    j["config_hash"] = config_hash;
    j["code_version"] = code_version;
    j["checkpoint_hashes"] = checkpoint_hashes;
    j["timings_seconds"] = timings_seconds;
    j["outputs"] = outputs;
    return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Format, "malformed manifest JSON");
    RunManifest m;
    m.run_id = j.value("run_id", "");
    m.command = j.value("command", "");
    m.config_json = j.contains("config") ? j["config"].dump(2) : "{}";
    m.config_hash = j.value("config_hash", "");
    m.code_version = j.value("code_version", "");
    m.checkpoint_hashes =
        j.value("checkpoint_hashes", std::map<std::string, std::string>{});
    m.timings_seconds = j.value("timings_seconds", std::map<std::string, double>{});
    m.outputs = j.value("outputs", std::vector<std::string>{});
    return m;
}

void RunManifest::save(const std::string& path) const {
    fs::path dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write manifest: " + path);
    out << to_json() << '\n';
}

RunManifest RunManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open manifest: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json(text);
}

std::string make_run_id(const ExperimentConfig& config) {
    const auto now = std::chrono::system_clock::now();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch());
    char stamp[32];
    std::snprintf(stamp, sizeof stamp, "%lld", static_cast<long long>(secs.count()));
    return std::string(stamp) + "-" + config.config_hash().substr(0, 8);
}

} // namespace caa::cfg
