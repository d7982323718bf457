#include "zoo/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/sha256.hpp"

namespace caa::zoo {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'C', 'A', 'A', 'C'};
constexpr std::uint32_t kVersion = 1;

#ifndef CAA_VERSION
#define CAA_VERSION "dev"
#endif

json info_to_json(const ArtifactInfo& info) {
    json j;
    j["kind"] = info.kind;
    j["arch"] = info.family;
    j["width_scale"] = info.width_scale;
    j["t"] = info.split_index;
    j["seed"] = info.seed;
    j["epochs"] = info.epochs;
    j["dataset_id"] = info.dataset;
    j["stats"] = {{"mean", info.stats.mean}, {"std", info.stats.std}};
    j["smoothed_inputs"] = info.smoothed_inputs;
    if (!info.bound_classifier_hash.empty())
        j["bound_classifier_hash"] = info.bound_classifier_hash;
    if (info.holdout_error >= 0) j["holdout_error"] = info.holdout_error;
    if (info.test_accuracy >= 0) j["test_accuracy"] = info.test_accuracy;
    j["param_sha256"] = info.param_sha256;
    j["tool_version"] = info.tool_version.empty() ? CAA_VERSION : info.tool_version;
    return j;
}

ArtifactInfo info_from_json(const json& j) {
    ArtifactInfo info;
    info.kind = j.value("kind", "");
    info.family = j.value("arch", "");
    info.width_scale = j.value("width_scale", 1.0);
    info.split_index = j.value("t", -1);
    info.seed = j.value("seed", std::uint64_t(0));
    info.epochs = j.value("epochs", 0);
    info.dataset = j.value("dataset_id", "");
    if (j.contains("stats")) {
        info.stats.mean = j["stats"].value("mean", 0.0);
        info.stats.std = j["stats"].value("std", 1.0);
    }
    info.smoothed_inputs = j.value("smoothed_inputs", false);
    info.bound_classifier_hash = j.value("bound_classifier_hash", "");
    info.holdout_error = j.value("holdout_error", -1.0);
    info.test_accuracy = j.value("test_accuracy", -1.0);
    info.param_sha256 = j.value("param_sha256", "");
    info.tool_version = j.value("tool_version", "");
    return info;
}

struct NamedTensors {
    std::vector<nn::ParamRef> refs; // value used; grad ignored
};

void write_checkpoint(const std::string& path, const ArtifactInfo& info,
                      std::vector<nn::ParamRef> refs, const json& extra = json::object()) {
    json j = info_to_json(info);
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    json tensors = json::array();
    Sha256 payload_hash;
    std::uint64_t payload_bytes = 0;
    for (auto& r : refs) {
        json t;
        t["name"] = r.name;
        t["shape"] = r.value->shape();
        tensors.push_back(t);
        payload_hash.update(r.value->data(), std::size_t(r.value->numel()) * sizeof(float));
        payload_bytes += std::uint64_t(r.value->numel()) * sizeof(float);
    }
    j["tensors"] = tensors;
    j["payload_sha256"] = to_hex(payload_hash.digest());
    j["payload_bytes"] = payload_bytes;
    const std::string header = j.dump();

    fs::path dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    const std::uint64_t hlen = header.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof hlen);
    out.write(header.data(), std::streamsize(header.size()));
    for (auto& r : refs)
        out.write(reinterpret_cast<const char*>(r.value->data()),
                  std::streamsize(std::size_t(r.value->numel()) * sizeof(float)));
    if (!out) raise(ErrorKind::Io, "short write on checkpoint: " + path);
}

json read_header(std::ifstream& in, const std::string& path) {
    char magic[4];
    std::uint32_t version = 0;
    std::uint64_t hlen = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&hlen), sizeof hlen);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        raise(ErrorKind::Format, "not a checkpoint file: " + path);
    if (version != kVersion)
        raise(ErrorKind::Format, "unsupported checkpoint version " + std::to_string(version) +
                                     " in " + path);
    if (hlen > (1ull << 24)) raise(ErrorKind::Format, "implausible header size in " + path);
    std::string header(hlen, '\0');
    in.read(header.data(), std::streamsize(hlen));
    if (!in) raise(ErrorKind::Corruption, "truncated checkpoint header in " + path);
    json j = json::parse(header, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Corruption, "corrupt checkpoint header in " + path);
    return j;
}

void read_payload_into(std::ifstream& in, const std::string& path, const json& j,
                       std::vector<nn::ParamRef> refs) {
    const auto& tensors = j.at("tensors");
    if (tensors.size() != refs.size())
        raise(ErrorKind::Corruption, "checkpoint tensor count mismatch in " + path);
    Sha256 payload_hash;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const auto& t = tensors[i];
        if (t.at("name").get<std::string>() != refs[i].name)
            raise(ErrorKind::Corruption, "checkpoint tensor name mismatch: expected " +
                                             refs[i].name + ", found " +
                                             t.at("name").get<std::string>());
        const std::vector<int> shape = t.at("shape").get<std::vector<int>>();
        if (shape != refs[i].value->shape())
            raise(ErrorKind::Corruption, "checkpoint tensor shape mismatch for " + refs[i].name);
        in.read(reinterpret_cast<char*>(refs[i].value->data()),
                std::streamsize(std::size_t(refs[i].value->numel()) * sizeof(float)));
        if (!in) raise(ErrorKind::Corruption, "truncated checkpoint payload in " + path);
        payload_hash.update(refs[i].value->data(),
                            std::size_t(refs[i].value->numel()) * sizeof(float));
    }
    const std::string expect = j.value("payload_sha256", "");
    if (!expect.empty() && expect != to_hex(payload_hash.digest()))
        raise(ErrorKind::Corruption, "checkpoint payload hash mismatch in " + path);
}

std::vector<nn::ParamRef> all_refs(SplitClassifier& m) {
    auto refs = m.parameters();
    auto st = m.state();
    refs.insert(refs.end(), st.begin(), st.end());
    return refs;
}

std::vector<nn::ParamRef> all_refs(recon::Autoencoder& m) {
    auto refs = m.parameters();
    auto st = m.state();
    refs.insert(refs.end(), st.begin(), st.end());
    return refs;
}

std::vector<nn::ParamRef> all_refs(recon::ActivationDecoder& m) {
    auto refs = m.parameters();
    auto st = m.state();
    refs.insert(refs.end(), st.begin(), st.end());
    return refs;
}

} // namespace

std::string ArtifactInfo::to_json() const { return info_to_json(*this).dump(2); }

ArtifactInfo ArtifactInfo::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Format, "malformed artifact info JSON");
    return info_from_json(j);
}

void save_classifier(const std::string& path, SplitClassifier& model, ArtifactInfo info) {
    info.kind = "classifier";
    info.family = family_name(model.arch().family);
    info.width_scale = model.arch().width_scale;
    info.split_index = model.split_index();
    info.param_sha256 = model.param_hash();
    write_checkpoint(path, info, all_refs(model));
}

void save_autoencoder(const std::string& path, recon::Autoencoder& model, ArtifactInfo info) {
    info.kind = "autoencoder";
    info.family = family_name(model.encoder_arch().family);
    info.width_scale = model.encoder_arch().width_scale;
    info.holdout_error = model.holdout_error;
    info.param_sha256 = model.param_hash();
    write_checkpoint(path, info, all_refs(model));
}

void save_activation_decoder(const std::string& path, recon::ActivationDecoder& model,
                             ArtifactInfo info) {
    if (!model.is_bound())
        raise(ErrorKind::Config, "refusing to save an unbound activation decoder");
    info.kind = "activation_decoder";
    info.bound_classifier_hash = model.bound_classifier_hash();
    info.holdout_error = model.holdout_error;
    info.param_sha256 = model.param_hash();
    json extra;
    extra["code_shape"] = model.code_shape();
    write_checkpoint(path, info, all_refs(model), extra);
}

LoadedClassifier load_classifier(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open checkpoint: " + path);
    json j = read_header(in, path);
    ArtifactInfo info = info_from_json(j);
    if (info.kind != "classifier")
        raise(ErrorKind::Config, "expected a classifier checkpoint, found " + info.kind +
                                     " in " + path);
    ArchitectureSpec arch;
    arch.family = family_from_name(info.family);
    arch.width_scale = info.width_scale;
    auto model = std::make_unique<SplitClassifier>(arch, SplitSpec::at(info.split_index),
                                                   info.seed);
    read_payload_into(in, path, j, all_refs(*model));
    return {std::move(model), std::move(info)};
}

LoadedAutoencoder load_autoencoder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open checkpoint: " + path);
    json j = read_header(in, path);
    ArtifactInfo info = info_from_json(j);
    if (info.kind != "autoencoder")
        raise(ErrorKind::Config, "expected an autoencoder checkpoint, found " + info.kind +
                                     " in " + path);
    ArchitectureSpec arch;
    arch.family = family_from_name(info.family);
    arch.width_scale = info.width_scale;
    auto model = std::make_unique<recon::Autoencoder>(arch, info.seed);
    read_payload_into(in, path, j, all_refs(*model));
    model->holdout_error = info.holdout_error;
    return {std::move(model), std::move(info)};
}

LoadedActivationDecoder load_activation_decoder(const std::string& path,
                                                const SplitClassifier* bound_classifier) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open checkpoint: " + path);
    json j = read_header(in, path);
    ArtifactInfo info = info_from_json(j);
    if (info.kind != "activation_decoder")
        raise(ErrorKind::Config, "expected an activation-decoder checkpoint, found " +
                                     info.kind + " in " + path);
    std::vector<int> code_shape = j.value("code_shape", std::vector<int>{});
    if (code_shape.empty())
        raise(ErrorKind::Corruption, "activation decoder checkpoint lacks code_shape");
    auto model = std::make_unique<recon::ActivationDecoder>(code_shape, info.seed);
    read_payload_into(in, path, j, all_refs(*model));
    model->bind(info.bound_classifier_hash);
    model->holdout_error = info.holdout_error;
    if (bound_classifier) model->require_bound_to(*bound_classifier);
    return {std::move(model), std::move(info)};
}

ArtifactInfo checkpoint_info(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open checkpoint: " + path);
    json j = read_header(in, path);
    return info_from_json(j);
}

} // namespace caa::zoo
