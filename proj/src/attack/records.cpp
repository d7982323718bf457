#include "attack/records.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/sha256.hpp"

namespace caa::attack {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {
constexpr char kBlobMagic[4] = {'C', 'A', 'A', 'B'};
constexpr std::uint32_t kBlobVersion = 1;
} // namespace

std::string OutcomeRecord::to_json_line() const {
    json j;
    j["pair_id"] = pair_id;
    j["variant"] = variant;
    j["b_star"] = b_star;
    j["d_orig"] = d_orig;
    j["d_target"] = d_target;
    j["pred"] = pred;
    j["fooled"] = fooled;
    j["correct"] = correct;
    j["feasible"] = feasible;
    j["run_seed"] = run_seed;
    j["orig_index"] = orig_index;
    j["orig_label"] = orig_label;
    j["target_index"] = target_index;
    j["target_label"] = target_label;
    j["xa_sha256"] = xa_sha256;
    return j.dump();
}

OutcomeRecord OutcomeRecord::from_json_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) raise(ErrorKind::Format, "malformed record line: " + line);
    OutcomeRecord r;
    r.pair_id = j.at("pair_id").get<std::int64_t>();
    r.variant = j.at("variant").get<std::string>();
    r.b_star = j.at("b_star").get<double>();
    r.d_orig = j.at("d_orig").get<double>();
    r.d_target = j.at("d_target").get<double>();
    r.pred = j.at("pred").get<int>();
    r.fooled = j.at("fooled").get<bool>();
    r.correct = j.at("correct").get<bool>();
    r.feasible = j.at("feasible").get<bool>();
    r.run_seed = j.at("run_seed").get<std::uint64_t>();
    r.orig_index = j.value("orig_index", -1);
    r.orig_label = j.value("orig_label", -1);
    r.target_index = j.value("target_index", -1);
    r.target_label = j.value("target_label", -1);
    r.xa_sha256 = j.value("xa_sha256", "");
    return r;
}

void write_records_jsonl(const std::string& path, const std::vector<OutcomeRecord>& records) {
    fs::path dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::trunc);
    if (!out) raise(ErrorKind::Io, "cannot write records: " + path);
    for (const auto& r : records) out << r.to_json_line() << '\n';
    if (!out) raise(ErrorKind::Io, "short write on records: " + path);
}

std::vector<OutcomeRecord> read_records_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::Io, "cannot open records: " + path);
    std::vector<OutcomeRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(OutcomeRecord::from_json_line(line));
    }
    return records;
}

std::string hash_image_row(const nn::Tensor& images, int row) {
    const std::int64_t stride = images.numel() / images.dim(0);
    return Sha256::hex(images.data() + std::int64_t(row) * stride,
                       std::size_t(stride) * sizeof(float));
}

XaBlobWriter::XaBlobWriter(const std::string& path, int dim) : path_(path), dim_(dim) {
    fs::path dir = fs::path(path).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) raise(ErrorKind::Io, "cannot write blob: " + path);
    file_ = f;
    std::fwrite(kBlobMagic, 1, 4, f);
    std::fwrite(&kBlobVersion, sizeof kBlobVersion, 1, f);
    const std::uint32_t dim32 = std::uint32_t(dim_);
    std::fwrite(&dim32, sizeof dim32, 1, f);
    const std::uint64_t count = 0; // patched on close
    std::fwrite(&count, sizeof count, 1, f);
}

void XaBlobWriter::append_rows(const nn::Tensor& images) {
    if (!file_) raise(ErrorKind::Io, "blob already closed: " + path_);
    const int n = images.dim(0);
    const std::int64_t stride = images.numel() / n;
    if (stride != dim_) raise(ErrorKind::Input, "blob row size mismatch");
    auto* f = static_cast<std::FILE*>(file_);
    if (std::fwrite(images.data(), sizeof(float), std::size_t(images.numel()), f) !=
        std::size_t(images.numel()))
        raise(ErrorKind::Io, "short write on blob: " + path_);
    count_ += std::uint64_t(n);
}

void XaBlobWriter::close() {
    if (!file_) return;
    auto* f = static_cast<std::FILE*>(file_);
    std::fseek(f, 4 + int(sizeof(kBlobVersion)) + int(sizeof(std::uint32_t)), SEEK_SET);
    std::fwrite(&count_, sizeof count_, 1, f);
    std::fclose(f);
    file_ = nullptr;
}

XaBlobWriter::~XaBlobWriter() { close(); }

nn::Tensor read_xa_blob(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::Io, "cannot open blob: " + path);
    char magic[4];
    std::uint32_t version = 0, dim = 0;
    std::uint64_t count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || std::string(magic, 4) != std::string(kBlobMagic, 4))
        raise(ErrorKind::Format, "not an adversarial-image blob: " + path);
    if (version != kBlobVersion) raise(ErrorKind::Format, "unsupported blob version");
    if (dim != 32 * 32) raise(ErrorKind::Format, "unexpected blob row size");
    nn::Tensor out({int(count), 1, 32, 32});
    in.read(reinterpret_cast<char*>(out.data()),
            std::streamsize(std::size_t(out.numel()) * sizeof(float)));
    if (!in) raise(ErrorKind::Corruption, "truncated blob payload: " + path);
    return out;
}

std::string xa_path_for(const std::string& records_path) {
    fs::path p(records_path);
    p.replace_extension(".xa");
    return p.string();
}

} // namespace caa::attack
