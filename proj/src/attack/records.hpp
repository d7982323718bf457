#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace caa::attack {

// One attack outcome as persisted to JSON-lines. The adversarial pixels live
// in a sidecar blob (same basename, .xa extension), one fixed-size row per
// record; xa_sha256 ties the two together.
struct OutcomeRecord {
    std::int64_t pair_id = 0;
    std::string variant;
    double b_star = 0.0;
    double d_orig = 0.0;
    double d_target = 0.0;
    int pred = -1;
    bool fooled = false;
    bool correct = false;
    bool feasible = false;
    std::uint64_t run_seed = 0;
    int orig_index = -1;
    int orig_label = -1;
    int target_index = -1;
    int target_label = -1;
    std::string xa_sha256;

    std::string to_json_line() const;
    static OutcomeRecord from_json_line(const std::string& line);
};

void write_records_jsonl(const std::string& path, const std::vector<OutcomeRecord>& records);
std::vector<OutcomeRecord> read_records_jsonl(const std::string& path);

// Hash of one adversarial image's raw float32 bytes; the transfer-integrity
// anchor checked before any evaluation model scores the sample.
std::string hash_image_row(const nn::Tensor& images, int row);

class XaBlobWriter {
public:
    XaBlobWriter(const std::string& path, int dim = 32 * 32);
    ~XaBlobWriter();
    XaBlobWriter(const XaBlobWriter&) = delete;
    XaBlobWriter& operator=(const XaBlobWriter&) = delete;

    void append_rows(const nn::Tensor& images); // [N,1,32,32]
    void close();

private:
    std::string path_;
    int dim_;
    std::uint64_t count_ = 0;
    void* file_ = nullptr;
};

// Loads the sidecar blob back as [N,1,32,32].
nn::Tensor read_xa_blob(const std::string& path);

std::string xa_path_for(const std::string& records_path);

} // namespace caa::attack
