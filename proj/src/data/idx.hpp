#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace caa::data {

enum class IdxKind { Images, Labels };

struct IdxArray {
    std::vector<std::uint32_t> dims;
    std::vector<std::uint8_t> bytes; // raw payload, row-major

    std::uint32_t count() const { return dims.empty() ? 0 : dims[0]; }
};

// Reads an IDX file (optionally gzip-compressed; detected transparently).
// Images must carry magic 0x00000803, labels 0x00000801.
IdxArray load_idx(const std::string& path, IdxKind kind);

// Images as float in [0,1], flattened to count x rows x cols.
std::vector<float> idx_images_to_float(const IdxArray& arr);

} // namespace caa::data
