#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace caa::recon {
class Autoencoder;
}

namespace caa::data {

enum class DatasetId { Mnist, FashionMnist };
enum class SplitTag { Train, Test };

const char* dataset_name(DatasetId id);
DatasetId dataset_from_name(const std::string& name);

// Raw images as loaded from IDX: [N,1,H,W] with intensities in [0,1].
struct LabeledImageSet {
    nn::Tensor images;
    std::vector<std::uint8_t> labels;
    SplitTag split = SplitTag::Train;
    DatasetId dataset = DatasetId::Mnist;

    int count() const { return images.ndim() ? images.dim(0) : 0; }
    void validate() const; // length agreement, label range
};

struct StandardizationStats {
    double mean = 0.0;
    double std = 1.0;

    std::string to_json() const;
    static StandardizationStats from_json(const std::string& json);
};

// Resized, standardized (and optionally autoencoder-smoothed) images.
struct StandardizedSet {
    nn::Tensor images; // [N,1,32,32]
    std::vector<std::uint8_t> labels;
    SplitTag split = SplitTag::Train;
    DatasetId dataset = DatasetId::Mnist;
    StandardizationStats stats;
    bool smoothed = false;

    int count() const { return images.ndim() ? images.dim(0) : 0; }
    const float* image(int i) const { return images.data() + std::int64_t(i) * 32 * 32; }

    // Deterministic view with the first n samples.
    StandardizedSet take(int n) const;
};

// Loads the canonical train/test files (plain or .gz) from
// <data_dir>/<dataset>/. With enforce_counts the official 60k/10k sizes are
// required.
LabeledImageSet load_labeled_set(const std::string& data_dir, DatasetId dataset,
                                 SplitTag split, bool enforce_counts = true);

// 28x28 -> 32x32 bilinear resize followed by global standardization. Stats
// are computed from the input when absent (training split) and applied as
// given otherwise (test split).
std::pair<StandardizedSet, StandardizationStats> preprocess(
    const LabeledImageSet& set, std::optional<StandardizationStats> stats = std::nullopt);

// Replaces every image with its autoencoder reconstruction.
StandardizedSet smooth_with_autoencoder(const StandardizedSet& set,
                                        const recon::Autoencoder& ae, int batch = 500);

// Bilinear resize of a single-channel image (align-corners=false sampling).
void bilinear_resize(const float* src, int src_h, int src_w, float* dst, int dst_h,
                     int dst_w);

} // namespace caa::data
