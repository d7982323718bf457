#pragma once

// Shared test fixtures: hand-built IDX files and a deterministic synthetic
// 10-class dataset that trains in seconds at tiny width.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "data/dataset.hpp"
#include "nn/tensor.hpp"

namespace caa::testing {

inline void write_be_u32(std::ofstream& out, std::uint32_t v) {
    const std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16),
                               std::uint8_t(v >> 8), std::uint8_t(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_idx_images(const std::string& path,
                             const std::vector<std::vector<std::uint8_t>>& images, int rows,
                             int cols) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    write_be_u32(out, 0x00000803);
    write_be_u32(out, std::uint32_t(images.size()));
    write_be_u32(out, std::uint32_t(rows));
    write_be_u32(out, std::uint32_t(cols));
    for (const auto& img : images)
        out.write(reinterpret_cast<const char*>(img.data()), std::streamsize(img.size()));
}

inline void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    write_be_u32(out, 0x00000801);
    write_be_u32(out, std::uint32_t(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

// Class c = a bright bar of orientation/offset determined by c over a noisy
// background; linearly separable enough for a tiny net in one epoch.
inline std::vector<std::uint8_t> synthetic_digit(int cls, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> noise(0, 60);
    std::uniform_int_distribution<int> jitter(-1, 1);
    std::vector<std::uint8_t> img(28 * 28, 0);
    for (auto& p : img) p = std::uint8_t(noise(rng));
    const int dj = jitter(rng);
    if (cls < 5) {
        const int row = 4 + cls * 5 + dj;
        for (int r = row; r < row + 3; ++r)
            for (int c = 4; c < 24; ++c) img[std::size_t(r) * 28 + c] = 230;
    } else {
        const int col = 4 + (cls - 5) * 5 + dj;
        for (int c = col; c < col + 3; ++c)
            for (int r = 4; r < 24; ++r) img[std::size_t(r) * 28 + c] = 230;
    }
    return img;
}

struct SyntheticDataset {
    std::string dir; // data root containing mnist/<idx files>
};

// Writes a synthetic dataset in the canonical layout under <root>/mnist. Use
// n_train/n_test multiples of 10 for balanced classes.
inline SyntheticDataset make_synthetic_dataset(const std::string& root, int n_train,
                                               int n_test, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    auto make_split = [&](int n, const std::string& img_name, const std::string& lbl_name) {
        std::vector<std::vector<std::uint8_t>> images;
        std::vector<std::uint8_t> labels;
        for (int i = 0; i < n; ++i) {
            const int cls = i % 10;
            images.push_back(synthetic_digit(cls, rng));
            labels.push_back(std::uint8_t(cls));
        }
        write_idx_images(root + "/mnist/" + img_name, images, 28, 28);
        write_idx_labels(root + "/mnist/" + lbl_name, labels);
    };
    make_split(n_train, "train-images-idx3-ubyte", "train-labels-idx1-ubyte");
    make_split(n_test, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte");
    return {root};
}

// Loads the synthetic dataset (bypassing the canonical 60k/10k size check)
// and returns the standardized splits.
inline std::pair<data::StandardizedSet, data::StandardizedSet> load_synthetic_standardized(
    const std::string& root) {
    auto train_raw = data::load_labeled_set(root, data::DatasetId::Mnist,
                                            data::SplitTag::Train, false);
    auto test_raw =
        data::load_labeled_set(root, data::DatasetId::Mnist, data::SplitTag::Test, false);
    auto [train, stats] = data::preprocess(train_raw);
    auto [test, stats2] = data::preprocess(test_raw, stats);
    return {std::move(train), std::move(test)};
}

inline std::string temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("caa_tests_" + name);
    std::filesystem::create_directories(p);
    return p.string();
}

} // namespace caa::testing
