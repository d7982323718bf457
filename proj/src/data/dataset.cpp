#include "data/dataset.hpp"

#include <cmath>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "data/idx.hpp"
#include "recon/autoencoder.hpp"

namespace caa::data {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* dataset_name(DatasetId id) {
    return id == DatasetId::Mnist ? "mnist" : "fashion_mnist";
}

DatasetId dataset_from_name(const std::string& name) {
    if (name == "mnist") return DatasetId::Mnist;
    if (name == "fashion_mnist" || name == "fashion-mnist" || name == "fashion")
        return DatasetId::FashionMnist;
    raise(ErrorKind::Config, "unknown dataset: " + name);
}

void LabeledImageSet::validate() const {
    if (count() != int(labels.size()))
        raise(ErrorKind::Corruption, "image/label count mismatch: " +
                                         std::to_string(count()) + " vs " +
                                         std::to_string(labels.size()));
    for (auto l : labels)
        if (l > 9) raise(ErrorKind::Corruption, "label out of range: " + std::to_string(l));
}

std::string StandardizationStats::to_json() const {
    json j;
    j["mean"] = mean;
    j["std"] = std;
    return j.dump();
}

StandardizationStats StandardizationStats::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("mean") || !j.contains("std"))
        raise(ErrorKind::Format, "malformed standardization stats JSON");
    StandardizationStats s;
    s.mean = j["mean"].get<double>();
    s.std = j["std"].get<double>();
    if (!(s.std > 0.0)) raise(ErrorKind::DegenerateData, "non-positive std in stats");
    return s;
}

StandardizedSet StandardizedSet::take(int n) const {
    if (n >= count()) return *this;
    StandardizedSet out;
    out.images = nn::Tensor({n, 1, 32, 32});
    std::copy(images.data(), images.data() + std::int64_t(n) * 32 * 32, out.images.data());
    out.labels.assign(labels.begin(), labels.begin() + n);
    out.split = split;
    out.dataset = dataset;
    out.stats = stats;
    out.smoothed = smoothed;
    return out;
}

namespace {

std::string find_idx_file(const fs::path& dir, const std::string& stem) {
    for (const char* ext : {"", ".gz"}) {
        fs::path p = dir / (stem + ext);
        if (fs::exists(p)) return p.string();
    }
    raise(ErrorKind::Io, "dataset file not found: " + (dir / stem).string() + "[.gz]");
}

} // namespace

LabeledImageSet load_labeled_set(const std::string& data_dir, DatasetId dataset,
                                 SplitTag split, bool enforce_counts) {
    const fs::path dir = fs::path(data_dir) / dataset_name(dataset);
    const std::string img_stem =
        split == SplitTag::Train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte";
    const std::string lbl_stem =
        split == SplitTag::Train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte";

    IdxArray img = load_idx(find_idx_file(dir, img_stem), IdxKind::Images);
    IdxArray lbl = load_idx(find_idx_file(dir, lbl_stem), IdxKind::Labels);

    if (img.dims.size() != 3 || img.dims[1] != 28 || img.dims[2] != 28)
        raise(ErrorKind::Format, "expected 28x28 images in " + img_stem);
    if (img.count() != lbl.count())
        raise(ErrorKind::Corruption, "image/label count mismatch in " + img_stem);

    const std::uint32_t expected = split == SplitTag::Train ? 60000u : 10000u;
    if (enforce_counts && img.count() != expected)
        raise(ErrorKind::Corruption,
              std::string(dataset_name(dataset)) + " " +
                  (split == SplitTag::Train ? "train" : "test") + " split has " +
                  std::to_string(img.count()) + " items, expected " +
                  std::to_string(expected));

    LabeledImageSet set;
    const int n = int(img.count());
    set.images = nn::Tensor({n, 1, 28, 28});
    std::vector<float> floats = idx_images_to_float(img);
    std::copy(floats.begin(), floats.end(), set.images.data());
    set.labels = std::move(lbl.bytes);
    set.split = split;
    set.dataset = dataset;
    set.validate();
    return set;
}

void bilinear_resize(const float* src, int src_h, int src_w, float* dst, int dst_h,
                     int dst_w) {
    const double sy = double(src_h) / dst_h;
    const double sx = double(src_w) / dst_w;
    for (int y = 0; y < dst_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        int y0 = int(std::floor(fy));
        const double wy = fy - y0;
        int y1 = y0 + 1;
        y0 = std::max(0, std::min(src_h - 1, y0));
        y1 = std::max(0, std::min(src_h - 1, y1));
        for (int x = 0; x < dst_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            int x0 = int(std::floor(fx));
            const double wx = fx - x0;
            int x1 = x0 + 1;
            x0 = std::max(0, std::min(src_w - 1, x0));
            x1 = std::max(0, std::min(src_w - 1, x1));
            const double top = double(src[y0 * src_w + x0]) * (1.0 - wx) +
                               double(src[y0 * src_w + x1]) * wx;
            const double bot = double(src[y1 * src_w + x0]) * (1.0 - wx) +
                               double(src[y1 * src_w + x1]) * wx;
            dst[y * dst_w + x] = float(top * (1.0 - wy) + bot * wy);
        }
    }
}

std::pair<StandardizedSet, StandardizationStats> preprocess(
    const LabeledImageSet& set, std::optional<StandardizationStats> stats_in) {
    if (set.images.ndim() != 4 || set.images.dim(2) != 28 || set.images.dim(3) != 28)
        raise(ErrorKind::Input, "preprocess expects [N,1,28,28] images");
    const int n = set.count();

    StandardizedSet out;
    out.images = nn::Tensor({n, 1, 32, 32});
    out.labels = set.labels;
    out.split = set.split;
    out.dataset = set.dataset;

#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i)
        bilinear_resize(set.images.data() + std::int64_t(i) * 28 * 28, 28, 28,
                        out.images.data() + std::int64_t(i) * 32 * 32, 32, 32);

    StandardizationStats stats;
    if (stats_in) {
        stats = *stats_in;
        if (!(stats.std > 0.0))
            raise(ErrorKind::DegenerateData, "provided standardization std is non-positive");
    } else {
        double sum = 0.0, sq = 0.0;
        const std::int64_t total = out.images.numel();
        const float* p = out.images.data();
        for (std::int64_t i = 0; i < total; ++i) {
            sum += p[i];
            sq += double(p[i]) * p[i];
        }
        stats.mean = sum / double(total);
        const double var = std::max(0.0, sq / double(total) - stats.mean * stats.mean);
        stats.std = std::sqrt(var);
        if (!(stats.std > 1e-12))
            raise(ErrorKind::DegenerateData,
                  "degenerate data: zero variance, cannot standardize");
    }

    const float mean = float(stats.mean);
    const float inv_std = float(1.0 / stats.std);
    float* p = out.images.data();
    const std::int64_t total = out.images.numel();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < total; ++i) p[i] = (p[i] - mean) * inv_std;

    out.stats = stats;
    return {std::move(out), stats};
}

StandardizedSet smooth_with_autoencoder(const StandardizedSet& set,
                                        const recon::Autoencoder& ae, int batch) {
    StandardizedSet out = set;
    out.images = recon::reconstruct_batched(ae, set.images, batch);
    if (!out.images.all_finite())
        raise(ErrorKind::Numerical, "autoencoder smoothing produced non-finite values");
    out.smoothed = true;
    return out;
}

} // namespace caa::data
