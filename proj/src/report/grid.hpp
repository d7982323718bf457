#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attack/records.hpp"
#include "data/dataset.hpp"
#include "report/png_io.hpp"

namespace caa::report {

struct VariantColumn {
    std::string variant;
    std::vector<attack::OutcomeRecord> records;
    nn::Tensor xa_images; // aligned with records
};

struct GridOptions {
    int n_examples = 4;
    std::uint64_t seed = 1;
    int cell_scale = 4; // 32x32 cells upscaled by nearest neighbour
};

// Rows are sampled pairs; columns are original, target, then one adversarial
// cell per variant annotated Yes/No for "model fooled". Pixels go back
// through the standardization stats and are clamped to [0,1] at write time.
GrayImage render_grid(const data::StandardizedSet& test_set,
                      const data::StandardizationStats& stats,
                      const std::vector<VariantColumn>& columns, const GridOptions& options);

} // namespace caa::report
