#pragma once

#include <cmath>
#include <string>

#include "core/rng.hpp"
#include "nn/layers.hpp"

namespace caa::nn {

// Seeded He-style initialization. Walks parameters in collection order, so a
// fixed seed yields bit-identical weights across runs.
inline void init_parameters(Module& module, std::uint64_t seed) {
    std::vector<ParamRef> refs;
    module.collect_params("", refs);
    Rng rng = make_rng(seed);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    for (auto& r : refs) {
        const std::string& name = r.name;
        Tensor& t = *r.value;
        const bool is_weight = name.size() >= 6 && name.rfind("weight") == name.size() - 6;
        const bool is_gamma = name.size() >= 5 && name.rfind("gamma") == name.size() - 5;
        if (is_gamma) {
            t.fill(1.0f);
        } else if (is_weight && t.ndim() == 2 && name.find("conv") == std::string::npos) {
            // linear layers
            const float std_dev = std::sqrt(2.0f / float(t.dim(1)));
            for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = normal(rng) * std_dev;
        } else if (is_weight) {
            // conv / deconv: fan_out = out_c * k * k for conv2d layout
            const float fan = float(t.dim(1));
            const float std_dev = std::sqrt(2.0f / fan);
            for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = normal(rng) * std_dev;
        } else {
            t.fill(0.0f); // biases and beta
        }
    }
}

} // namespace caa::nn
