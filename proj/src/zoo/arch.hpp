#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nn/layers.hpp"

namespace caa::zoo {

enum class Family { Vgg11, Vgg13, Resnet10 };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

struct ArchitectureSpec {
    Family family = Family::Vgg11;
    double width_scale = 1.0;
    int num_classes = 10;
    // input is fixed to [1,32,32]

    void validate() const;
};

// Channel count after width scaling; floors at 4 so tiny test configs stay valid.
int scaled_channels(int base, double width_scale);

struct BuiltNet {
    nn::Sequential net; // feature units, flatten, classifier head
    int default_split_index = 0; // last conv unit (post-ReLU activation)
    int feature_end = 0;         // index of the first non-feature unit (flatten)
};

BuiltNet build_network(const ArchitectureSpec& spec);

// Output shape [C,H,W] of unit `index` for a 32x32 single-channel input.
std::vector<int> unit_output_shape(const ArchitectureSpec& spec, int index);

} // namespace caa::zoo
