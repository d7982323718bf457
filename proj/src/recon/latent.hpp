#pragma once

#include <string>

#include "nn/tensor.hpp"

namespace caa::recon {

enum class SpaceTag { Image, ClassifierT, Autoencoder };

const char* space_name(SpaceTag tag);

// A point (or batch of points) in one of the three embedding spaces. space_id
// identifies the producing model, so codes from two different autoencoders
// are just as incompatible as codes from different spaces.
struct LatentCode {
    nn::Tensor values; // [N, ...] batch leading dimension
    SpaceTag space = SpaceTag::Image;
    std::string space_id; // model parameter hash; "identity" for image space

    int batch() const { return values.ndim() ? values.dim(0) : 0; }
};

// Raises a type error unless both codes live in the same space of the same
// model and have equal shapes.
void require_same_space(const LatentCode& a, const LatentCode& b);

// b*a + (1-b)*other, elementwise, after a space check.
LatentCode lerp(const LatentCode& a, const LatentCode& other, float weight_on_a);

} // namespace caa::recon
