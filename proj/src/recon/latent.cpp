#include "recon/latent.hpp"

#include "core/error.hpp"

namespace caa::recon {

const char* space_name(SpaceTag tag) {
    switch (tag) {
        case SpaceTag::Image: return "image";
        case SpaceTag::ClassifierT: return "classifier_t";
        case SpaceTag::Autoencoder: return "autoencoder";
    }
    return "?";
}

void require_same_space(const LatentCode& a, const LatentCode& b) {
    if (a.space != b.space)
        raise(ErrorKind::Type, std::string("latent space mismatch: ") + space_name(a.space) +
                                   " vs " + space_name(b.space));
    if (a.space_id != b.space_id)
        raise(ErrorKind::Type, "latent codes come from different models (" + a.space_id +
                                   " vs " + b.space_id + ")");
    if (!a.values.same_shape(b.values))
        raise(ErrorKind::Type, "latent code shape mismatch: " + a.values.shape_str() + " vs " +
                                   b.values.shape_str());
}

LatentCode lerp(const LatentCode& a, const LatentCode& other, float weight_on_a) {
    require_same_space(a, other);
    LatentCode out;
    out.space = a.space;
    out.space_id = a.space_id;
    out.values = nn::Tensor(a.values.shape());
    const float wb = 1.0f - weight_on_a;
    const float* pa = a.values.data();
    const float* pb = other.values.data();
    float* po = out.values.data();
    for (std::int64_t i = 0, n = out.values.numel(); i < n; ++i)
        po[i] = weight_on_a * pa[i] + wb * pb[i];
    return out;
}

} // namespace caa::recon
