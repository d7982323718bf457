#include "zoo/arch.hpp"

#include <cmath>

#include "core/error.hpp"

namespace caa::zoo {

const char* family_name(Family f) {
    switch (f) {
        case Family::Vgg11: return "vgg11";
        case Family::Vgg13: return "vgg13";
        case Family::Resnet10: return "resnet10";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "vgg11") return Family::Vgg11;
    if (name == "vgg13") return Family::Vgg13;
    if (name == "resnet10") return Family::Resnet10;
    raise(ErrorKind::Config, "unknown architecture family: " + name);
}

void ArchitectureSpec::validate() const {
    if (width_scale <= 0.0) raise(ErrorKind::Config, "width_scale must be positive");
    if (num_classes < 2) raise(ErrorKind::Config, "num_classes must be at least 2");
}

int scaled_channels(int base, double width_scale) {
    return std::max(4, int(std::lround(base * width_scale)));
}

namespace {

// -1 marks a 2x2 max-pool between stages.
const std::vector<int>& vgg_cfg(Family f) {
    static const std::vector<int> v11 = {64, -1, 128, -1, 256, 256, -1,
                                         512, 512, -1, 512, 512, -1};
    static const std::vector<int> v13 = {64, 64, -1, 128, 128, -1, 256, 256, -1,
                                         512, 512, -1, 512, 512, -1};
    return f == Family::Vgg11 ? v11 : v13;
}

} // namespace

BuiltNet build_network(const ArchitectureSpec& spec) {
    spec.validate();
    BuiltNet built;

    if (spec.family == Family::Vgg11 || spec.family == Family::Vgg13) {
        int in_c = 1;
        int last_conv = -1;
        int idx = 0;
        for (int v : vgg_cfg(spec.family)) {
            if (v < 0) {
                built.net.append(std::make_unique<nn::MaxPool2d>());
            } else {
                const int out_c = scaled_channels(v, spec.width_scale);
                built.net.append(std::make_unique<nn::ConvBlock>(in_c, out_c));
                in_c = out_c;
                last_conv = idx;
            }
            ++idx;
        }
        built.feature_end = idx;
        built.net.append(std::make_unique<nn::Flatten>());
        built.net.append(std::make_unique<nn::Linear>(in_c, spec.num_classes));
        built.default_split_index = last_conv;
        return built;
    }

    // resnet10: stem + one basic block per stage + global average pooling
    const int c1 = scaled_channels(64, spec.width_scale);
    const int c2 = scaled_channels(128, spec.width_scale);
    const int c3 = scaled_channels(256, spec.width_scale);
    const int c4 = scaled_channels(512, spec.width_scale);
    built.net.append(std::make_unique<nn::ConvBlock>(1, c1));
    built.net.append(std::make_unique<nn::ResidualBlock>(c1, c1, 1));
    built.net.append(std::make_unique<nn::ResidualBlock>(c1, c2, 2));
    built.net.append(std::make_unique<nn::ResidualBlock>(c2, c3, 2));
    built.net.append(std::make_unique<nn::ResidualBlock>(c3, c4, 2));
    built.feature_end = 5;
    built.net.append(std::make_unique<nn::GlobalAvgPool>());
    built.net.append(std::make_unique<nn::Linear>(c4, spec.num_classes));
    built.default_split_index = 4;
    return built;
}

std::vector<int> unit_output_shape(const ArchitectureSpec& spec, int index) {
    if (spec.family == Family::Vgg11 || spec.family == Family::Vgg13) {
        const auto& cfg = vgg_cfg(spec.family);
        int c = 1, hw = 32;
        for (int i = 0; i <= index && i < int(cfg.size()); ++i) {
            if (cfg[std::size_t(i)] < 0)
                hw /= 2;
            else
                c = scaled_channels(cfg[std::size_t(i)], spec.width_scale);
        }
        if (index < int(cfg.size())) return {c, hw, hw};
        if (index == int(cfg.size())) return {c * hw * hw}; // flatten
        return {spec.num_classes};
    }
    const int chans[] = {scaled_channels(64, spec.width_scale),
                         scaled_channels(64, spec.width_scale),
                         scaled_channels(128, spec.width_scale),
                         scaled_channels(256, spec.width_scale),
                         scaled_channels(512, spec.width_scale)};
    const int hws[] = {32, 32, 16, 8, 4};
    if (index < 5) return {chans[index], hws[index], hws[index]};
    if (index == 5) return {chans[4]}; // global average pool
    return {spec.num_classes};
}

} // namespace caa::zoo
