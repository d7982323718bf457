#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "data/dataset.hpp"
#include "recon/autoencoder.hpp"
#include "recon/cladec.hpp"
#include "zoo/classifier.hpp"

namespace caa::zoo {

// Metadata header carried by every checkpoint file.
struct ArtifactInfo {
    std::string kind;    // classifier | autoencoder | activation_decoder
    std::string family;  // architecture family of the model (or its encoder)
    double width_scale = 1.0;
    int split_index = -1;
    std::uint64_t seed = 0;
    int epochs = 0;
    std::string dataset;
    data::StandardizationStats stats;
    bool smoothed_inputs = false;
    std::string bound_classifier_hash; // activation decoders only
    double holdout_error = -1.0;
    double test_accuracy = -1.0;
    std::string param_sha256;
    std::string tool_version;

    std::string to_json() const;
    static ArtifactInfo from_json(const std::string& text);
};

void save_classifier(const std::string& path, SplitClassifier& model, ArtifactInfo info);
void save_autoencoder(const std::string& path, recon::Autoencoder& model, ArtifactInfo info);
void save_activation_decoder(const std::string& path, recon::ActivationDecoder& model,
                             ArtifactInfo info);

struct LoadedClassifier {
    std::unique_ptr<SplitClassifier> model;
    ArtifactInfo info;
};
struct LoadedAutoencoder {
    std::unique_ptr<recon::Autoencoder> model;
    ArtifactInfo info;
};
struct LoadedActivationDecoder {
    std::unique_ptr<recon::ActivationDecoder> model;
    ArtifactInfo info;
};

LoadedClassifier load_classifier(const std::string& path);
LoadedAutoencoder load_autoencoder(const std::string& path);
// When a classifier is given, the stored binding hash must match its
// parameter hash; otherwise loading fails with an integrity error.
LoadedActivationDecoder load_activation_decoder(
    const std::string& path, const SplitClassifier* bound_classifier = nullptr);

// Header-only inspection (kind, metadata) without reading the payload.
ArtifactInfo checkpoint_info(const std::string& path);

} // namespace caa::zoo
