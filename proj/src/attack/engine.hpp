#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nn/tensor.hpp"
#include "recon/autoencoder.hpp"
#include "recon/cladec.hpp"
#include "recon/latent.hpp"
#include "zoo/classifier.hpp"

namespace caa::attack {

// The four interpolation pipelines. Each pins the two endpoint encoders and
// the decoder:
//   Image:          X_O -> X_T, identity decoder
//   Cls:            head(X_O) -> head(X_T), decoded by R
//   AeFromDenoised: E(R(head(X_O))) -> E(X_T), decoded by R'
//   AeToDenoised:   E(X_O) -> E(R(head(X_T))), decoded by R'
enum class PipelineVariant { Image, Cls, AeFromDenoised, AeToDenoised };

inline constexpr PipelineVariant kAllVariants[] = {
    PipelineVariant::Image, PipelineVariant::Cls, PipelineVariant::AeFromDenoised,
    PipelineVariant::AeToDenoised};

const char* variant_name(PipelineVariant v);
const char* variant_label(PipelineVariant v); // human-readable endpoint description
PipelineVariant variant_from_name(const std::string& name);

struct ModelRefs {
    const zoo::SplitClassifier* classifier = nullptr; // M
    const recon::ActivationDecoder* cladec = nullptr; // R
    const recon::Autoencoder* autoencoder = nullptr;  // AE = (E, R')

    void require_for(PipelineVariant v) const;
};

struct AttackSpec {
    PipelineVariant variant = PipelineVariant::Image;
    double eta = 0.0;        // strict L2 budget in standardized pixel space
    double epsilon = 1e-2;   // bisection precision on the coefficient
    bool paper_update_rule = false; // run the update direction exactly as printed

    void validate() const;
};

// Decodes a batch of codes into a batch of images.
using BatchDecoder = std::function<nn::Tensor(const nn::Tensor&)>;

struct Endpoints {
    recon::LatentCode code_o;
    recon::LatentCode code_t;
    BatchDecoder decoder;
};

// Encodes both endpoint batches for the given variant. Both codes share one
// space and the decoder matches it.
Endpoints make_endpoints(PipelineVariant v, const nn::Tensor& x_o, const nn::Tensor& x_t,
                         const ModelRefs& models);

struct BisectBatchResult {
    nn::Tensor adversarial;       // [B,1,32,32]
    std::vector<double> b_star;
    std::vector<double> dist_to_original; // as returned by the search
    std::vector<bool> feasible;
    int iterations = 0; // bisection loop iterations run
};

// Constrained bisection on code(b) = b*code_o + (1-b)*code_t, lockstep over
// the batch. Maintains {b0 infeasible, b1 feasible} and returns the image at
// the last feasible coefficient, so every feasible result satisfies
// ||X_O - X_A|| < eta. If even b=1 violates the budget the pair is flagged
// infeasible and X(1) is returned.
BisectBatchResult bisect_interpolate_batch(const recon::LatentCode& code_o,
                                           const recon::LatentCode& code_t,
                                           const BatchDecoder& decoder,
                                           const nn::Tensor& x_o_images, double eta,
                                           double epsilon, bool paper_update_rule = false);

struct BisectResult {
    nn::Tensor adversarial; // [1,1,32,32]
    double b_star = 0.0;
    bool feasible = false;
    int iterations = 0;
};

BisectResult bisect_interpolate(const recon::LatentCode& code_o,
                                const recon::LatentCode& code_t, const BatchDecoder& decoder,
                                const nn::Tensor& x_o_image, double eta, double epsilon,
                                bool paper_update_rule = false);

struct ClosedFormResult {
    nn::Tensor adversarial; // [1,1,32,32]
    double b_star = 0.0;
};

// Exact solution for the image-space variant: distance to X_O is
// (1-b)*||X_O - X_T||, so the smallest feasible b is 1 - eta/||X_O - X_T||
// (clamped to 0), nudged up to honor the strict inequality.
ClosedFormResult image_space_closed_form(const nn::Tensor& x_o, const nn::Tensor& x_t,
                                         double eta);

struct AttackOutcome {
    nn::Tensor adversarial; // [1,1,32,32]
    double b_star = 0.0;
    double dist_to_original = 0.0;
    double dist_to_target = 0.0;
    int pred_class = -1;
    bool fooled = false;  // prediction equals the target's ground truth
    bool correct = false; // prediction equals the original's ground truth
    bool feasible = false;
};

AttackOutcome run_attack(const AttackSpec& spec, const nn::Tensor& x_o, const nn::Tensor& x_t,
                         int original_label, int target_label, const ModelRefs& models);

std::vector<AttackOutcome> run_attack_batch(const AttackSpec& spec, const nn::Tensor& x_o,
                                            const nn::Tensor& x_t,
                                            const std::vector<int>& original_labels,
                                            const std::vector<int>& target_labels,
                                            const ModelRefs& models);

struct GridScanResult {
    int crossings = 0;            // feasibility sign changes along the grid
    bool any_feasible = false;
    double smallest_feasible_b = 1.0;
    bool single_crossing = false; // infeasible prefix followed by feasible suffix
};

// Exhaustive feasibility scan of b in [0,1] at the given resolution; the
// independent reference the bisection is checked against.
GridScanResult grid_scan_reference(const recon::LatentCode& code_o,
                                   const recon::LatentCode& code_t,
                                   const BatchDecoder& decoder, const nn::Tensor& x_o_image,
                                   double eta, double resolution);

} // namespace caa::attack
