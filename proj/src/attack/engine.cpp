#include "attack/engine.hpp"

#include <cmath>

#include "core/error.hpp"

namespace caa::attack {

namespace {

constexpr std::int64_t kImg = 32 * 32;

double row_distance(const nn::Tensor& a, int row_a, const nn::Tensor& b, int row_b) {
    const float* pa = a.data() + std::int64_t(row_a) * kImg;
    const float* pb = b.data() + std::int64_t(row_b) * kImg;
    double acc = 0.0;
    for (std::int64_t i = 0; i < kImg; ++i) {
        const double d = double(pa[i]) - pb[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void copy_row(nn::Tensor& dst, int row_dst, const nn::Tensor& src, int row_src,
              std::int64_t stride) {
    std::copy(src.data() + std::int64_t(row_src) * stride,
              src.data() + std::int64_t(row_src + 1) * stride,
              dst.data() + std::int64_t(row_dst) * stride);
}

nn::Tensor lerp_rows(const nn::Tensor& code_o, const nn::Tensor& code_t,
                     const std::vector<double>& b) {
    nn::Tensor out(code_o.shape());
    const int n = code_o.dim(0);
    const std::int64_t stride = code_o.numel() / n;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const float w = float(b[std::size_t(i)]);
        const float wt = 1.0f - w;
        const float* po = code_o.data() + std::int64_t(i) * stride;
        const float* pt = code_t.data() + std::int64_t(i) * stride;
        float* pd = out.data() + std::int64_t(i) * stride;
        for (std::int64_t j = 0; j < stride; ++j) pd[j] = w * po[j] + wt * pt[j];
    }
    return out;
}

} // namespace

const char* variant_name(PipelineVariant v) {
    switch (v) {
        case PipelineVariant::Image: return "image";
        case PipelineVariant::Cls: return "cls";
        case PipelineVariant::AeFromDenoised: return "ae_from_denoised";
        case PipelineVariant::AeToDenoised: return "ae_to_denoised";
    }
    return "?";
}

const char* variant_label(PipelineVariant v) {
    switch (v) {
        case PipelineVariant::Image: return "X_O to X_T";
        case PipelineVariant::Cls: return "M-t(X_O) to M-t(X_T)";
        case PipelineVariant::AeFromDenoised: return "E(R(M-t(X_O))) to E(X_T)";
        case PipelineVariant::AeToDenoised: return "E(X_O) to E(R(M-t(X_T)))";
    }
    return "?";
}

PipelineVariant variant_from_name(const std::string& name) {
    for (PipelineVariant v : kAllVariants)
        if (name == variant_name(v)) return v;
    raise(ErrorKind::Config, "unknown pipeline variant: " + name);
}

void ModelRefs::require_for(PipelineVariant v) const {
    if (v == PipelineVariant::Image) return;
    if (!classifier) raise(ErrorKind::Config, "variant requires a classifier (M)");
    if (!cladec) raise(ErrorKind::Config, "variant requires an activation decoder (R)");
    cladec->require_bound_to(*classifier);
    if (v != PipelineVariant::Cls && !autoencoder)
        raise(ErrorKind::Config, "variant requires an autoencoder (E, R')");
}

void AttackSpec::validate() const {
    if (!(eta > 0.0)) raise(ErrorKind::Config, "eta must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) raise(ErrorKind::Config, "epsilon must be in (0,1)");
}

Endpoints make_endpoints(PipelineVariant v, const nn::Tensor& x_o, const nn::Tensor& x_t,
                         const ModelRefs& models) {
    models.require_for(v);
    if (!x_o.same_shape(x_t))
        raise(ErrorKind::Input, "endpoint batches must have equal shapes");

    Endpoints ep;
    switch (v) {
        case PipelineVariant::Image: {
            ep.code_o = {x_o, recon::SpaceTag::Image, "identity"};
            ep.code_t = {x_t, recon::SpaceTag::Image, "identity"};
            ep.decoder = [](const nn::Tensor& codes) { return codes; };
            break;
        }
        case PipelineVariant::Cls: {
            ep.code_o = recon::encode_classifier(*models.classifier, x_o);
            ep.code_t = recon::encode_classifier(*models.classifier, x_t);
            const auto* dec = models.cladec;
            ep.decoder = [dec](const nn::Tensor& codes) { return dec->decode_batch(codes); };
            break;
        }
        case PipelineVariant::AeFromDenoised: {
            nn::Tensor x_o_denoised =
                recon::classifier_reconstruct(*models.cladec, *models.classifier, x_o);
            ep.code_o = models.autoencoder->encode(x_o_denoised);
            ep.code_t = models.autoencoder->encode(x_t);
            const auto* ae = models.autoencoder;
            ep.decoder = [ae](const nn::Tensor& codes) { return ae->decode_batch(codes); };
            break;
        }
        case PipelineVariant::AeToDenoised: {
            ep.code_o = models.autoencoder->encode(x_o);
            nn::Tensor x_t_denoised =
                recon::classifier_reconstruct(*models.cladec, *models.classifier, x_t);
            ep.code_t = models.autoencoder->encode(x_t_denoised);
            const auto* ae = models.autoencoder;
            ep.decoder = [ae](const nn::Tensor& codes) { return ae->decode_batch(codes); };
            break;
        }
    }
    recon::require_same_space(ep.code_o, ep.code_t);
    return ep;
}

BisectBatchResult bisect_interpolate_batch(const recon::LatentCode& code_o,
                                           const recon::LatentCode& code_t,
                                           const BatchDecoder& decoder,
                                           const nn::Tensor& x_o_images, double eta,
                                           double epsilon, bool paper_update_rule) {
    recon::require_same_space(code_o, code_t);
    if (!(eta > 0.0)) raise(ErrorKind::Config, "eta must be positive");
    if (!(epsilon > 0.0 && epsilon < 1.0)) raise(ErrorKind::Config, "epsilon must be in (0,1)");
    const int n = code_o.batch();
    if (x_o_images.dim(0) != n)
        raise(ErrorKind::Input, "original image batch does not match code batch");

    auto decode_at = [&](const std::vector<double>& b) {
        nn::Tensor imgs = decoder(lerp_rows(code_o.values, code_t.values, b));
        if (!imgs.all_finite())
            raise(ErrorKind::Numerical, "decoder produced non-finite values during bisection");
        if (imgs.numel() != std::int64_t(n) * kImg)
            raise(ErrorKind::Input, "decoder output is not a [N,1,32,32] image batch");
        return imgs;
    };

    BisectBatchResult res;
    res.b_star.assign(std::size_t(n), 0.0);
    res.dist_to_original.assign(std::size_t(n), 0.0);
    res.feasible.assign(std::size_t(n), false);
    res.adversarial = nn::Tensor({n, 1, 32, 32});

    if (paper_update_rule) {
        // The update direction exactly as printed: the feasible midpoint moves
        // b0, the infeasible one moves b1, and the final midpoint is returned
        // whether or not it satisfies the constraint.
        std::vector<double> b0(std::size_t(n), 0.0), b1(std::size_t(n), 1.0);
        std::vector<double> bmid(std::size_t(n), 0.5);
        nn::Tensor last;
        while (b1[0] - b0[0] > epsilon) {
            for (int i = 0; i < n; ++i) bmid[std::size_t(i)] = 0.5 * (b0[std::size_t(i)] + b1[std::size_t(i)]);
            last = decode_at(bmid);
            ++res.iterations;
            for (int i = 0; i < n; ++i) {
                const double d = row_distance(x_o_images, i, last, i);
                if (d < eta)
                    b0[std::size_t(i)] = bmid[std::size_t(i)];
                else
                    b1[std::size_t(i)] = bmid[std::size_t(i)];
            }
        }
        for (int i = 0; i < n; ++i) {
            res.b_star[std::size_t(i)] = bmid[std::size_t(i)];
            const double d = row_distance(x_o_images, i, last, i);
            res.dist_to_original[std::size_t(i)] = d;
            res.feasible[std::size_t(i)] = d < eta;
            copy_row(res.adversarial, i, last, i, kImg);
        }
        return res;
    }

    // Feasibility pre-check at b=1; X(1) is the fallback for infeasible pairs
    // and the initial "last feasible" image for the rest.
    std::vector<double> ones(std::size_t(n), 1.0);
    nn::Tensor x_at_1 = decode_at(ones);
    std::vector<bool> active(std::size_t(n), false);
    for (int i = 0; i < n; ++i) {
        const double d1 = row_distance(x_o_images, i, x_at_1, i);
        copy_row(res.adversarial, i, x_at_1, i, kImg);
        res.b_star[std::size_t(i)] = 1.0;
        res.dist_to_original[std::size_t(i)] = d1;
        if (d1 < eta) {
            res.feasible[std::size_t(i)] = true;
            active[std::size_t(i)] = true;
        }
    }

    // b=0 may already satisfy the budget (decoder blur can land inside it);
    // that is the global minimum, so those pairs are done.
    std::vector<double> zeros(std::size_t(n), 0.0);
    nn::Tensor x_at_0 = decode_at(zeros);
    for (int i = 0; i < n; ++i) {
        if (!active[std::size_t(i)]) continue;
        const double d0 = row_distance(x_o_images, i, x_at_0, i);
        if (d0 < eta) {
            res.b_star[std::size_t(i)] = 0.0;
            res.dist_to_original[std::size_t(i)] = d0;
            copy_row(res.adversarial, i, x_at_0, i, kImg);
            active[std::size_t(i)] = false;
        }
    }

    bool any_active = false;
    for (int i = 0; i < n; ++i) any_active = any_active || active[std::size_t(i)];
    if (!any_active) return res;

    // Invariant: b0 infeasible, b1 feasible. The midpoint replaces whichever
    // bound shares its feasibility, so b1 converges onto the boundary from the
    // feasible side and X(b1) is always a valid sample.
    std::vector<double> b0(std::size_t(n), 0.0), b1(std::size_t(n), 1.0);
    std::vector<double> bmid(std::size_t(n), 0.5);
    double gap = 1.0;
    while (gap > epsilon) {
        for (int i = 0; i < n; ++i)
            if (active[std::size_t(i)])
                bmid[std::size_t(i)] = 0.5 * (b0[std::size_t(i)] + b1[std::size_t(i)]);
        nn::Tensor mid = decode_at(bmid);
        ++res.iterations;
        gap *= 0.5;
        for (int i = 0; i < n; ++i) {
            if (!active[std::size_t(i)]) continue;
            const double d = row_distance(x_o_images, i, mid, i);
            if (d < eta) {
                b1[std::size_t(i)] = bmid[std::size_t(i)];
                res.b_star[std::size_t(i)] = bmid[std::size_t(i)];
                res.dist_to_original[std::size_t(i)] = d;
                copy_row(res.adversarial, i, mid, i, kImg);
            } else {
                b0[std::size_t(i)] = bmid[std::size_t(i)];
            }
        }
    }
    return res;
}

BisectResult bisect_interpolate(const recon::LatentCode& code_o,
                                const recon::LatentCode& code_t, const BatchDecoder& decoder,
                                const nn::Tensor& x_o_image, double eta, double epsilon,
                                bool paper_update_rule) {
    BisectBatchResult batch =
        bisect_interpolate_batch(code_o, code_t, decoder, x_o_image, eta, epsilon,
                                 paper_update_rule);
    BisectResult r;
    r.adversarial = std::move(batch.adversarial);
    r.b_star = batch.b_star[0];
    r.feasible = batch.feasible[0];
    r.iterations = batch.iterations;
    return r;
}

ClosedFormResult image_space_closed_form(const nn::Tensor& x_o, const nn::Tensor& x_t,
                                         double eta) {
    if (!(eta > 0.0)) raise(ErrorKind::Config, "eta must be positive");
    if (!x_o.same_shape(x_t)) raise(ErrorKind::Input, "endpoint shapes differ");
    const double dist = nn::l2_distance(x_o, x_t);

    ClosedFormResult res;
    if (dist < eta) {
        // budget exceeds the full distance; the target itself is feasible
        res.b_star = 0.0;
        res.adversarial = x_t;
        return res;
    }
    // strict-inequality margin: stay just inside the open constraint
    constexpr double kMargin = 1e-4;
    res.b_star = std::min(1.0, 1.0 - eta / dist + kMargin);
    res.adversarial = nn::Tensor(x_o.shape());
    const float w = float(res.b_star);
    const float* po = x_o.data();
    const float* pt = x_t.data();
    float* pd = res.adversarial.data();
    for (std::int64_t i = 0, m = x_o.numel(); i < m; ++i)
        pd[i] = w * po[i] + (1.0f - w) * pt[i];
    return res;
}

std::vector<AttackOutcome> run_attack_batch(const AttackSpec& spec, const nn::Tensor& x_o,
                                            const nn::Tensor& x_t,
                                            const std::vector<int>& original_labels,
                                            const std::vector<int>& target_labels,
                                            const ModelRefs& models) {
    spec.validate();
    if (!models.classifier) raise(ErrorKind::Config, "run_attack requires a classifier");
    const int n = x_o.dim(0);
    if (int(original_labels.size()) != n || int(target_labels.size()) != n)
        raise(ErrorKind::Input, "label vectors do not match batch size");

    Endpoints ep = make_endpoints(spec.variant, x_o, x_t, models);
    BisectBatchResult bis = bisect_interpolate_batch(ep.code_o, ep.code_t, ep.decoder, x_o,
                                                     spec.eta, spec.epsilon,
                                                     spec.paper_update_rule);
    std::vector<int> preds = models.classifier->predict(bis.adversarial);

    std::vector<AttackOutcome> out(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        AttackOutcome& o = out[std::size_t(i)];
        o.adversarial = nn::Tensor({1, 1, 32, 32});
        copy_row(o.adversarial, 0, bis.adversarial, i, kImg);
        o.b_star = bis.b_star[std::size_t(i)];
        o.dist_to_original = bis.dist_to_original[std::size_t(i)];
        o.dist_to_target = row_distance(bis.adversarial, i, x_t, i);
        o.pred_class = preds[std::size_t(i)];
        o.feasible = bis.feasible[std::size_t(i)];
        // an infeasible sample is flagged and kept, but cannot claim success
        o.fooled = o.feasible && o.pred_class == target_labels[std::size_t(i)];
        o.correct = o.pred_class == original_labels[std::size_t(i)];
    }
    return out;
}

AttackOutcome run_attack(const AttackSpec& spec, const nn::Tensor& x_o, const nn::Tensor& x_t,
                         int original_label, int target_label, const ModelRefs& models) {
    auto outcomes = run_attack_batch(spec, x_o, x_t, {original_label}, {target_label}, models);
    return std::move(outcomes[0]);
}

GridScanResult grid_scan_reference(const recon::LatentCode& code_o,
                                   const recon::LatentCode& code_t,
                                   const BatchDecoder& decoder, const nn::Tensor& x_o_image,
                                   double eta, double resolution) {
    if (!(resolution > 0.0 && resolution <= 0.5))
        raise(ErrorKind::Config, "grid resolution must be in (0, 0.5]");
    GridScanResult res;
    const int steps = int(std::ceil(1.0 / resolution));
    bool prev_feasible = false;
    bool have_prev = false;
    for (int s = 0; s <= steps; ++s) {
        const double b = std::min(1.0, s * resolution);
        nn::Tensor img = decoder(recon::lerp(code_o, code_t, float(b)).values);
        const double d = row_distance(x_o_image, 0, img, 0);
        const bool feasible = d < eta;
        if (feasible && !res.any_feasible) {
            res.any_feasible = true;
            res.smallest_feasible_b = b; // ascending grid: first hit is smallest
        }
        if (have_prev && feasible != prev_feasible) ++res.crossings;
        prev_feasible = feasible;
        have_prev = true;
    }
    // Single crossing: an (optionally empty) infeasible prefix followed by a
    // feasible suffix reaching b=1. Only these instances have a well-defined
    // minimum the bisection must agree with.
    res.single_crossing = res.any_feasible && res.crossings <= 1 && prev_feasible;
    return res;
}

} // namespace caa::attack
