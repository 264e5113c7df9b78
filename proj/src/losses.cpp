#include "mvm/losses.hpp"

#include <iostream>

namespace mvm {

Mask denoise_weight_map(const ImageF& mag_target, double bg_threshold) {
    return (mag_target > static_cast<float>(bg_threshold)).cast<float>();
}

Mask myocardium_weight_map(const std::array<ImageF, 3>& masks, int dilation_px) {
    Mask filled_union = Mask::Zero(masks[0].rows(), masks[0].cols());
    for (const ImageF& m : masks) {
        require_same_shape(m, filled_union, "myocardium_weight_map");
        if ((m > 0.5f).any()) filled_union = filled_union.max(fill_holes(m));
    }
    if (!(filled_union > 0.5f).any()) {
        std::cerr << "warning: myocardium weight map is empty (no mask foreground)\n";
        return filled_union;
    }
    return dilate_disk(filled_union, dilation_px);
}

double weighted_mae(const std::vector<const ImageF*>& pred, const std::vector<const ImageF*>& target,
                    const ImageF& weight) {
    if (pred.size() != target.size() || pred.empty())
        throw ShapeError("weighted_mae: channel count mismatch");
    double acc = 0.0;
    for (size_t c = 0; c < pred.size(); ++c) {
        require_same_shape(*pred[c], *target[c], "weighted_mae");
        require_same_shape(*pred[c], weight, "weighted_mae");
        acc += (weight.cast<double>() *
                (pred[c]->cast<double>() - target[c]->cast<double>()).abs())
                   .sum();
    }
    const double total_weight = weight.cast<double>().sum() * static_cast<double>(pred.size());
    if (total_weight <= 0.0) throw NumericError("weighted_mae: total weight is zero");
    return acc / total_weight;
}

double weighted_mae(const ImageF& pred, const ImageF& target, const ImageF& weight) {
    return weighted_mae(std::vector<const ImageF*>{&pred}, {&target}, weight);
}

std::vector<ImageF> weighted_mae_grad(const std::vector<const ImageF*>& pred,
                                      const std::vector<const ImageF*>& target, const ImageF& weight) {
    const double total_weight = weight.cast<double>().sum() * static_cast<double>(pred.size());
    if (total_weight <= 0.0) throw NumericError("weighted_mae_grad: total weight is zero");
    std::vector<ImageF> grads;
    grads.reserve(pred.size());
    const float inv = static_cast<float>(1.0 / total_weight);
    for (size_t c = 0; c < pred.size(); ++c) {
        ImageF diff = *pred[c] - *target[c];
        ImageF sign = (diff > 0.f).cast<float>() - (diff < 0.f).cast<float>();
        grads.push_back(weight * sign * inv);
    }
    return grads;
}

double dice_loss(const ImageF& mask_prob, const ImageF& mask_gt, double smooth) {
    require_same_shape(mask_prob, mask_gt, "dice_loss");
    const double inter = (mask_prob.cast<double>() * mask_gt.cast<double>()).sum();
    const double sums = mask_prob.cast<double>().sum() + mask_gt.cast<double>().sum();
    return 1.0 - (2.0 * inter + smooth) / (sums + smooth);
}

ImageF dice_loss_grad(const ImageF& mask_prob, const ImageF& mask_gt, double smooth) {
    const double inter = (mask_prob.cast<double>() * mask_gt.cast<double>()).sum();
    const double denom = mask_prob.cast<double>().sum() + mask_gt.cast<double>().sum() + smooth;
    const double num = 2.0 * inter + smooth;
    // d/dp_i [1 - num/denom] = -(2*g_i*denom - num) / denom^2
    return ((num / (denom * denom)) - mask_gt * static_cast<float>(2.0 / denom)).cast<float>();
}

double boundary_loss(const ImageF& mask_prob, const ImageF& sdm) {
    require_same_shape(mask_prob, sdm, "boundary_loss");
    return (mask_prob.cast<double>() * sdm.cast<double>()).sum() /
           static_cast<double>(mask_prob.size());
}

ImageF boundary_loss_grad(const ImageF& mask_prob, const ImageF& sdm) {
    return sdm / static_cast<float>(mask_prob.size());
}

LossBreakdown total_loss(const LossInputs& in, const LossConfig& cfg, LossGrads* grads) {
    ImageF weight;
    if (cfg.weighted) {
        const Mask omega1 = denoise_weight_map(*in.mag_target, cfg.bg_threshold);
        std::array<ImageF, 3> masks = {*in.sample_masks[0], *in.sample_masks[1], *in.sample_masks[2]};
        const Mask omega2 = myocardium_weight_map(masks, cfg.dilation_px);
        weight = omega1 + omega2 + static_cast<float>(cfg.background_floor);
    } else {
        weight = ImageF::Ones(in.mag_target->rows(), in.mag_target->cols());
    }

    LossBreakdown out;
    out.syn_mag = weighted_mae(*in.mag_pred, *in.mag_target, weight);
    std::vector<const ImageF*> phase_pred(in.phase_pred.begin(), in.phase_pred.end());
    std::vector<const ImageF*> phase_target(in.phase_target.begin(), in.phase_target.end());
    out.syn_phase = weighted_mae(phase_pred, phase_target, weight);

    out.dice = dice_loss(*in.mask_prob, *in.mask_target, cfg.dice_smooth);
    const ImageF sdm = signed_distance_map(*in.mask_target);
    out.boundary = boundary_loss(*in.mask_prob, sdm);

    out.total = cfg.w_syn * (out.syn_mag + out.syn_phase) + cfg.w_seg * (out.dice + out.boundary);

    if (grads) {
        const float w_syn = static_cast<float>(cfg.w_syn);
        const float w_seg = static_cast<float>(cfg.w_seg);
        grads->d_mag = w_syn * weighted_mae_grad({in.mag_pred}, {in.mag_target}, weight)[0];
        auto phase_grads = weighted_mae_grad(phase_pred, phase_target, weight);
        for (int c = 0; c < 3; ++c)
            grads->d_phase[static_cast<size_t>(c)] = w_syn * phase_grads[static_cast<size_t>(c)];
        grads->d_mask_prob = w_seg * (dice_loss_grad(*in.mask_prob, *in.mask_target, cfg.dice_smooth) +
                                      boundary_loss_grad(*in.mask_prob, sdm));
    }
    return out;
}

}  // namespace mvm
