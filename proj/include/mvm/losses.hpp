#pragma once

#include <array>
#include <vector>

#include "mvm/image.hpp"
#include "mvm/morphology.hpp"

namespace mvm {

struct LossConfig {
    double w_syn = 1.0;            // synthesis weight
    double w_seg = 1.0;            // segmentation weight
    bool weighted = true;          // false = Table-2 unweighted ablation, W = 1
    double background_floor = 0.1; // epsilon added to omega1 + omega2
    double bg_threshold = 0.1;     // magnitude threshold for omega1
    int dilation_px = 2;
    double dice_smooth = 1.0;
};

/// omega1(p) = 1 iff the target magnitude exceeds bg_threshold.
Mask denoise_weight_map(const ImageF& mag_target, double bg_threshold);

/// omega2 = dilation (Euclidean disk, radius dilation_px) of the union over
/// the given frames of the filled epicardial region (mask plus enclosed
/// cavity). Empty union yields all-zero with a warning on stderr.
Mask myocardium_weight_map(const std::array<ImageF, 3>& masks, int dilation_px);

/// Sum of W * |pred - target| over all channels divided by the sum of W
/// (W broadcast across channels). Throws NumericError when the total weight
/// is zero.
double weighted_mae(const std::vector<const ImageF*>& pred, const std::vector<const ImageF*>& target,
                    const ImageF& weight);
double weighted_mae(const ImageF& pred, const ImageF& target, const ImageF& weight);

/// d(weighted_mae)/d(pred_c) = W * sign(pred_c - target_c) / sum(W over all channels).
std::vector<ImageF> weighted_mae_grad(const std::vector<const ImageF*>& pred,
                                      const std::vector<const ImageF*>& target, const ImageF& weight);

/// 1 - (2*sum(p*g) + smooth) / (sum(p) + sum(g) + smooth).
double dice_loss(const ImageF& mask_prob, const ImageF& mask_gt, double smooth);
ImageF dice_loss_grad(const ImageF& mask_prob, const ImageF& mask_gt, double smooth);

/// Mean over pixels of sdm(p) * mask_prob(p).
double boundary_loss(const ImageF& mask_prob, const ImageF& sdm);
ImageF boundary_loss_grad(const ImageF& mask_prob, const ImageF& sdm);

struct LossBreakdown {
    double syn_mag = 0;
    double syn_phase = 0;
    double dice = 0;
    double boundary = 0;
    double total = 0;
};

struct LossInputs {
    const ImageF* mag_pred = nullptr;
    std::array<const ImageF*, 3> phase_pred{};
    const ImageF* mask_prob = nullptr;
    const ImageF* mag_target = nullptr;
    std::array<const ImageF*, 3> phase_target{};
    const ImageF* mask_target = nullptr;
    std::array<const ImageF*, 3> sample_masks{};  // masks at tau, tau+4, target
};

struct LossGrads {
    ImageF d_mag;
    std::array<ImageF, 3> d_phase;
    ImageF d_mask_prob;
};

/// total = w_syn*(syn_mag + syn_phase) + w_seg*(dice + boundary), with
/// syn terms weighted by W = floor + omega1 + omega2 (or W = 1 when
/// cfg.weighted is false). Fills grads when a non-null pointer is given.
LossBreakdown total_loss(const LossInputs& in, const LossConfig& cfg, LossGrads* grads = nullptr);

}  // namespace mvm
