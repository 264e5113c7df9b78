#pragma once

#include <array>

#include "mvm/image.hpp"
#include "mvm/sampling.hpp"

namespace mvm {

/// Dense displacement field in pixels per frame-gap; u = x component,
/// v = y component.
struct FlowField {
    ImageF u;
    ImageF v;
};

struct HSConfig {
    double alpha = 0.1;     // smoothness weight, scaled for [0,1] intensities
    int iterations = 200;
    double stop_tol = 1e-4; // mean |du|+|dv| per pixel
};

/// (1 - k/4) * frame_a + (k/4) * frame_b.
ImageF linear_interpolate(const ImageF& frame_a, const ImageF& frame_b, int k);

/// Classic iterative Horn-Schunck: derivatives from the 2x2x2 averaging
/// stencils, neighborhood averages over the 3x3 window, update
/// u <- u_avg - Ix*(Ix*u_avg + Iy*v_avg + It)/(alpha^2 + Ix^2 + Iy^2).
/// Deterministic; stops at `iterations` or when the mean update drops below
/// stop_tol. Throws NumericError on non-finite inputs.
FlowField horn_schunck_flow(const ImageF& img1, const ImageF& img2, const HSConfig& cfg = {});

/// Symmetric two-sided warp at t = k/4:
/// F(x) = (1-t)*A(x - t*flow(x)) + t*B(x + (1-t)*flow(x)), bilinear with edge
/// clamping. Zero flow reduces exactly to linear_interpolate.
ImageF flow_interpolate(const ImageF& frame_a, const ImageF& frame_b, const FlowField& flow, int k);

enum class BaselineMethod { linear, hs_flow };

struct BaselinePrediction {
    ImageF mag_pred;
    std::array<ImageF, 3> phase_pred;
};

/// Applies the chosen method channelwise. For hs_flow the flow is estimated
/// on the magnitude anchors and reused to warp the phase channels.
BaselinePrediction baseline_synthesize(const SynthesisSample& sample, BaselineMethod method,
                                       const HSConfig& cfg = {});

}  // namespace mvm
