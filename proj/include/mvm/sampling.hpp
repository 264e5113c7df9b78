#pragma once

#include <array>
#include <string>
#include <vector>

#include "mvm/series.hpp"

namespace mvm {

constexpr int kAnchorGap = 4;        // anchors are frames tau and tau+4
constexpr Index kConditionSize = 32;  // native condition-map resolution

/// Two constant-valued 32x32 channels: ch0 = tau/T, ch1 = k/4.
struct ConditionMap {
    ImageF ch0;
    ImageF ch1;
};

/// Throws ArgumentError unless 0 <= tau <= T-5 and k in {1,2,3}.
ConditionMap build_condition_map(int tau, int k, int frames);

/// One conditional synthesis sample: anchors at tau and tau+4, target at
/// tau+k. Channel stacking is fixed: mag_in = [tau, tau+4]; phase_in is
/// direction-major, [d0@tau, d0@tau+4, d1@tau, d1@tau+4, d2@tau, d2@tau+4];
/// mask_in = [tau, tau+4].
struct SynthesisSample {
    std::array<ImageF, 2> mag_in;
    std::array<ImageF, 6> phase_in;
    std::array<ImageF, 2> mask_in;
    ImageF mag_target;
    std::array<ImageF, 3> phase_target;
    ImageF mask_target;
    ConditionMap condition;
    int tau = 0;
    int k = 1;
    std::string series_ref;
};

/// (tau, k) pairs for every valid sample of a T-frame series, tau-major then
/// k; empty when T < 5.
std::vector<std::pair<int, int>> enumerate_sample_indices(int frames);

/// Materializes the sample for one (tau, k).
SynthesisSample make_sample(const MVMSeries& series, int tau, int k);

/// All samples of a series: every tau in [0, T-5] and k in {1,2,3}, count
/// 3*(T-4), no wrap-around. T < 5 yields an empty list and a warning on
/// stderr.
std::vector<SynthesisSample> enumerate_samples(const MVMSeries& series);

/// Linear interpolation of the two anchors at weight k/4 (the synthesis
/// residual base and the linear baseline).
template <typename Scalar>
Image<Scalar> lerp_anchor(const Image<Scalar>& at_tau, const Image<Scalar>& at_tau4, int k) {
    const Scalar t = Scalar(k) / Scalar(kAnchorGap);
    return (Scalar(1) - t) * at_tau + t * at_tau4;
}

}  // namespace mvm
