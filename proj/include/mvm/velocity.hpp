#pragma once

#include <array>
#include <vector>

#include "mvm/image.hpp"
#include "mvm/series.hpp"

namespace mvm {

/// Per-frame mean myocardial velocities. In-plane entries are in mm per
/// frame-interval, longitudinal in the through-plane amplitude's unit; all
/// three share whatever scale venc imposes, which Pearson-based comparisons
/// ignore.
struct VelocityCurves {
    std::vector<double> longitudinal;
    std::vector<double> radial;
    std::vector<double> circumferential;

    int frames() const { return static_cast<int>(longitudinal.size()); }
};

/// Mean (row, col) of foreground pixels. Throws ArgumentError on empty masks.
Eigen::Vector2d myocardium_centroid(const ImageF& mask);

/// Projects the three-direction phase frame onto longitudinal / radial /
/// circumferential components averaged over the mask.
///
/// Physical velocity is phase * venc per direction. r_hat points outward from
/// the mask centroid, c_hat is r_hat rotated 90 degrees (x,y) -> (-y, x).
/// Pixels closer than 0.5 px to the centroid are excluded from in-plane means.
struct VelocityDecomposition {
    double longitudinal = 0;
    double radial = 0;
    double circumferential = 0;
};
VelocityDecomposition decompose_velocity(const std::array<ImageF, 3>& phase_frame, const ImageF& mask,
                                         const Eigen::Vector3f& venc,
                                         const Eigen::Vector2f& spacing_mm);

/// Per-frame decompose_velocity stacked over t, using the given masks
/// (predicted or ground truth). Throws NumericError naming the frame whose
/// mask is empty.
VelocityCurves velocity_curves(const MVMSeries& series, const std::vector<ImageF>& masks);

/// Convenience overload using the series' own masks.
VelocityCurves velocity_curves(const MVMSeries& series);

/// Mean of the three per-direction Pearson correlations between predicted and
/// true curves. Throws NumericError naming the direction when a curve is
/// constant.
double velocity_coefficient(const VelocityCurves& pred, const VelocityCurves& truth);

}  // namespace mvm
