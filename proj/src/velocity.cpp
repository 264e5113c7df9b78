#include "mvm/velocity.hpp"

#include <cmath>

#include "mvm/metrics.hpp"

namespace mvm {

Eigen::Vector2d myocardium_centroid(const ImageF& mask) {
    double sy = 0, sx = 0, n = 0;
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x)
            if (mask(y, x) > 0.5f) {
                sy += static_cast<double>(y);
                sx += static_cast<double>(x);
                n += 1.0;
            }
    if (n == 0.0) throw ArgumentError("myocardium_centroid: empty mask");
    return {sy / n, sx / n};
}

VelocityDecomposition decompose_velocity(const std::array<ImageF, 3>& phase_frame, const ImageF& mask,
                                         const Eigen::Vector3f& venc, const Eigen::Vector2f& spacing_mm) {
    const Eigen::Vector2d c = myocardium_centroid(mask);
    const double sy = static_cast<double>(spacing_mm.x());
    const double sx = static_cast<double>(spacing_mm.y());

    double sum_r = 0, sum_c = 0, sum_l = 0;
    long n_inplane = 0, n_total = 0;
    for (Index y = 0; y < mask.rows(); ++y)
        for (Index x = 0; x < mask.cols(); ++x) {
            if (mask(y, x) <= 0.5f) continue;
            const double vx = static_cast<double>(phase_frame[0](y, x)) * venc.x();
            const double vy = static_cast<double>(phase_frame[1](y, x)) * venc.y();
            const double vz = static_cast<double>(phase_frame[2](y, x)) * venc.z();
            sum_l += vz;
            ++n_total;

            const double dy_px = static_cast<double>(y) - c.x();
            const double dx_px = static_cast<double>(x) - c.y();
            if (std::hypot(dy_px, dx_px) < 0.5) continue;  // r_hat singularity
            const double oy = dy_px * sy, ox = dx_px * sx;  // mm offsets
            const double r = std::hypot(oy, ox);
            const double ry = oy / r, rx = ox / r;          // outward radial unit
            const double cy_hat = rx, cx_hat = -ry;         // (x,y) -> (-y, x)
            sum_r += vx * rx + vy * ry;
            sum_c += vx * cx_hat + vy * cy_hat;
            ++n_inplane;
        }
    if (n_total == 0) throw ArgumentError("decompose_velocity: empty mask");
    if (n_inplane == 0)
        throw ArgumentError("decompose_velocity: all mask pixels within the excluded centroid radius");

    VelocityDecomposition out;
    out.longitudinal = sum_l / static_cast<double>(n_total);
    out.radial = sum_r / static_cast<double>(n_inplane);
    out.circumferential = sum_c / static_cast<double>(n_inplane);
    return out;
}

VelocityCurves velocity_curves(const MVMSeries& series, const std::vector<ImageF>& masks) {
    if (static_cast<int>(masks.size()) != series.frames())
        throw ShapeError("velocity_curves: mask count does not match series frames");
    VelocityCurves curves;
    const int t_count = series.frames();
    curves.longitudinal.reserve(static_cast<size_t>(t_count));
    curves.radial.reserve(static_cast<size_t>(t_count));
    curves.circumferential.reserve(static_cast<size_t>(t_count));
    for (int t = 0; t < t_count; ++t) {
        const auto idx = static_cast<size_t>(t);
        if (!(masks[idx] > 0.5f).any())
            throw NumericError("velocity_curves: empty mask at frame " + std::to_string(t));
        const auto d = decompose_velocity(series.phase[idx], masks[idx], series.venc_mm_per_s,
                                          series.pixel_spacing_mm);
        curves.longitudinal.push_back(d.longitudinal);
        curves.radial.push_back(d.radial);
        curves.circumferential.push_back(d.circumferential);
    }
    return curves;
}

VelocityCurves velocity_curves(const MVMSeries& series) { return velocity_curves(series, series.mask); }

double velocity_coefficient(const VelocityCurves& pred, const VelocityCurves& truth) {
    if (pred.frames() != truth.frames())
        throw ShapeError("velocity_coefficient: curve length mismatch");
    auto correlate = [](const std::vector<double>& a, const std::vector<double>& b, const char* name) {
        try {
            return pearson(a, b);
        } catch (const NumericError&) {
            throw NumericError(std::string("velocity_coefficient: degenerate ") + name + " curve");
        }
    };
    const double rl = correlate(pred.longitudinal, truth.longitudinal, "longitudinal");
    const double rr = correlate(pred.radial, truth.radial, "radial");
    const double rc = correlate(pred.circumferential, truth.circumferential, "circumferential");
    return (rl + rr + rc) / 3.0;
}

}  // namespace mvm
