#pragma once

#include "mvm/series.hpp"
#include "mvm/velocity.hpp"

namespace mvm {

/// Contracting-twisting annulus phantom. Radii scale by
/// s(t) = 1 - radial_amplitude * sin(2*pi*t/T); the annulus additionally
/// rotates by theta(t) = twist_amplitude_rad * sin(2*pi*t/T) and moves
/// through-plane at longitudinal_amplitude * sin(2*pi*t/T).
struct PhantomConfig {
    int frames = 50;
    Index height = 64;
    Index width = 64;
    double center_y = -1;  // pixels; negative = image center
    double center_x = -1;
    double endo_radius_mm = 8.0;   // at end-diastole (s = 1)
    double epi_radius_mm = 14.0;
    double radial_amplitude = 0.15;       // fraction in [0, 0.5)
    double twist_amplitude_rad = 0.3;
    double longitudinal_amplitude = 30.0;  // through-plane velocity amplitude
    double noise_sigma = 0.0;
    Eigen::Vector3f venc_mm_per_s{100.f, 100.f, 100.f};
    Eigen::Vector2f pixel_spacing_mm{1.f, 1.f};
    uint64_t seed = 1234;

    std::string subject_id = "phantom";
    std::string slice_id = "0";

    double cy() const { return center_y >= 0 ? center_y : (static_cast<double>(height) - 1) / 2.0; }
    double cx() const { return center_x >= 0 ? center_x : (static_cast<double>(width) - 1) / 2.0; }
};

/// Throws ArgumentError when radii are inconsistent, the dilated annulus does
/// not fit with a 4 px margin, or amplitudes are out of range.
void validate_phantom_config(const PhantomConfig& config);

/// Renders the full series: magnitude (annulus 0.8, blood pool 0.4, folded-
/// Gaussian background), three phase channels (velocity/venc plus Gaussian
/// noise, clipped to [-1,1]) and annulus masks. Deterministic given the seed.
MVMSeries generate_phantom(const PhantomConfig& config);

/// Closed-form per-frame mean velocities of the motion model: no imaging, no
/// noise. Mean radius over the annulus is the continuum area-weighted value
/// (2/3)(R2^3-R1^3)/(R2^2-R1^2).
VelocityCurves analytic_velocity_curves(const PhantomConfig& config);

}  // namespace mvm
