#include "mvm/phantom.hpp"

#include <cmath>
#include <numbers>

#include "mvm/rng.hpp"

namespace mvm {

namespace {

double cycle_phase(int t, int frames) { return 2.0 * std::numbers::pi * t / frames; }

}  // namespace

void validate_phantom_config(const PhantomConfig& config) {
    if (config.frames < 1) throw ArgumentError("phantom config: frames must be >= 1");
    if (config.height < 32 || config.width < 32)
        throw ArgumentError("phantom config: image must be at least 32x32");
    if (config.endo_radius_mm <= 0 || config.epi_radius_mm <= config.endo_radius_mm)
        throw ArgumentError("phantom config: need 0 < endo_radius_mm < epi_radius_mm");
    if (config.radial_amplitude < 0 || config.radial_amplitude >= 0.5)
        throw ArgumentError("phantom config: radial_amplitude must be in [0, 0.5)");
    if (config.noise_sigma < 0) throw ArgumentError("phantom config: noise_sigma must be >= 0");
    if ((config.venc_mm_per_s.array() <= 0.f).any())
        throw ArgumentError("phantom config: venc_mm_per_s must be positive");
    if (config.pixel_spacing_mm.x() <= 0.f || config.pixel_spacing_mm.y() <= 0.f)
        throw ArgumentError("phantom config: pixel_spacing_mm must be positive");

    // dilated annulus must keep a 4 px margin at peak dilation s = 1 + amplitude
    const double max_radius_mm = (1.0 + config.radial_amplitude) * config.epi_radius_mm;
    const double ry_px = max_radius_mm / config.pixel_spacing_mm.x();
    const double rx_px = max_radius_mm / config.pixel_spacing_mm.y();
    const double cy = config.cy(), cx = config.cx();
    if (cy - ry_px < 4.0 || cy + ry_px > static_cast<double>(config.height) - 1 - 4.0 ||
        cx - rx_px < 4.0 || cx + rx_px > static_cast<double>(config.width) - 1 - 4.0)
        throw ArgumentError("phantom config: annulus does not fit inside the image with a 4 px margin");
}

MVMSeries generate_phantom(const PhantomConfig& config) {
    validate_phantom_config(config);

    MVMSeries series;
    series.subject_id = config.subject_id;
    series.slice_id = config.slice_id;
    series.pixel_spacing_mm = config.pixel_spacing_mm;
    series.venc_mm_per_s = config.venc_mm_per_s;

    const Index h = config.height, w = config.width;
    const double cy = config.cy(), cx = config.cx();
    const double sy = config.pixel_spacing_mm.x(), sx = config.pixel_spacing_mm.y();
    const double two_pi_over_t = 2.0 * std::numbers::pi / config.frames;

    Rng noise(config.seed);
    const float sigma = static_cast<float>(config.noise_sigma);

    for (int t = 0; t < config.frames; ++t) {
        const double phi = cycle_phase(t, config.frames);
        const double scale = 1.0 - config.radial_amplitude * std::sin(phi);
        const double dscale_dt = -config.radial_amplitude * two_pi_over_t * std::cos(phi);
        const double omega = config.twist_amplitude_rad * two_pi_over_t * std::cos(phi);
        const double v_long = config.longitudinal_amplitude * std::sin(phi);
        const double endo_r = scale * config.endo_radius_mm;
        const double epi_r = scale * config.epi_radius_mm;

        ImageF mag(h, w), mask(h, w);
        std::array<ImageF, 3> phase{ImageF(h, w), ImageF(h, w), ImageF(h, w)};

        for (Index y = 0; y < h; ++y) {
            for (Index x = 0; x < w; ++x) {
                const double oy = (static_cast<double>(y) - cy) * sy;  // mm offsets from center
                const double ox = (static_cast<double>(x) - cx) * sx;
                const double r = std::hypot(oy, ox);
                const bool in_annulus = r >= endo_r && r <= epi_r;
                const bool in_pool = r < endo_r;

                if (in_annulus)
                    mag(y, x) = 0.8f;
                else if (in_pool)
                    mag(y, x) = 0.4f;
                else {
                    const float n = sigma > 0.f ? sigma * static_cast<float>(noise.gaussian()) : 0.f;
                    mag(y, x) = std::min(std::abs(n), 1.f);
                }
                mask(y, x) = in_annulus ? 1.f : 0.f;

                double vx = 0, vy = 0, vz = 0;
                if (in_annulus) {
                    vx = dscale_dt * ox + omega * (-oy);  // radial + rotational field
                    vy = dscale_dt * oy + omega * ox;
                    vz = v_long;
                }
                float px = static_cast<float>(vx / config.venc_mm_per_s.x());
                float py = static_cast<float>(vy / config.venc_mm_per_s.y());
                float pz = static_cast<float>(vz / config.venc_mm_per_s.z());
                if (sigma > 0.f) {
                    px += sigma * static_cast<float>(noise.gaussian());
                    py += sigma * static_cast<float>(noise.gaussian());
                    pz += sigma * static_cast<float>(noise.gaussian());
                }
                phase[0](y, x) = std::clamp(px, -1.f, 1.f);
                phase[1](y, x) = std::clamp(py, -1.f, 1.f);
                phase[2](y, x) = std::clamp(pz, -1.f, 1.f);
            }
        }
        series.magnitude.push_back(std::move(mag));
        series.phase.push_back(std::move(phase));
        series.mask.push_back(std::move(mask));
    }
    return series;
}

VelocityCurves analytic_velocity_curves(const PhantomConfig& config) {
    validate_phantom_config(config);
    const double two_pi_over_t = 2.0 * std::numbers::pi / config.frames;
    const double e = config.endo_radius_mm, p = config.epi_radius_mm;
    const double mean_radius_ed = (2.0 / 3.0) * (p * p * p - e * e * e) / (p * p - e * e);

    VelocityCurves curves;
    curves.longitudinal.resize(static_cast<size_t>(config.frames));
    curves.radial.resize(static_cast<size_t>(config.frames));
    curves.circumferential.resize(static_cast<size_t>(config.frames));
    for (int t = 0; t < config.frames; ++t) {
        const double phi = cycle_phase(t, config.frames);
        const double scale = 1.0 - config.radial_amplitude * std::sin(phi);
        const double dscale_dt = -config.radial_amplitude * two_pi_over_t * std::cos(phi);
        const double omega = config.twist_amplitude_rad * two_pi_over_t * std::cos(phi);
        const double mean_radius = scale * mean_radius_ed;
        curves.longitudinal[static_cast<size_t>(t)] = config.longitudinal_amplitude * std::sin(phi);
        curves.radial[static_cast<size_t>(t)] = dscale_dt * mean_radius;
        curves.circumferential[static_cast<size_t>(t)] = omega * mean_radius;
    }
    return curves;
}

}  // namespace mvm
