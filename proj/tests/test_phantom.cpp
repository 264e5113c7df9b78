#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mvm/phantom.hpp"

using namespace mvm;

TEST_CASE("static phantom: noise-only phase, frozen mask") {
    PhantomConfig cfg;
    cfg.radial_amplitude = 0.0;
    cfg.twist_amplitude_rad = 0.0;
    cfg.longitudinal_amplitude = 0.0;
    cfg.noise_sigma = 0.05;
    cfg.frames = 10;
    const MVMSeries s = generate_phantom(cfg);
    CHECK_NOTHROW(validate_series(s));

    // mask identical across t
    for (int t = 1; t < s.frames(); ++t) CHECK((s.mask[size_t(t)] == s.mask[0]).all());

    // phase inside the annulus is pure noise: mean over many pixels ~ 0
    double acc = 0;
    long n = 0;
    for (int t = 0; t < s.frames(); ++t)
        for (int d = 0; d < 3; ++d)
            for (Index y = 0; y < s.rows(); ++y)
                for (Index x = 0; x < s.cols(); ++x)
                    if (s.mask[size_t(t)](y, x) > 0.5f) {
                        acc += s.phase[size_t(t)][size_t(d)](y, x);
                        ++n;
                    }
    CHECK(std::abs(acc / double(n)) < 3.0 * 0.05 / std::sqrt(double(n)) + 1e-3);
}

TEST_CASE("same seed gives bit-identical series") {
    PhantomConfig cfg;
    cfg.noise_sigma = 0.03;
    cfg.frames = 6;
    const MVMSeries a = generate_phantom(cfg);
    const MVMSeries b = generate_phantom(cfg);
    for (int t = 0; t < a.frames(); ++t) {
        CHECK((a.magnitude[size_t(t)] == b.magnitude[size_t(t)]).all());
        for (int d = 0; d < 3; ++d)
            CHECK((a.phase[size_t(t)][size_t(d)] == b.phase[size_t(t)][size_t(d)]).all());
    }
    PhantomConfig other = cfg;
    other.seed = cfg.seed + 1;
    const MVMSeries c = generate_phantom(other);
    CHECK((c.magnitude[0] != a.magnitude[0]).any());
}

TEST_CASE("mean radial phase at t=0 matches the closed-form derivative") {
    // oracle: independent numeric evaluation of the motion model over mask
    // pixels (noise-free default config)
    PhantomConfig cfg;  // noise_sigma defaults to 0
    const MVMSeries s = generate_phantom(cfg);

    const double cy = cfg.cy(), cx = cfg.cx();
    double measured = 0, expected = 0;
    long n = 0;
    for (Index y = 0; y < s.rows(); ++y)
        for (Index x = 0; x < s.cols(); ++x) {
            if (s.mask[0](y, x) <= 0.5f) continue;
            const double oy = (double(y) - cy) * cfg.pixel_spacing_mm.x();
            const double ox = (double(x) - cx) * cfg.pixel_spacing_mm.y();
            const double r = std::hypot(oy, ox);
            const double vx = double(s.phase[0][0](y, x)) * cfg.venc_mm_per_s.x();
            const double vy = double(s.phase[0][1](y, x)) * cfg.venc_mm_per_s.y();
            measured += (vx * ox + vy * oy) / r;  // projection onto r_hat
            expected += r;
            ++n;
        }
    measured /= double(n);
    const double mean_radius = expected / double(n);
    const double ds_dt = -cfg.radial_amplitude * 2.0 * std::numbers::pi / cfg.frames;
    const double predicted = ds_dt * mean_radius;
    CHECK(measured / cfg.venc_mm_per_s.x() ==
          doctest::Approx(predicted / cfg.venc_mm_per_s.x()).epsilon(0.02));
}

TEST_CASE("analytic velocity curves: single-component configurations") {
    SUBCASE("longitudinal only") {
        PhantomConfig cfg;
        cfg.radial_amplitude = 0;
        cfg.twist_amplitude_rad = 0;
        cfg.longitudinal_amplitude = 25.0;
        const VelocityCurves c = analytic_velocity_curves(cfg);
        REQUIRE(c.frames() == cfg.frames);
        for (int t = 0; t < cfg.frames; ++t) {
            const double phi = 2.0 * std::numbers::pi * t / cfg.frames;
            CHECK(c.longitudinal[size_t(t)] == doctest::Approx(25.0 * std::sin(phi)));
            CHECK(c.radial[size_t(t)] == doctest::Approx(0.0));
            CHECK(c.circumferential[size_t(t)] == doctest::Approx(0.0));
        }
    }
    SUBCASE("twist only matches the brute-force pixel average") {
        PhantomConfig cfg;
        cfg.radial_amplitude = 0;
        cfg.twist_amplitude_rad = 0.4;
        cfg.longitudinal_amplitude = 0;
        const VelocityCurves c = analytic_velocity_curves(cfg);
        const MVMSeries s = generate_phantom(cfg);

        for (int t : {0, 7, 13, 25, 37}) {
            // oracle: average the analytic rotational field over mask pixels
            const double phi = 2.0 * std::numbers::pi * t / cfg.frames;
            const double omega = cfg.twist_amplitude_rad * (2.0 * std::numbers::pi / cfg.frames) *
                                 std::cos(phi);
            double mean_r = 0;
            long n = 0;
            for (Index y = 0; y < s.rows(); ++y)
                for (Index x = 0; x < s.cols(); ++x)
                    if (s.mask[size_t(t)](y, x) > 0.5f) {
                        mean_r += std::hypot((double(y) - cfg.cy()) * cfg.pixel_spacing_mm.x(),
                                             (double(x) - cfg.cx()) * cfg.pixel_spacing_mm.y());
                        ++n;
                    }
            mean_r /= double(n);
            CHECK(c.radial[size_t(t)] == doctest::Approx(0.0));
            if (std::abs(omega) > 1e-9)
                CHECK(c.circumferential[size_t(t)] ==
                      doctest::Approx(omega * mean_r).epsilon(0.02));
        }
    }
    SUBCASE("curve length equals frame count") {
        PhantomConfig cfg;
        cfg.frames = 50;
        const VelocityCurves c = analytic_velocity_curves(cfg);
        CHECK(c.longitudinal.size() == 50);
        CHECK(c.radial.size() == 50);
        CHECK(c.circumferential.size() == 50);
    }
}

TEST_CASE("phantom config invariants") {
    PhantomConfig cfg;
    cfg.endo_radius_mm = 14;
    cfg.epi_radius_mm = 8;
    CHECK_THROWS_AS(generate_phantom(cfg), ArgumentError);

    PhantomConfig margin;
    margin.epi_radius_mm = 40;  // cannot fit a 64px image with 4px margin
    CHECK_THROWS_AS(generate_phantom(margin), ArgumentError);

    PhantomConfig amp;
    amp.radial_amplitude = 0.6;
    CHECK_THROWS_AS(generate_phantom(amp), ArgumentError);
}

TEST_CASE("generated phantoms pass series validation; deterministic per frame") {
    PhantomConfig cfg;
    cfg.noise_sigma = 0.02;
    cfg.frames = 12;
    const MVMSeries s = generate_phantom(cfg);
    CHECK_NOTHROW(validate_series(s));
    CHECK_FALSE(series_degenerate(s));
    const MVMSeries s2 = generate_phantom(cfg);
    CHECK((s.mask[3] == s2.mask[3]).all());
}
