#include <doctest.h>

#include <cmath>

#include "mvm/metrics.hpp"
#include "mvm/morphology.hpp"
#include "mvm/phantom.hpp"
#include "mvm/velocity.hpp"

using namespace mvm;

namespace {

Mask annulus(Index n, double cy, double cx, double r0, double r1) {
    Mask m = Mask::Zero(n, n);
    for (Index y = 0; y < n; ++y)
        for (Index x = 0; x < n; ++x) {
            const double r = std::hypot(double(y) - cy, double(x) - cx);
            if (r >= r0 && r <= r1) m(y, x) = 1.f;
        }
    return m;
}

}  // namespace

TEST_CASE("centroid basics") {
    Mask ring = annulus(64, 32.0, 32.0, 8, 14);
    const auto c = myocardium_centroid(ring);
    CHECK(c.x() == doctest::Approx(32.0).epsilon(0.02));
    CHECK(c.y() == doctest::Approx(32.0).epsilon(0.02));

    Mask single = Mask::Zero(32, 32);
    single(10, 20) = 1.f;
    const auto s = myocardium_centroid(single);
    CHECK(s.x() == doctest::Approx(10.0));
    CHECK(s.y() == doctest::Approx(20.0));

    Mask pair = Mask::Zero(32, 32);
    pair(0, 0) = pair(0, 2) = 1.f;
    const auto p = myocardium_centroid(pair);
    CHECK(p.x() == doctest::Approx(0.0));
    CHECK(p.y() == doctest::Approx(1.0));

    CHECK_THROWS_AS(myocardium_centroid(Mask::Zero(8, 8)), ArgumentError);
}

TEST_CASE("decompose recovers synthetic radial / rotational / through-plane fields") {
    const Index n = 64;
    const Mask mask = annulus(n, 31.5, 31.5, 8, 14);
    const Eigen::Vector3f venc{100.f, 100.f, 100.f};
    const Eigen::Vector2f spacing{1.f, 1.f};
    const auto c = myocardium_centroid(mask);

    SUBCASE("pure radial field v = a * r_hat") {
        const double a = 7.0;
        std::array<ImageF, 3> phase{ImageF::Zero(n, n), ImageF::Zero(n, n), ImageF::Zero(n, n)};
        for (Index y = 0; y < n; ++y)
            for (Index x = 0; x < n; ++x) {
                if (mask(y, x) <= 0.5f) continue;
                const double oy = double(y) - c.x(), ox = double(x) - c.y();
                const double r = std::hypot(oy, ox);
                phase[0](y, x) = float(a * (ox / r) / venc.x());
                phase[1](y, x) = float(a * (oy / r) / venc.y());
            }
        const auto d = decompose_velocity(phase, mask, venc, spacing);
        CHECK(d.radial == doctest::Approx(a).epsilon(1e-5));
        CHECK(d.circumferential == doctest::Approx(0.0).scale(a).epsilon(1e-5));
        CHECK(d.longitudinal == doctest::Approx(0.0));
    }
    SUBCASE("rigid rotation: v_c = omega * mean radius (brute-force oracle)") {
        const double omega = 0.04;
        std::array<ImageF, 3> phase{ImageF::Zero(n, n), ImageF::Zero(n, n), ImageF::Zero(n, n)};
        double mean_r = 0;
        long cnt = 0;
        for (Index y = 0; y < n; ++y)
            for (Index x = 0; x < n; ++x) {
                if (mask(y, x) <= 0.5f) continue;
                const double oy = double(y) - c.x(), ox = double(x) - c.y();
                phase[0](y, x) = float(omega * (-oy) / venc.x());
                phase[1](y, x) = float(omega * (ox) / venc.y());
                mean_r += std::hypot(oy, ox);
                ++cnt;
            }
        mean_r /= double(cnt);
        const auto d = decompose_velocity(phase, mask, venc, spacing);
        CHECK(d.circumferential == doctest::Approx(omega * mean_r).epsilon(1e-4));
        CHECK(std::abs(d.radial) < 1e-4 * omega * mean_r + 1e-6);
    }
    SUBCASE("uniform through-plane velocity is exact") {
        std::array<ImageF, 3> phase{ImageF::Zero(n, n), ImageF::Zero(n, n),
                                    ImageF::Constant(n, n, 0.12f)};
        const auto d = decompose_velocity(phase, mask, venc, spacing);
        CHECK(d.longitudinal == doctest::Approx(12.0).epsilon(1e-5));
    }
}

TEST_CASE("rotation by 90 degrees leaves v_r and v_c unchanged") {
    const Index n = 48;
    const Mask mask = annulus(n, 23.5, 23.5, 6, 11);
    const Eigen::Vector3f venc{80.f, 80.f, 120.f};
    const Eigen::Vector2f spacing{1.f, 1.f};
    const auto c = myocardium_centroid(mask);

    std::array<ImageF, 3> phase{ImageF::Zero(n, n), ImageF::Zero(n, n), ImageF::Zero(n, n)};
    for (Index y = 0; y < n; ++y)
        for (Index x = 0; x < n; ++x) {
            if (mask(y, x) <= 0.5f) continue;
            const double oy = double(y) - c.x(), ox = double(x) - c.y();
            const double r = std::hypot(oy, ox);
            // mixed radial + rotational field
            phase[0](y, x) = float((3.0 * ox / r + 0.02 * (-oy)) / venc.x());
            phase[1](y, x) = float((3.0 * oy / r + 0.02 * (ox)) / venc.y());
            phase[2](y, x) = 0.05f;
        }
    const auto base = decompose_velocity(phase, mask, venc, spacing);

    // rotate the grid by 90 degrees in (x,y): the source of new pixel (y,x)
    // is old (n-1-x, y), and the in-plane vector rotates (vx,vy) -> (-vy,vx)
    Mask rmask(n, n);
    std::array<ImageF, 3> rphase{ImageF(n, n), ImageF(n, n), ImageF(n, n)};
    for (Index y = 0; y < n; ++y)
        for (Index x = 0; x < n; ++x) {
            const Index oy = n - 1 - x, ox = y;
            rmask(y, x) = mask(oy, ox);
            const float vx = phase[0](oy, ox), vy = phase[1](oy, ox);
            rphase[0](y, x) = -vy * venc.y() / venc.x();
            rphase[1](y, x) = vx * venc.x() / venc.y();
            rphase[2](y, x) = phase[2](oy, ox);
        }
    const auto rot = decompose_velocity(rphase, rmask, venc, spacing);
    CHECK(rot.radial == doctest::Approx(base.radial).epsilon(1e-6));
    CHECK(rot.circumferential == doctest::Approx(base.circumferential).epsilon(1e-6));
    CHECK(rot.longitudinal == doctest::Approx(base.longitudinal).epsilon(1e-6));
}

TEST_CASE("velocity curves from a noise-free phantom match the analytic oracle") {
    PhantomConfig cfg;
    cfg.frames = 50;
    cfg.noise_sigma = 0.0;
    const MVMSeries s = generate_phantom(cfg);
    const VelocityCurves measured = velocity_curves(s);
    const VelocityCurves analytic = analytic_velocity_curves(cfg);

    REQUIRE(measured.frames() == 50);
    CHECK(pearson(measured.longitudinal, analytic.longitudinal) > 0.999);
    CHECK(pearson(measured.radial, analytic.radial) > 0.999);
    CHECK(pearson(measured.circumferential, analytic.circumferential) > 0.999);

    auto peak = [](const std::vector<double>& v) {
        double p = 0;
        for (double e : v) p = std::max(p, std::abs(e));
        return p;
    };
    for (int t = 0; t < 50; ++t) {
        CHECK(std::abs(measured.longitudinal[size_t(t)] - analytic.longitudinal[size_t(t)]) <=
              0.02 * peak(analytic.longitudinal) + 1e-12);
        CHECK(std::abs(measured.radial[size_t(t)] - analytic.radial[size_t(t)]) <=
              0.02 * peak(analytic.radial) + 1e-12);
        CHECK(std::abs(measured.circumferential[size_t(t)] - analytic.circumferential[size_t(t)]) <=
              0.02 * peak(analytic.circumferential) + 1e-12);
    }
}

TEST_CASE("static phantom yields null curves") {
    PhantomConfig cfg;
    cfg.frames = 8;
    cfg.radial_amplitude = 0;
    cfg.twist_amplitude_rad = 0;
    cfg.longitudinal_amplitude = 0;
    const MVMSeries s = generate_phantom(cfg);
    const VelocityCurves c = velocity_curves(s);
    for (int t = 0; t < 8; ++t) {
        CHECK(std::abs(c.longitudinal[size_t(t)]) < 1e-6);
        CHECK(std::abs(c.radial[size_t(t)]) < 1e-6);
        CHECK(std::abs(c.circumferential[size_t(t)]) < 1e-6);
    }
}

TEST_CASE("velocity coefficient combinations") {
    VelocityCurves a;
    for (int t = 0; t < 20; ++t) {
        const double phi = 2.0 * 3.14159265358979 * t / 20.0;
        a.longitudinal.push_back(std::sin(phi));
        a.radial.push_back(std::cos(phi));
        a.circumferential.push_back(std::sin(2 * phi));
    }
    CHECK(velocity_coefficient(a, a) == doctest::Approx(1.0));

    VelocityCurves neg = a;
    for (auto* v : {&neg.longitudinal, &neg.radial, &neg.circumferential})
        for (double& e : *v) e = -e;
    CHECK(velocity_coefficient(neg, a) == doctest::Approx(-1.0));

    // symmetric, and invariant to positive affine scaling
    VelocityCurves scaled = a;
    for (double& e : scaled.radial) e = 4.0 * e + 2.0;
    CHECK(velocity_coefficient(scaled, a) == doctest::Approx(1.0));
    CHECK(velocity_coefficient(a, scaled) == doctest::Approx(1.0));

    VelocityCurves constant = a;
    for (double& e : constant.radial) e = 3.0;
    CHECK_THROWS_WITH_AS(velocity_coefficient(constant, a), doctest::Contains("radial"), NumericError);

    // mean of per-direction correlations: one direction negated
    VelocityCurves mixed = a;
    for (double& e : mixed.circumferential) e = -e;
    CHECK(velocity_coefficient(mixed, a) == doctest::Approx((1.0 + 1.0 - 1.0) / 3.0));
}

TEST_CASE("empty mask frame is a per-frame error") {
    PhantomConfig cfg;
    cfg.frames = 6;
    MVMSeries s = generate_phantom(cfg);
    std::vector<ImageF> masks = s.mask;
    masks[3].setZero();
    CHECK_THROWS_WITH_AS(velocity_curves(s, masks), doctest::Contains("frame 3"), NumericError);
}
