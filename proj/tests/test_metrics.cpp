#include <doctest.h>

#include <cmath>

#include "mvm/metrics.hpp"
#include "mvm/rng.hpp"

using namespace mvm;

namespace {

ImageF random_image(Rng& rng, Index h, Index w, float lo = 0.f, float hi = 1.f) {
    ImageF img(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) img(y, x) = lo + float(rng.uniform01()) * (hi - lo);
    return img;
}

}  // namespace

TEST_CASE("mae basics and brute-force fixture") {
    const ImageF a = ImageF::Constant(4, 4, 0.5f);
    CHECK(mae(a, a) == doctest::Approx(0.0));
    CHECK(mae(a, ImageF(a + 0.1f)) == doctest::Approx(0.1).epsilon(1e-6));

    Rng rng(2);
    const ImageF p = random_image(rng, 4, 4), t = random_image(rng, 4, 4);
    double acc = 0;
    for (Index y = 0; y < 4; ++y)
        for (Index x = 0; x < 4; ++x) acc += std::abs(double(p(y, x)) - double(t(y, x)));
    CHECK(mae(p, t) == doctest::Approx(acc / 16.0).epsilon(1e-6));

    CHECK_THROWS_AS(mae(p, ImageF::Zero(3, 3)), ShapeError);
}

TEST_CASE("psnr closed forms") {
    const ImageF a = ImageF::Constant(8, 8, 0.25f);
    CHECK(std::isinf(psnr(a, a)));

    // exact fixture: 4 of 100 pixels differ by exactly 0.5 -> MSE = 0.01
    ImageF p = ImageF::Constant(10, 10, 0.25f), t = p;
    t(0, 0) = t(3, 4) = t(7, 2) = t(9, 9) = 0.75f;
    CHECK(psnr(p, t) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(psnr(a, ImageF(a + 0.1f)) == doctest::Approx(20.0).epsilon(1e-6));
    CHECK(psnr(a, ImageF(a + 1e-4f)) == doctest::Approx(80.0).epsilon(1e-4)); // MSE 1e-8

    // strictly decreasing in MSE
    CHECK(psnr(a, ImageF(a + 0.2f)) < psnr(a, ImageF(a + 0.1f)));
}

TEST_CASE("ssim identity, luminance shift, and noise decorrelation") {
    Rng rng(7);
    const ImageF img = random_image(rng, 32, 32, 0.f, 1.f);
    CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-9));

    SUBCASE("constant shift: luminance term < 1, structure intact") {
        const ImageF base = ImageF::Constant(32, 32, 0.4f);
        const float c = 0.2f;
        const ImageF shifted = base + c;
        // closed form on constant patches: contrast/structure terms are 1 via
        // the stabilizers, luminance term = (2 m1 m2 + C1)/(m1^2 + m2^2 + C1)
        const double m1 = 0.4, m2 = 0.6, c1 = 0.01 * 0.01;
        const double expected = (2 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
        CHECK(ssim(base, shifted) == doctest::Approx(expected).epsilon(1e-4));
        CHECK(ssim(base, shifted) < 1.0);
    }
    SUBCASE("independent noise images are nearly uncorrelated") {
        Rng na(100), nb(200);
        ImageF a(64, 64), b(64, 64);
        for (Index y = 0; y < 64; ++y)
            for (Index x = 0; x < 64; ++x) {
                a(y, x) = 0.5f + 0.2f * float(na.gaussian());
                b(y, x) = 0.5f + 0.2f * float(nb.gaussian());
            }
        CHECK(std::abs(ssim(a, b)) < 0.1);
    }
    SUBCASE("too-small image is rejected") {
        const ImageF tiny = ImageF::Zero(8, 8);
        CHECK_THROWS_AS(ssim(tiny, tiny), ArgumentError);
    }
}

TEST_CASE("dice score conventions") {
    ImageF a = ImageF::Zero(8, 8), b = ImageF::Zero(8, 8);
    a.block(0, 0, 4, 8).setConstant(1.f);
    CHECK(dice_score(a, a) == doctest::Approx(1.0));

    b.block(4, 0, 4, 8).setConstant(1.f);
    CHECK(dice_score(a, b) == doctest::Approx(0.0));

    // |A|=2, |B|=2, |A and B|=1
    ImageF c = ImageF::Zero(4, 4), d = ImageF::Zero(4, 4);
    c(0, 0) = c(0, 1) = 1.f;
    d(0, 1) = d(0, 2) = 1.f;
    CHECK(dice_score(c, d) == doctest::Approx(0.5));

    CHECK(dice_score(ImageF::Zero(4, 4), ImageF::Zero(4, 4)) == doctest::Approx(1.0));  // both empty
    CHECK(dice_score(c, d) == dice_score(d, c));  // symmetry
}

TEST_CASE("pearson correlation") {
    CHECK(pearson({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
    CHECK(pearson({1, 2, 3}, {-1, -2, -3}) == doctest::Approx(-1.0));
    CHECK(pearson({1, 2, 3}, {1, 2, 4}) == doctest::Approx(0.982).epsilon(1e-3));

    CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), NumericError);
    CHECK_THROWS_AS(pearson({1}, {2}), NumericError);

    // invariant under positive affine transforms
    Rng rng(5);
    std::vector<double> x, y;
    for (int i = 0; i < 20; ++i) {
        x.push_back(rng.gaussian());
        y.push_back(rng.gaussian());
    }
    const double r = pearson(x, y);
    std::vector<double> xs;
    for (double v : x) xs.push_back(3.5 * v + 11.0);
    CHECK(pearson(xs, y) == doctest::Approx(r).epsilon(1e-12));
}

TEST_CASE("metric report aggregates equal recomputation") {
    MetricReport report;
    Rng rng(9);
    std::vector<double> values;
    for (int i = 0; i < 37; ++i) {
        const double v = rng.gaussian() * 2.0 + 5.0;
        values.push_back(v);
        report.add("psnr", v);
    }
    const auto agg = report.aggregates().at("psnr");
    double mean = 0;
    for (double v : values) mean += v;
    mean /= double(values.size());
    double sq = 0;
    for (double v : values) sq += (v - mean) * (v - mean);
    const double sd = std::sqrt(sq / double(values.size() - 1));
    CHECK(agg.mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(agg.stddev == doctest::Approx(sd).epsilon(1e-9));
    CHECK(agg.count == 37);
}
