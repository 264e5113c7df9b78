#include <doctest.h>

#include <cmath>

#include "mvm/losses.hpp"
#include "mvm/rng.hpp"

using namespace mvm;

namespace {

ImageF random_image(Rng& rng, Index h, Index w, float lo, float hi) {
    ImageF img(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) img(y, x) = lo + float(rng.uniform01()) * (hi - lo);
    return img;
}

Mask random_mask(Rng& rng, Index h, Index w, double p) {
    Mask m(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) m(y, x) = rng.uniform01() < p ? 1.f : 0.f;
    return m;
}

// central finite difference of f at x, step hstep
template <typename F>
double fd_grad(F&& f, ImageF& x, Index y, Index xx, float hstep) {
    const float orig = x(y, xx);
    x(y, xx) = orig + hstep;
    const double hi = f();
    x(y, xx) = orig - hstep;
    const double lo = f();
    x(y, xx) = orig;
    return (hi - lo) / (2.0 * double(hstep));
}

}  // namespace

TEST_CASE("denoise weight map thresholds the target magnitude") {
    CHECK((denoise_weight_map(ImageF::Zero(8, 8), 0.1) == 0.f).all());
    CHECK((denoise_weight_map(ImageF::Ones(8, 8), 0.1) == 1.f).all());

    // phantom-like frame: pixelwise oracle
    Rng rng(3);
    ImageF mag(16, 16);
    for (Index y = 0; y < 16; ++y)
        for (Index x = 0; x < 16; ++x) {
            const double r = std::hypot(double(y) - 7.5, double(x) - 7.5);
            if (r < 3)
                mag(y, x) = 0.4f;
            else if (r < 6)
                mag(y, x) = 0.8f;
            else
                mag(y, x) = std::abs(0.02f * float(rng.gaussian()));
        }
    const Mask w = denoise_weight_map(mag, 0.1);
    for (Index y = 0; y < 16; ++y)
        for (Index x = 0; x < 16; ++x) CHECK(w(y, x) == (mag(y, x) > 0.1f ? 1.f : 0.f));
}

TEST_CASE("myocardium weight map = filled union dilated by 2") {
    SUBCASE("single pixel gives the 13-pixel disk") {
        Mask m = Mask::Zero(11, 11);
        m(5, 5) = 1.f;
        const Mask w = myocardium_weight_map({m, m, m}, 2);
        CHECK(int(w.sum()) == 13);
    }
    SUBCASE("annulus in all frames: dilated filled disk, oracle per pixel") {
        Mask ring = Mask::Zero(24, 24);
        for (Index y = 0; y < 24; ++y)
            for (Index x = 0; x < 24; ++x) {
                const double r = std::hypot(double(y) - 11.5, double(x) - 11.5);
                if (r >= 4 && r <= 7) ring(y, x) = 1.f;
            }
        const Mask w = myocardium_weight_map({ring, ring, ring}, 2);
        // oracle: brute-force dilation of the filled disk
        const Mask filled = fill_holes(ring);
        for (Index y = 0; y < 24; ++y)
            for (Index x = 0; x < 24; ++x) {
                bool expect = false;
                for (int dy = -2; dy <= 2 && !expect; ++dy)
                    for (int dx = -2; dx <= 2; ++dx) {
                        if (dy * dy + dx * dx > 4) continue;
                        const Index yy = y + dy, xx = x + dx;
                        if (yy >= 0 && yy < 24 && xx >= 0 && xx < 24 && filled(yy, xx) > 0.5f) {
                            expect = true;
                            break;
                        }
                    }
                CHECK(w(y, x) == (expect ? 1.f : 0.f));
            }
    }
    SUBCASE("all-empty masks produce an all-zero map") {
        const Mask z = Mask::Zero(8, 8);
        CHECK((myocardium_weight_map({z, z, z}, 2) == 0.f).all());
    }
}

TEST_CASE("weighted MAE values") {
    ImageF pred(2, 2), target(2, 2), w1(2, 2);
    SUBCASE("perfect prediction is zero") {
        pred.setConstant(0.3f);
        target.setConstant(0.3f);
        CHECK(weighted_mae(pred, target, ImageF::Ones(2, 2)) == doctest::Approx(0.0));
    }
    SUBCASE("unit weights reduce to plain MAE") {
        pred << 0.f, 0.5f, 1.f, 0.25f;
        target << 0.5f, 0.5f, 0.f, 0.25f;
        CHECK(weighted_mae(pred, target, ImageF::Ones(2, 2)) == doctest::Approx(1.5 / 4.0));
    }
    SUBCASE("2x2 fixture matches hand arithmetic") {
        // |diff| = [[1,0],[0,1]], omega1 = [[1,0],[0,0]], omega2 = 0, eps 0.1
        pred << 1.f, 0.f, 0.f, 1.f;
        target << 0.f, 0.f, 0.f, 0.f;
        w1 << 1.f, 0.f, 0.f, 0.f;
        const ImageF weight = w1 + 0.1f;
        CHECK(weighted_mae(pred, target, weight) == doctest::Approx(1.2 / 1.4).epsilon(1e-6));
    }
    SUBCASE("zero total weight is an error") {
        CHECK_THROWS_AS(weighted_mae(pred, target, ImageF::Zero(2, 2)), NumericError);
    }
    SUBCASE("invariant under joint pixel permutation") {
        Rng rng(5);
        ImageF p = random_image(rng, 3, 3, 0, 1), t = random_image(rng, 3, 3, 0, 1),
               w = random_image(rng, 3, 3, 0.1f, 2);
        const double base = weighted_mae(p, t, w);
        // reverse all three jointly
        ImageF pr = p.reverse(), tr = t.reverse(), wr = w.reverse();
        CHECK(weighted_mae(pr, tr, wr) == doctest::Approx(base).epsilon(1e-9));
    }
}

TEST_CASE("dice loss values") {
    ImageF gt(4, 4);
    gt.setZero();
    gt.block(0, 0, 2, 4).setConstant(1.f);  // half the pixels

    SUBCASE("perfect binary prediction is zero") {
        CHECK(dice_loss(gt, gt, 1.0) == doctest::Approx(0.0));
    }
    SUBCASE("all-ones vs empty: 1 - 1/(N+1)") {
        CHECK(dice_loss(ImageF::Ones(4, 4), ImageF::Zero(4, 4), 1.0) ==
              doctest::Approx(1.0 - 1.0 / 17.0));
    }
    SUBCASE("uniform half prediction against half mask") {
        const ImageF p = ImageF::Constant(4, 4, 0.5f);
        // 1 - (2*4+1)/(8+8+1)
        CHECK(dice_loss(p, gt, 1.0) == doctest::Approx(1.0 - 9.0 / 17.0));
    }
    SUBCASE("stays in [0,1]") {
        Rng rng(11);
        for (int i = 0; i < 10; ++i) {
            const ImageF p = random_image(rng, 4, 4, 0, 1);
            const Mask g = random_mask(rng, 4, 4, 0.4);
            const double l = dice_loss(p, g, 1.0);
            CHECK(l >= 0.0);
            CHECK(l <= 1.0);
        }
    }
}

TEST_CASE("boundary loss values and monotonicity") {
    Mask disk = Mask::Zero(8, 8);
    for (Index y = 0; y < 8; ++y)
        for (Index x = 0; x < 8; ++x)
            if (std::hypot(double(y) - 3.5, double(x) - 3.5) <= 2.5) disk(y, x) = 1.f;
    const ImageF sdm = signed_distance_map(disk);

    CHECK(boundary_loss(ImageF::Zero(8, 8), sdm) == doctest::Approx(0.0));

    // brute-force evaluation oracle on the disk
    double expected = 0;
    for (Index y = 0; y < 8; ++y)
        for (Index x = 0; x < 8; ++x) expected += double(sdm(y, x)) * double(disk(y, x));
    expected /= 64.0;
    CHECK(boundary_loss(disk, sdm) == doctest::Approx(expected).epsilon(1e-9));

    // gt indicator scores strictly below the complement prediction
    CHECK(boundary_loss(disk, sdm) < boundary_loss(ImageF(1.f - disk), sdm));

    // moving mass from positive- to negative-sdm pixels decreases the loss
    ImageF p = ImageF::Constant(8, 8, 0.5f);
    const double before = boundary_loss(p, sdm);
    Index neg_y = 3, neg_x = 3;  // inside
    Index pos_y = 0, pos_x = 0;  // outside
    p(neg_y, neg_x) += 0.3f;
    p(pos_y, pos_x) -= 0.3f;
    CHECK(boundary_loss(p, sdm) < before);

    // monotone along the linear path (1-lambda)*p0 + lambda*gt when p0 puts
    // more mass outside than the gt indicator
    Rng rng(31);
    ImageF p0(8, 8);
    for (Index y = 0; y < 8; ++y)
        for (Index x = 0; x < 8; ++x) p0(y, x) = 0.3f + 0.5f * float(rng.uniform01());
    double prev = boundary_loss(p0, sdm);
    for (double lambda : {0.25, 0.5, 0.75, 1.0}) {
        const ImageF mix = (1.f - float(lambda)) * p0 + float(lambda) * disk;
        const double cur = boundary_loss(mix, sdm);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("total loss composes terms and matches an independent recomputation") {
    // 4x4 fixture with known diffs and masks
    ImageF mag_pred(4, 4), mag_target(4, 4);
    mag_pred << 0.9f, 0.1f, 0.0f, 0.2f, 0.5f, 0.5f, 0.25f, 0.75f, 0.1f, 0.0f, 0.6f, 0.4f, 0.0f, 0.05f,
        0.2f, 0.3f;
    mag_target << 0.8f, 0.2f, 0.0f, 0.2f, 0.4f, 0.6f, 0.25f, 0.7f, 0.15f, 0.0f, 0.5f, 0.4f, 0.05f,
        0.05f, 0.25f, 0.35f;
    std::array<ImageF, 3> phase_pred, phase_target;
    for (int d = 0; d < 3; ++d) {
        phase_pred[size_t(d)] = ImageF::Constant(4, 4, 0.1f * float(d + 1));
        phase_target[size_t(d)] = ImageF::Constant(4, 4, 0.1f * float(d + 1) - 0.05f);
    }
    Mask m = Mask::Zero(4, 4);
    m(1, 1) = m(1, 2) = m(2, 1) = m(2, 2) = 1.f;
    ImageF mask_prob = ImageF::Constant(4, 4, 0.3f);

    LossConfig cfg;
    LossInputs in;
    in.mag_pred = &mag_pred;
    in.phase_pred = {&phase_pred[0], &phase_pred[1], &phase_pred[2]};
    in.mask_prob = &mask_prob;
    in.mag_target = &mag_target;
    in.phase_target = {&phase_target[0], &phase_target[1], &phase_target[2]};
    in.mask_target = &m;
    in.sample_masks = {&m, &m, &m};

    const LossBreakdown got = total_loss(in, cfg);

    // independent scalar recomputation with explicit loops
    const Mask w1 = denoise_weight_map(mag_target, cfg.bg_threshold);
    const Mask w2 = myocardium_weight_map({m, m, m}, cfg.dilation_px);
    double sum_w = 0, sum_mag = 0, sum_phase = 0;
    for (Index y = 0; y < 4; ++y)
        for (Index x = 0; x < 4; ++x) {
            const double w = 0.1 + w1(y, x) + w2(y, x);
            sum_w += w;
            sum_mag += w * std::abs(double(mag_pred(y, x)) - double(mag_target(y, x)));
            for (int d = 0; d < 3; ++d)
                sum_phase += w * std::abs(double(phase_pred[size_t(d)](y, x)) -
                                          double(phase_target[size_t(d)](y, x)));
        }
    const double syn_mag = sum_mag / sum_w;
    const double syn_phase = sum_phase / (3.0 * sum_w);

    double inter = 0, sp = 0, sg = 0;
    for (Index y = 0; y < 4; ++y)
        for (Index x = 0; x < 4; ++x) {
            inter += double(mask_prob(y, x)) * double(m(y, x));
            sp += mask_prob(y, x);
            sg += m(y, x);
        }
    const double dice = 1.0 - (2.0 * inter + 1.0) / (sp + sg + 1.0);
    const ImageF sdm = signed_distance_map(m);
    double bd = 0;
    for (Index y = 0; y < 4; ++y)
        for (Index x = 0; x < 4; ++x) bd += double(sdm(y, x)) * double(mask_prob(y, x));
    bd /= 16.0;

    const double expected_total = cfg.w_syn * (syn_mag + syn_phase) + cfg.w_seg * (dice + bd);
    CHECK(got.syn_mag == doctest::Approx(syn_mag).epsilon(1e-6));
    CHECK(got.syn_phase == doctest::Approx(syn_phase).epsilon(1e-6));
    CHECK(got.dice == doctest::Approx(dice).epsilon(1e-6));
    CHECK(got.boundary == doctest::Approx(bd).epsilon(1e-6));
    CHECK(got.total == doctest::Approx(expected_total).epsilon(1e-6));

    // breakdown sums to the scalar exactly (same arithmetic path)
    CHECK(got.total ==
          doctest::Approx(cfg.w_syn * (got.syn_mag + got.syn_phase) + cfg.w_seg * (got.dice + got.boundary))
              .epsilon(1e-12));

    SUBCASE("perfect prediction leaves only the boundary term") {
        ImageF perfect_mask = m;
        LossInputs p = in;
        p.mag_pred = &mag_target;
        p.phase_pred = {&phase_target[0], &phase_target[1], &phase_target[2]};
        p.mask_prob = &perfect_mask;
        const LossBreakdown b = total_loss(p, cfg);
        CHECK(b.syn_mag == doctest::Approx(0.0));
        CHECK(b.syn_phase == doctest::Approx(0.0));
        CHECK(b.dice == doctest::Approx(0.0).epsilon(1e-6));
        CHECK(b.total == doctest::Approx(cfg.w_seg * b.boundary).epsilon(1e-9));
    }
    SUBCASE("w_seg = 0 reduces to pure synthesis") {
        LossConfig c2 = cfg;
        c2.w_seg = 0;
        const LossBreakdown b = total_loss(in, c2);
        CHECK(b.total == doctest::Approx(c2.w_syn * (b.syn_mag + b.syn_phase)).epsilon(1e-12));
    }
    SUBCASE("unweighted config uses W = 1") {
        LossConfig c2 = cfg;
        c2.weighted = false;
        const LossBreakdown b = total_loss(in, c2);
        double acc = 0;
        for (Index y = 0; y < 4; ++y)
            for (Index x = 0; x < 4; ++x)
                acc += std::abs(double(mag_pred(y, x)) - double(mag_target(y, x)));
        CHECK(b.syn_mag == doctest::Approx(acc / 16.0).epsilon(1e-6));
    }
}

TEST_CASE("analytic loss gradients match finite differences") {
    Rng rng(17);
    const Index n = 16;
    ImageF pred = random_image(rng, n, n, 0.05f, 0.95f);
    ImageF target = random_image(rng, n, n, 0.05f, 0.95f);
    const ImageF weight = random_image(rng, n, n, 0.1f, 2.f);
    Mask gt = Mask::Zero(n, n);
    for (Index y = 4; y < 11; ++y)
        for (Index x = 5; x < 12; ++x) gt(y, x) = 1.f;
    const ImageF sdm = signed_distance_map(gt);

    Rng pick(23);
    const float h = 1e-3f;

    SUBCASE("weighted MAE") {
        const auto analytic = weighted_mae_grad({&pred}, {&target}, weight);
        for (int trial = 0; trial < 20; ++trial) {
            const Index y = Index(pick.below(uint32_t(n))), x = Index(pick.below(uint32_t(n)));
            if (std::abs(pred(y, x) - target(y, x)) < 5 * h) continue;  // |.| kink within the stencil
            const double fd =
                fd_grad([&] { return weighted_mae(pred, target, weight); }, pred, y, x, h);
            CHECK(double(analytic[0](y, x)) == doctest::Approx(fd).epsilon(1e-3));
        }
    }
    SUBCASE("dice loss") {
        const ImageF analytic = dice_loss_grad(pred, gt, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Index y = Index(pick.below(uint32_t(n))), x = Index(pick.below(uint32_t(n)));
            const double fd = fd_grad([&] { return dice_loss(pred, gt, 1.0); }, pred, y, x, h);
            CHECK(double(analytic(y, x)) == doctest::Approx(fd).epsilon(1e-3).scale(1e-3));
        }
    }
    SUBCASE("boundary loss") {
        const ImageF analytic = boundary_loss_grad(pred, sdm);
        for (int trial = 0; trial < 20; ++trial) {
            const Index y = Index(pick.below(uint32_t(n))), x = Index(pick.below(uint32_t(n)));
            const double fd = fd_grad([&] { return boundary_loss(pred, sdm); }, pred, y, x, h);
            CHECK(double(analytic(y, x)) == doctest::Approx(fd).epsilon(1e-3).scale(1e-3));
        }
    }
}
