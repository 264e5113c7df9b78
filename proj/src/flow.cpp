#include "mvm/flow.hpp"

#include <cmath>

namespace mvm {

namespace {

inline float at_clamped(const ImageF& img, Index y, Index x) {
    y = std::min(std::max(y, Index(0)), img.rows() - 1);
    x = std::min(std::max(x, Index(0)), img.cols() - 1);
    return img(y, x);
}

// 3x3 box mean with edge replication.
ImageF box3_mean(const ImageF& img) {
    const Index h = img.rows(), w = img.cols();
    ImageF out(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            float acc = 0.f;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) acc += at_clamped(img, y + dy, x + dx);
            out(y, x) = acc / 9.f;
        }
    return out;
}

}  // namespace

ImageF linear_interpolate(const ImageF& frame_a, const ImageF& frame_b, int k) {
    require_same_shape(frame_a, frame_b, "linear_interpolate");
    return lerp_anchor(frame_a, frame_b, k);
}

FlowField horn_schunck_flow(const ImageF& img1, const ImageF& img2, const HSConfig& cfg) {
    require_same_shape(img1, img2, "horn_schunck_flow");
    if (!all_finite(img1) || !all_finite(img2))
        throw NumericError("horn_schunck_flow: non-finite input image");
    if (cfg.iterations < 1) throw ArgumentError("horn_schunck_flow: iterations must be >= 1");

    const Index h = img1.rows(), w = img1.cols();
    ImageF ix(h, w), iy(h, w), it(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            // 2x2x2 averaging stencils
            ix(y, x) = 0.25f * (at_clamped(img1, y, x + 1) - at_clamped(img1, y, x) +
                                at_clamped(img1, y + 1, x + 1) - at_clamped(img1, y + 1, x) +
                                at_clamped(img2, y, x + 1) - at_clamped(img2, y, x) +
                                at_clamped(img2, y + 1, x + 1) - at_clamped(img2, y + 1, x));
            iy(y, x) = 0.25f * (at_clamped(img1, y + 1, x) - at_clamped(img1, y, x) +
                                at_clamped(img1, y + 1, x + 1) - at_clamped(img1, y, x + 1) +
                                at_clamped(img2, y + 1, x) - at_clamped(img2, y, x) +
                                at_clamped(img2, y + 1, x + 1) - at_clamped(img2, y, x + 1));
            it(y, x) = 0.25f * (at_clamped(img2, y, x) - at_clamped(img1, y, x) +
                                at_clamped(img2, y + 1, x) - at_clamped(img1, y + 1, x) +
                                at_clamped(img2, y, x + 1) - at_clamped(img1, y, x + 1) +
                                at_clamped(img2, y + 1, x + 1) - at_clamped(img1, y + 1, x + 1));
        }

    const float alpha2 = static_cast<float>(cfg.alpha * cfg.alpha);
    const ImageF denom = alpha2 + ix.square() + iy.square();

    FlowField flow{ImageF::Zero(h, w), ImageF::Zero(h, w)};
    for (int iter = 0; iter < cfg.iterations; ++iter) {
        const ImageF u_avg = box3_mean(flow.u);
        const ImageF v_avg = box3_mean(flow.v);
        const ImageF coupling = (ix * u_avg + iy * v_avg + it) / denom;
        ImageF u_new = u_avg - ix * coupling;
        ImageF v_new = v_avg - iy * coupling;
        const double update = static_cast<double>(((u_new - flow.u).abs() + (v_new - flow.v).abs()).mean());
        flow.u.swap(u_new);
        flow.v.swap(v_new);
        if (update < cfg.stop_tol) break;
    }
    return flow;
}

ImageF flow_interpolate(const ImageF& frame_a, const ImageF& frame_b, const FlowField& flow, int k) {
    require_same_shape(frame_a, frame_b, "flow_interpolate");
    require_same_shape(frame_a, flow.u, "flow_interpolate");
    const float t = static_cast<float>(k) / static_cast<float>(kAnchorGap);
    const Index h = frame_a.rows(), w = frame_a.cols();
    ImageF out(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            const float fx = flow.u(y, x), fy = flow.v(y, x);
            const float a = sample_bilinear(frame_a, static_cast<float>(y) - t * fy,
                                            static_cast<float>(x) - t * fx);
            const float b = sample_bilinear(frame_b, static_cast<float>(y) + (1.f - t) * fy,
                                            static_cast<float>(x) + (1.f - t) * fx);
            out(y, x) = (1.f - t) * a + t * b;
        }
    return out;
}

BaselinePrediction baseline_synthesize(const SynthesisSample& sample, BaselineMethod method,
                                       const HSConfig& cfg) {
    BaselinePrediction pred;
    if (method == BaselineMethod::linear) {
        pred.mag_pred = linear_interpolate(sample.mag_in[0], sample.mag_in[1], sample.k);
        for (int d = 0; d < 3; ++d)
            pred.phase_pred[static_cast<size_t>(d)] =
                linear_interpolate(sample.phase_in[static_cast<size_t>(2 * d)],
                                   sample.phase_in[static_cast<size_t>(2 * d + 1)], sample.k);
        return pred;
    }
    const FlowField flow = horn_schunck_flow(sample.mag_in[0], sample.mag_in[1], cfg);
    pred.mag_pred = flow_interpolate(sample.mag_in[0], sample.mag_in[1], flow, sample.k);
    for (int d = 0; d < 3; ++d)
        pred.phase_pred[static_cast<size_t>(d)] =
            flow_interpolate(sample.phase_in[static_cast<size_t>(2 * d)],
                             sample.phase_in[static_cast<size_t>(2 * d + 1)], flow, sample.k);
    return pred;
}

}  // namespace mvm
