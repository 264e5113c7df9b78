#include <algorithm>
#include <cmath>

#include "mvm/harness.hpp"
#include "mvm/png.hpp"

namespace mvm {

namespace {

constexpr Index kPad = 2;

Raster tile_row(const std::vector<Raster>& tiles) {
    Index h = 0, w = 0;
    for (const Raster& t : tiles) {
        h = std::max(h, t.height);
        w += t.width + kPad;
    }
    Raster out(h, w - kPad, 32, 32, 32);
    Index x0 = 0;
    for (const Raster& t : tiles) {
        for (Index y = 0; y < t.height; ++y)
            for (Index x = 0; x < t.width; ++x) {
                const size_t i = 3 * (static_cast<size_t>(y) * static_cast<size_t>(t.width) +
                                      static_cast<size_t>(x));
                out.set(y, x0 + x, t.rgb[i], t.rgb[i + 1], t.rgb[i + 2]);
            }
        x0 += t.width + kPad;
    }
    return out;
}

Raster tile_column(const std::vector<Raster>& tiles) {
    Index h = 0, w = 0;
    for (const Raster& t : tiles) {
        w = std::max(w, t.width);
        h += t.height + kPad;
    }
    Raster out(h - kPad, w, 32, 32, 32);
    Index y0 = 0;
    for (const Raster& t : tiles) {
        for (Index y = 0; y < t.height; ++y)
            for (Index x = 0; x < t.width; ++x) {
                const size_t i = 3 * (static_cast<size_t>(y) * static_cast<size_t>(t.width) +
                                      static_cast<size_t>(x));
                out.set(y0 + y, x, t.rgb[i], t.rgb[i + 1], t.rgb[i + 2]);
            }
        y0 += t.height + kPad;
    }
    return out;
}

Mask mask_contour(const ImageF& mask) {
    const Index h = mask.rows(), w = mask.cols();
    Mask contour = Mask::Zero(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            if (mask(y, x) <= 0.5f) continue;
            const bool edge = (y == 0 || mask(y - 1, x) <= 0.5f) || (y + 1 == h || mask(y + 1, x) <= 0.5f) ||
                              (x == 0 || mask(y, x - 1) <= 0.5f) || (x + 1 == w || mask(y, x + 1) <= 0.5f);
            if (edge) contour(y, x) = 1.f;
        }
    return contour;
}

void draw_line(Raster& r, Index y0, Index x0, Index y1, Index x1, uint8_t red, uint8_t green,
               uint8_t blue) {
    const Index dy = std::abs(y1 - y0), dx = std::abs(x1 - x0);
    const Index n = std::max<Index>(1, std::max(dy, dx));
    for (Index i = 0; i <= n; ++i) {
        const Index y = y0 + (y1 - y0) * i / n;
        const Index x = x0 + (x1 - x0) * i / n;
        r.set(y, x, red, green, blue);
    }
}

Raster plot_curves(const std::vector<std::pair<std::string, const std::vector<double>*>>& curves,
                   Index height = 200, Index width = 420) {
    Raster canvas(height, width);
    double lo = 0, hi = 0;
    size_t n = 0;
    for (const auto& [name, c] : curves)
        for (double v : *c) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            n = std::max(n, c->size());
        }
    if (hi <= lo) hi = lo + 1;
    const Index left = 8, right = width - 8, top = 8, bottom = height - 8;
    const auto to_y = [&](double v) {
        return bottom - static_cast<Index>((v - lo) / (hi - lo) * static_cast<double>(bottom - top));
    };
    const auto to_x = [&](size_t i) {
        return left + static_cast<Index>(static_cast<double>(i) / std::max<size_t>(1, n - 1) *
                                         static_cast<double>(right - left));
    };
    // zero axis
    draw_line(canvas, to_y(0.0), left, to_y(0.0), right, 200, 200, 200);
    const uint8_t palette[3][3] = {{200, 40, 40}, {40, 140, 40}, {40, 40, 200}};
    int ci = 0;
    for (const auto& [name, c] : curves) {
        const auto* col = palette[ci % 3];
        for (size_t i = 1; i < c->size(); ++i)
            draw_line(canvas, to_y((*c)[i - 1]), to_x(i - 1), to_y((*c)[i]), to_x(i), col[0], col[1],
                      col[2]);
        ++ci;
    }
    return canvas;
}

}  // namespace

std::vector<std::filesystem::path> write_velocity_plots(const VelocityCurves& truth,
                                                        const VelocityCurves* pred,
                                                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;
    const std::array<std::pair<const char*, const std::vector<double> VelocityCurves::*>, 3> dirs = {
        std::pair{"longitudinal", &VelocityCurves::longitudinal},
        std::pair{"radial", &VelocityCurves::radial},
        std::pair{"circumferential", &VelocityCurves::circumferential}};
    for (const auto& [name, member] : dirs) {
        std::vector<std::pair<std::string, const std::vector<double>*>> curves;
        curves.emplace_back("truth", &(truth.*member));
        if (pred) curves.emplace_back("pred", &(pred->*member));
        const auto path = out_dir / (std::string("curve_") + name + ".png");
        write_png(plot_curves(curves), path);
        written.push_back(path);
    }
    return written;
}

std::vector<std::filesystem::path> emit_figures(net::MTAttentionUNet<float>& model,
                                                const MVMSeries& series,
                                                const std::filesystem::path& out_dir) {
    if (series.frames() < kAnchorGap + 1)
        throw ArgumentError("emit_figures: series too short for synthesis");
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    // synthesized strip at tau = 0: [gt tau | pred k=1..3 | gt tau+4] over gt row
    std::vector<Raster> pred_tiles, gt_tiles;
    pred_tiles.push_back(to_raster(series.magnitude[0]));
    gt_tiles.push_back(to_raster(series.magnitude[0]));
    std::array<ImageF, 3> pred_masks;
    std::array<ImageF, 3> pred_phases0;
    for (int k = 1; k <= 3; ++k) {
        const SynthesisSample s = make_sample(series, 0, k);
        const auto out = model.forward(net::make_net_inputs<float>(s));
        pred_tiles.push_back(to_raster(out.mag_pred.plane_copy(0)));
        gt_tiles.push_back(to_raster(s.mag_target));
        pred_masks[static_cast<size_t>(k - 1)] = (out.mask_prob.plane_copy(0) > 0.5f).cast<float>();
        if (k == 1)
            for (int d = 0; d < 3; ++d) pred_phases0[static_cast<size_t>(d)] = out.phase_pred.plane_copy(d);
    }
    pred_tiles.push_back(to_raster(series.magnitude[kAnchorGap]));
    gt_tiles.push_back(to_raster(series.magnitude[kAnchorGap]));
    const auto strip_path = out_dir / "fig_magnitude_strip.png";
    write_png(tile_column({tile_row(pred_tiles), tile_row(gt_tiles)}), strip_path);
    written.push_back(strip_path);

    // contour overlay for k = 1..3: gt green, prediction red, mismatch yellow
    std::vector<Raster> overlay_tiles;
    for (int k = 1; k <= 3; ++k) {
        const auto t = static_cast<size_t>(k);
        Raster tile = to_raster(series.magnitude[t]);
        const Mask gt_c = mask_contour(series.mask[t]);
        const Mask pred_c = mask_contour(pred_masks[static_cast<size_t>(k - 1)]);
        const ImageF diff =
            (series.mask[t] - pred_masks[static_cast<size_t>(k - 1)]).abs();
        for (Index y = 0; y < tile.height; ++y)
            for (Index x = 0; x < tile.width; ++x) {
                if (diff(y, x) > 0.5f) tile.set(y, x, 230, 220, 40);
                if (gt_c(y, x) > 0.5f) tile.set(y, x, 40, 200, 40);
                if (pred_c(y, x) > 0.5f) tile.set(y, x, 220, 40, 40);
            }
        overlay_tiles.push_back(std::move(tile));
    }
    const auto contour_path = out_dir / "fig_contours.png";
    write_png(tile_row(overlay_tiles), contour_path);
    written.push_back(contour_path);

    // phase triptych at tau=0, k=1: per direction gt / prediction / difference
    std::vector<Raster> phase_rows;
    for (int d = 0; d < 3; ++d) {
        const ImageF& gt = series.phase[1][static_cast<size_t>(d)];
        const ImageF& pr = pred_phases0[static_cast<size_t>(d)];
        phase_rows.push_back(tile_row({to_raster(gt, -1.f, 1.f), to_raster(pr, -1.f, 1.f),
                                       to_raster((gt - pr).abs(), 0.f, 0.5f)}));
    }
    const auto phase_path = out_dir / "fig_phase.png";
    write_png(tile_column(phase_rows), phase_path);
    written.push_back(phase_path);

    // velocity curves: ground truth vs reconstructed prediction
    ReconstructedSeries recon = reconstruct_series(model, series);
    const VelocityCurves truth = velocity_curves(series);
    const VelocityCurves pred = velocity_curves(recon.series, recon.masks);
    const auto curves_path = out_dir / "fig_velocity_curves.png";
    write_png(tile_column({plot_curves({{"gt_long", &truth.longitudinal}, {"pred_long", &pred.longitudinal}}),
                           plot_curves({{"gt_rad", &truth.radial}, {"pred_rad", &pred.radial}}),
                           plot_curves({{"gt_circ", &truth.circumferential},
                                        {"pred_circ", &pred.circumferential}})}),
              curves_path);
    written.push_back(curves_path);
    return written;
}

}  // namespace mvm
