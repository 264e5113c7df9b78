#include "mvm/metrics.hpp"

#include <cmath>

namespace mvm {

double mae(const ImageF& pred, const ImageF& target) {
    require_same_shape(pred, target, "mae");
    return (pred.cast<double>() - target.cast<double>()).abs().mean();
}

double mae(const std::vector<const ImageF*>& pred, const std::vector<const ImageF*>& target) {
    if (pred.size() != target.size() || pred.empty()) throw ShapeError("mae: channel count mismatch");
    double acc = 0;
    for (size_t c = 0; c < pred.size(); ++c) acc += mae(*pred[c], *target[c]);
    return acc / static_cast<double>(pred.size());
}

namespace {

double mse(const ImageF& pred, const ImageF& target) {
    require_same_shape(pred, target, "psnr");
    return (pred.cast<double>() - target.cast<double>()).square().mean();
}

}  // namespace

double psnr(const ImageF& pred, const ImageF& target, double data_range) {
    const double m = mse(pred, target);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / m);
}

double psnr(const std::vector<const ImageF*>& pred, const std::vector<const ImageF*>& target,
            double data_range) {
    if (pred.size() != target.size() || pred.empty()) throw ShapeError("psnr: channel count mismatch");
    double m = 0;
    for (size_t c = 0; c < pred.size(); ++c) m += mse(*pred[c], *target[c]);
    m /= static_cast<double>(pred.size());
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / m);
}

double ssim(const ImageF& pred, const ImageF& target, double data_range) {
    require_same_shape(pred, target, "ssim");
    constexpr int radius = 5;  // 11x11 window
    if (pred.rows() < 2 * radius + 1 || pred.cols() < 2 * radius + 1)
        throw ArgumentError("ssim: image smaller than the 11x11 window");

    const auto kernel = gaussian_kernel<float>(radius, 1.5f);
    const ImageF mu1 = filter_separable(pred, kernel);
    const ImageF mu2 = filter_separable(target, kernel);
    const ImageF s11 = filter_separable<float>(pred * pred, kernel);
    const ImageF s22 = filter_separable<float>(target * target, kernel);
    const ImageF s12 = filter_separable<float>(pred * target, kernel);

    const double c1 = (0.01 * data_range) * (0.01 * data_range);
    const double c2 = (0.03 * data_range) * (0.03 * data_range);

    double acc = 0;
    size_t n = 0;
    for (Index y = radius; y < pred.rows() - radius; ++y)
        for (Index x = radius; x < pred.cols() - radius; ++x) {
            const double m1 = mu1(y, x), m2 = mu2(y, x);
            const double var1 = s11(y, x) - m1 * m1;
            const double var2 = s22(y, x) - m2 * m2;
            const double cov = s12(y, x) - m1 * m2;
            const double num = (2 * m1 * m2 + c1) * (2 * cov + c2);
            const double den = (m1 * m1 + m2 * m2 + c1) * (var1 + var2 + c2);
            acc += num / den;
            ++n;
        }
    return acc / static_cast<double>(n);
}

double dice_score(const ImageF& mask_a, const ImageF& mask_b) {
    require_same_shape(mask_a, mask_b, "dice_score");
    const auto a = (mask_a > 0.5f).cast<float>();
    const auto b = (mask_b > 0.5f).cast<float>();
    const double inter = static_cast<double>((a * b).sum());
    const double total = static_cast<double>(a.sum()) + static_cast<double>(b.sum());
    if (total == 0.0) return 1.0;  // both empty
    return 2.0 * inter / total;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ShapeError("pearson: length mismatch");
    const size_t n = x.size();
    if (n < 2) throw NumericError("pearson: need at least 2 points");
    double mx = 0, my = 0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericError("pearson: degenerate (constant) input series");
    return sxy / std::sqrt(sxx * syy);
}

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    a.count = values.size();
    if (values.empty()) return a;
    double sum = 0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    double sq = 0;
    for (double v : values) sq += (v - a.mean) * (v - a.mean);
    a.stddev = values.size() > 1 ? std::sqrt(sq / static_cast<double>(values.size() - 1)) : 0.0;
    return a;
}

std::map<std::string, Aggregate> MetricReport::aggregates() const {
    std::map<std::string, Aggregate> out;
    for (const auto& [name, values] : per_sample) out[name] = aggregate(values);
    return out;
}

}  // namespace mvm
