#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "mvm/errors.hpp"

namespace mvm {

/// Dense 2D image plane, row-major so raw buffers map directly onto [y, x] order.
template <typename Scalar>
using Image = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ImageF = Image<float>;
using ImageD = Image<double>;

using Index = Eigen::Index;

template <typename Scalar>
bool same_shape(const Image<Scalar>& a, const Image<Scalar>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename Scalar>
void require_same_shape(const Image<Scalar>& a, const Image<Scalar>& b, const char* what) {
    if (!same_shape(a, b))
        throw ShapeError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
}

/// Bilinear sample with edge clamping; (y, x) in pixel-center coordinates.
template <typename Scalar>
Scalar sample_bilinear(const Image<Scalar>& img, Scalar y, Scalar x) {
    const Index h = img.rows(), w = img.cols();
    const Scalar yc = std::min(std::max(y, Scalar(0)), Scalar(h - 1));
    const Scalar xc = std::min(std::max(x, Scalar(0)), Scalar(w - 1));
    const Index y0 = static_cast<Index>(std::floor(yc));
    const Index x0 = static_cast<Index>(std::floor(xc));
    const Index y1 = std::min(y0 + 1, h - 1);
    const Index x1 = std::min(x0 + 1, w - 1);
    const Scalar fy = yc - Scalar(y0);
    const Scalar fx = xc - Scalar(x0);
    return (Scalar(1) - fy) * ((Scalar(1) - fx) * img(y0, x0) + fx * img(y0, x1)) +
           fy * ((Scalar(1) - fx) * img(y1, x0) + fx * img(y1, x1));
}

/// Upsample by an integer factor, pixel-center aligned bilinear interpolation.
template <typename Scalar>
Image<Scalar> upsample_bilinear(const Image<Scalar>& img, int factor) {
    if (factor < 1) throw ArgumentError("upsample factor must be >= 1");
    if (factor == 1) return img;
    const Index oh = img.rows() * factor, ow = img.cols() * factor;
    Image<Scalar> out(oh, ow);
    const Scalar inv = Scalar(1) / Scalar(factor);
    for (Index y = 0; y < oh; ++y) {
        const Scalar sy = (Scalar(y) + Scalar(0.5)) * inv - Scalar(0.5);
        for (Index x = 0; x < ow; ++x) {
            const Scalar sx = (Scalar(x) + Scalar(0.5)) * inv - Scalar(0.5);
            out(y, x) = sample_bilinear(img, sy, sx);
        }
    }
    return out;
}

/// Upsample by an integer factor, nearest-neighbor (keeps binary masks binary).
template <typename Scalar>
Image<Scalar> upsample_nearest(const Image<Scalar>& img, int factor) {
    if (factor < 1) throw ArgumentError("upsample factor must be >= 1");
    if (factor == 1) return img;
    const Index oh = img.rows() * factor, ow = img.cols() * factor;
    Image<Scalar> out(oh, ow);
    const Scalar inv = Scalar(1) / Scalar(factor);
    for (Index y = 0; y < oh; ++y) {
        Index sy = static_cast<Index>(std::lround((Scalar(y) + Scalar(0.5)) * inv - Scalar(0.5)));
        sy = std::min(std::max(sy, Index(0)), img.rows() - 1);
        for (Index x = 0; x < ow; ++x) {
            Index sx = static_cast<Index>(std::lround((Scalar(x) + Scalar(0.5)) * inv - Scalar(0.5)));
            sx = std::min(std::max(sx, Index(0)), img.cols() - 1);
            out(y, x) = img(sy, sx);
        }
    }
    return out;
}

/// Resize to an arbitrary target shape, pixel-center aligned bilinear sampling.
template <typename Scalar>
Image<Scalar> resize_bilinear(const Image<Scalar>& img, Index out_h, Index out_w) {
    if (out_h < 1 || out_w < 1) throw ArgumentError("resize target must be positive");
    Image<Scalar> out(out_h, out_w);
    const Scalar sy_scale = Scalar(img.rows()) / Scalar(out_h);
    const Scalar sx_scale = Scalar(img.cols()) / Scalar(out_w);
    for (Index y = 0; y < out_h; ++y) {
        const Scalar sy = (Scalar(y) + Scalar(0.5)) * sy_scale - Scalar(0.5);
        for (Index x = 0; x < out_w; ++x) {
            const Scalar sx = (Scalar(x) + Scalar(0.5)) * sx_scale - Scalar(0.5);
            out(y, x) = sample_bilinear(img, sy, sx);
        }
    }
    return out;
}

/// Separable convolution with a 1D kernel, zero-phase, edge-replicating.
template <typename Scalar>
Image<Scalar> filter_separable(const Image<Scalar>& img, const std::vector<Scalar>& kernel) {
    const Index h = img.rows(), w = img.cols();
    const Index k = static_cast<Index>(kernel.size());
    const Index r = k / 2;
    Image<Scalar> tmp(h, w), out(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            for (Index i = 0; i < k; ++i) {
                Index xx = std::min(std::max(x + i - r, Index(0)), w - 1);
                acc += kernel[static_cast<size_t>(i)] * img(y, xx);
            }
            tmp(y, x) = acc;
        }
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            Scalar acc = 0;
            for (Index i = 0; i < k; ++i) {
                Index yy = std::min(std::max(y + i - r, Index(0)), h - 1);
                acc += kernel[static_cast<size_t>(i)] * tmp(yy, x);
            }
            out(y, x) = acc;
        }
    return out;
}

/// Normalized 1D Gaussian taps of given half-width.
template <typename Scalar>
std::vector<Scalar> gaussian_kernel(int radius, Scalar sigma) {
    std::vector<Scalar> k(static_cast<size_t>(2 * radius + 1));
    Scalar sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        Scalar v = std::exp(-Scalar(i) * Scalar(i) / (Scalar(2) * sigma * sigma));
        k[static_cast<size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

template <typename Scalar>
bool all_finite(const Image<Scalar>& img) {
    return img.isFinite().all();
}

}  // namespace mvm
