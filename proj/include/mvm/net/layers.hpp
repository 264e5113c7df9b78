#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mvm/net/tensor.hpp"

namespace mvm::net {

template <typename S>
using ParamVisitor =
    std::function<void(const std::string&, typename Tensor<S>::Mat&, typename Tensor<S>::Mat&)>;

/// Pre-affine instance-norm statistics, recorded per (layer, channel).
struct NormStats {
    std::string layer;
    int channel = 0;
    double mean = 0;
    double var = 0;
};
using NormStatsCollector = std::vector<NormStats>;

/// 2D convolution, stride 1, same padding (ksize 1 or 3), via im2col + GEMM.
template <typename S>
class Conv2d {
public:
    using Mat = typename Tensor<S>::Mat;

    Conv2d() = default;
    Conv2d(int cin, int cout, int ksize) : cin_(cin), cout_(cout), k_(ksize) {
        weight_ = Mat::Zero(cout, cin * ksize * ksize);
        bias_ = Mat::Zero(cout, 1);
        dweight_ = Mat::Zero(cout, cin * ksize * ksize);
        dbias_ = Mat::Zero(cout, 1);
    }

    int in_channels() const { return cin_; }
    int out_channels() const { return cout_; }

    Tensor<S> forward(const Tensor<S>& x) {
        if (x.c != cin_)
            throw ShapeError("conv2d: input has " + std::to_string(x.c) + " channels, layer expects " +
                             std::to_string(cin_));
        h_ = x.h;
        w_ = x.w;
        im2col(x, cols_);
        Tensor<S> y(cout_, x.h, x.w);
        y.m.noalias() = weight_ * cols_;
        y.m.colwise() += bias_.col(0);
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        dweight_.noalias() += dy.m * cols_.transpose();
        dbias_.col(0) += dy.m.rowwise().sum();
        Mat dcols(cin_ * k_ * k_, h_ * w_);
        dcols.noalias() = weight_.transpose() * dy.m;
        return col2im(dcols);
    }

    void visit(const std::string& prefix, const ParamVisitor<S>& v) {
        v(prefix + ".weight", weight_, dweight_);
        v(prefix + ".bias", bias_, dbias_);
    }

private:
    void im2col(const Tensor<S>& x, Mat& cols) const {
        const Index h = x.h, w = x.w;
        cols.setZero(cin_ * k_ * k_, h * w);
        if (k_ == 1) {
            cols = x.m;
            return;
        }
        const int r = k_ / 2;
        for (int ci = 0; ci < cin_; ++ci) {
            auto src = x.plane(ci);
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    const int row = ci * k_ * k_ + (dy + r) * k_ + (dx + r);
                    Eigen::Map<Image<S>> dst(cols.row(row).data(), h, w);
                    const Index y0 = std::max<Index>(0, -dy), y1 = std::min<Index>(h, h - dy);
                    const Index x0 = std::max<Index>(0, -dx), x1 = std::min<Index>(w, w - dx);
                    if (y1 > y0 && x1 > x0)
                        dst.block(y0, x0, y1 - y0, x1 - x0) = src.block(y0 + dy, x0 + dx, y1 - y0, x1 - x0);
                }
        }
    }

    Tensor<S> col2im(const Mat& dcols) const {
        Tensor<S> dx(cin_, h_, w_);
        if (k_ == 1) {
            dx.m = dcols;
            return dx;
        }
        const int r = k_ / 2;
        for (int ci = 0; ci < cin_; ++ci) {
            auto dst = dx.plane(ci);
            for (int dy = -r; dy <= r; ++dy)
                for (int dx_ = -r; dx_ <= r; ++dx_) {
                    const int row = ci * k_ * k_ + (dy + r) * k_ + (dx_ + r);
                    Eigen::Map<const Image<S>> src(dcols.row(row).data(), h_, w_);
                    const Index y0 = std::max<Index>(0, -dy), y1 = std::min<Index>(h_, h_ - dy);
                    const Index x0 = std::max<Index>(0, -dx_), x1 = std::min<Index>(w_, w_ - dx_);
                    if (y1 > y0 && x1 > x0)
                        dst.block(y0 + dy, x0 + dx_, y1 - y0, x1 - x0) +=
                            src.block(y0, x0, y1 - y0, x1 - x0);
                }
        }
        return dx;
    }

    int cin_ = 0, cout_ = 0, k_ = 3;
    Mat weight_, bias_, dweight_, dbias_;
    Mat cols_;
    Index h_ = 0, w_ = 0;
};

/// Per-sample, per-channel normalization; statistics computed in double.
template <typename S>
class InstanceNorm {
public:
    using Mat = typename Tensor<S>::Mat;

    InstanceNorm() = default;
    explicit InstanceNorm(int channels) : c_(channels) {
        gamma_ = Mat::Ones(channels, 1);
        beta_ = Mat::Zero(channels, 1);
        dgamma_ = Mat::Zero(channels, 1);
        dbeta_ = Mat::Zero(channels, 1);
    }

    Tensor<S> forward(const Tensor<S>& x, NormStatsCollector* stats = nullptr,
                      const std::string& name = {}) {
        const Index n = x.pixels();
        xhat_ = x;
        inv_std_.resize(static_cast<size_t>(c_));
        for (int i = 0; i < c_; ++i) {
            double mean = 0, sq = 0;
            const S* p = x.m.row(i).data();
            for (Index j = 0; j < n; ++j) {
                mean += static_cast<double>(p[j]);
                sq += static_cast<double>(p[j]) * static_cast<double>(p[j]);
            }
            mean /= static_cast<double>(n);
            const double var = std::max(sq / static_cast<double>(n) - mean * mean, 0.0);
            const double inv = 1.0 / std::sqrt(var + kEps);
            inv_std_[static_cast<size_t>(i)] = inv;
            xhat_.m.row(i) =
                ((x.m.row(i).template cast<double>().array() - mean) * inv).template cast<S>();
            if (stats) {
                double m2 = 0, s2 = 0;
                const S* q = xhat_.m.row(i).data();
                for (Index j = 0; j < n; ++j) {
                    m2 += static_cast<double>(q[j]);
                    s2 += static_cast<double>(q[j]) * static_cast<double>(q[j]);
                }
                m2 /= static_cast<double>(n);
                stats->push_back({name, i, m2, s2 / static_cast<double>(n) - m2 * m2});
            }
        }
        Tensor<S> y = xhat_;
        for (int i = 0; i < c_; ++i)
            y.m.row(i) = y.m.row(i) * gamma_(i, 0) + Mat::Constant(1, n, beta_(i, 0));
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        const Index n = dy.pixels();
        Tensor<S> dx(c_, dy.h, dy.w);
        for (int i = 0; i < c_; ++i) {
            const auto dyr = dy.m.row(i).array();
            const auto xhr = xhat_.m.row(i).array();
            dgamma_(i, 0) += (dyr * xhr).sum();
            dbeta_(i, 0) += dyr.sum();
            const S sum_dy = dyr.sum();
            const S sum_dy_xhat = (dyr * xhr).sum();
            const S scale = gamma_(i, 0) * static_cast<S>(inv_std_[static_cast<size_t>(i)]) /
                            static_cast<S>(n);
            dx.m.row(i) =
                (scale * (static_cast<S>(n) * dyr - sum_dy - xhr * sum_dy_xhat)).matrix();
        }
        return dx;
    }

    void visit(const std::string& prefix, const ParamVisitor<S>& v) {
        v(prefix + ".gamma", gamma_, dgamma_);
        v(prefix + ".beta", beta_, dbeta_);
    }

    static constexpr double kEps = 1e-8;

private:
    int c_ = 0;
    Mat gamma_, beta_, dgamma_, dbeta_;
    Tensor<S> xhat_;
    std::vector<double> inv_std_;
};

template <typename S>
class ReLU {
public:
    Tensor<S> forward(const Tensor<S>& x) {
        mask_ = (x.m.array() > S(0)).template cast<S>().matrix();
        Tensor<S> y = x;
        y.m.array() *= mask_.array();
        return y;
    }
    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> dx = dy;
        dx.m.array() *= mask_.array();
        return dx;
    }

private:
    typename Tensor<S>::Mat mask_;
};

template <typename S>
class Sigmoid {
public:
    Tensor<S> forward(const Tensor<S>& x) {
        y_ = x;
        y_.m = (S(1) / (S(1) + (-x.m.array()).exp())).matrix();
        return y_;
    }
    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> dx = dy;
        dx.m.array() *= y_.m.array() * (S(1) - y_.m.array());
        return dx;
    }

private:
    Tensor<S> y_;
};

/// 2x2 max pooling, stride 2. Requires even H, W.
template <typename S>
class MaxPool2 {
public:
    Tensor<S> forward(const Tensor<S>& x) {
        h_ = x.h;
        w_ = x.w;
        c_ = x.c;
        Tensor<S> y(x.c, x.h / 2, x.w / 2);
        argmax_.resize(static_cast<size_t>(x.c) * static_cast<size_t>(y.pixels()));
        for (int ci = 0; ci < x.c; ++ci) {
            auto src = x.plane(ci);
            auto dst = y.plane(ci);
            for (Index yy = 0; yy < y.h; ++yy)
                for (Index xx = 0; xx < y.w; ++xx) {
                    Index by = 2 * yy, bx = 2 * xx;
                    S best = src(by, bx);
                    Index arg = by * w_ + bx;
                    if (src(by, bx + 1) > best) { best = src(by, bx + 1); arg = by * w_ + bx + 1; }
                    if (src(by + 1, bx) > best) { best = src(by + 1, bx); arg = (by + 1) * w_ + bx; }
                    if (src(by + 1, bx + 1) > best) {
                        best = src(by + 1, bx + 1);
                        arg = (by + 1) * w_ + bx + 1;
                    }
                    dst(yy, xx) = best;
                    argmax_[static_cast<size_t>(ci) * static_cast<size_t>(y.pixels()) +
                            static_cast<size_t>(yy * y.w + xx)] = arg;
                }
        }
        return y;
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> dx(c_, h_, w_);
        for (int ci = 0; ci < c_; ++ci) {
            const S* g = dy.m.row(ci).data();
            S* out = dx.m.row(ci).data();
            for (Index j = 0; j < dy.pixels(); ++j)
                out[argmax_[static_cast<size_t>(ci) * static_cast<size_t>(dy.pixels()) +
                            static_cast<size_t>(j)]] += g[j];
        }
        return dx;
    }

private:
    Index h_ = 0, w_ = 0;
    int c_ = 0;
    std::vector<Index> argmax_;
};

/// Nearest-neighbor 2x upsampling.
template <typename S>
class UpsampleNearest2 {
public:
    Tensor<S> forward(const Tensor<S>& x) {
        Tensor<S> y(x.c, x.h * 2, x.w * 2);
        for (int ci = 0; ci < x.c; ++ci) {
            auto src = x.plane(ci);
            auto dst = y.plane(ci);
            for (Index yy = 0; yy < y.h; ++yy)
                for (Index xx = 0; xx < y.w; ++xx) dst(yy, xx) = src(yy / 2, xx / 2);
        }
        return y;
    }
    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> dx(dy.c, dy.h / 2, dy.w / 2);
        for (int ci = 0; ci < dy.c; ++ci) {
            auto src = dy.plane(ci);
            auto dst = dx.plane(ci);
            for (Index yy = 0; yy < dy.h; ++yy)
                for (Index xx = 0; xx < dy.w; ++xx) dst(yy / 2, xx / 2) += src(yy, xx);
        }
        return dx;
    }
};

/// conv3 -> instance norm -> relu, twice.
template <typename S>
class ConvBlock {
public:
    ConvBlock() = default;
    ConvBlock(int cin, int cout)
        : conv1_(cin, cout, 3), norm1_(cout), conv2_(cout, cout, 3), norm2_(cout) {}

    Tensor<S> forward(const Tensor<S>& x, NormStatsCollector* stats = nullptr,
                      const std::string& name = {}) {
        Tensor<S> t = relu1_.forward(norm1_.forward(conv1_.forward(x), stats, name + ".norm1"));
        return relu2_.forward(norm2_.forward(conv2_.forward(t), stats, name + ".norm2"));
    }

    Tensor<S> backward(const Tensor<S>& dy) {
        Tensor<S> d = conv2_.backward(norm2_.backward(relu2_.backward(dy)));
        return conv1_.backward(norm1_.backward(relu1_.backward(d)));
    }

    void visit(const std::string& prefix, const ParamVisitor<S>& v) {
        conv1_.visit(prefix + ".conv1", v);
        norm1_.visit(prefix + ".norm1", v);
        conv2_.visit(prefix + ".conv2", v);
        norm2_.visit(prefix + ".norm2", v);
    }

private:
    Conv2d<S> conv1_;
    InstanceNorm<S> norm1_;
    ReLU<S> relu1_;
    Conv2d<S> conv2_;
    InstanceNorm<S> norm2_;
    ReLU<S> relu2_;
};

/// Additive attention gate: alpha = sigmoid(psi(relu(Wx*x + Wg*g))),
/// output = alpha (broadcast over channels) * x. x and g share the grid.
template <typename S>
class AttentionGate {
public:
    AttentionGate() = default;
    AttentionGate(int cx, int cg, int cint)
        : wx_(cx, cint, 1), wg_(cg, cint, 1), psi_(cint, 1, 1) {}

    Tensor<S> forward(const Tensor<S>& x, const Tensor<S>& g) {
        x_ = x;
        Tensor<S> a = wx_.forward(x);
        a.m += wg_.forward(g).m;
        alpha_ = sig_.forward(psi_.forward(relu_.forward(a)));
        Tensor<S> y = x;
        for (int ci = 0; ci < y.c; ++ci) y.m.row(ci).array() *= alpha_.m.row(0).array();
        return y;
    }

    /// Returns (dx, dg).
    std::pair<Tensor<S>, Tensor<S>> backward(const Tensor<S>& dy) {
        Tensor<S> dalpha(1, dy.h, dy.w);
        for (int ci = 0; ci < dy.c; ++ci)
            dalpha.m.row(0).array() += dy.m.row(ci).array() * x_.m.row(ci).array();
        Tensor<S> da = relu_.backward(psi_.backward(sig_.backward(dalpha)));
        Tensor<S> dx = wx_.backward(da);
        Tensor<S> dg = wg_.backward(da);
        for (int ci = 0; ci < dy.c; ++ci)
            dx.m.row(ci).array() += dy.m.row(ci).array() * alpha_.m.row(0).array();
        return {std::move(dx), std::move(dg)};
    }

    void visit(const std::string& prefix, const ParamVisitor<S>& v) {
        wx_.visit(prefix + ".wx", v);
        wg_.visit(prefix + ".wg", v);
        psi_.visit(prefix + ".psi", v);
    }

private:
    Conv2d<S> wx_, wg_, psi_;
    ReLU<S> relu_;
    Sigmoid<S> sig_;
    Tensor<S> x_, alpha_;
};

}  // namespace mvm::net
