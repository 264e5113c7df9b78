#pragma once

#include <Eigen/Dense>

#include "mvm/image.hpp"

namespace mvm::net {

/// Channels-first planar feature map: row i of `m` is channel i's HxW plane
/// in row-major order.
template <typename S>
struct Tensor {
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    int c = 0;
    Index h = 0;
    Index w = 0;
    Mat m;

    Tensor() = default;
    Tensor(int c_, Index h_, Index w_) : c(c_), h(h_), w(w_), m(Mat::Zero(c_, h_ * w_)) {}

    Index pixels() const { return h * w; }

    Eigen::Map<Image<S>> plane(int i) { return {m.row(i).data(), h, w}; }
    Eigen::Map<const Image<S>> plane(int i) const { return {m.row(i).data(), h, w}; }

    template <typename T>
    void set_plane(int i, const Image<T>& img) {
        plane(i) = img.template cast<S>();
    }

    Image<S> plane_copy(int i) const { return plane(i); }
};

template <typename S>
Tensor<S> concat_channels(const std::vector<const Tensor<S>*>& parts) {
    int c = 0;
    for (const auto* p : parts) c += p->c;
    Tensor<S> out(c, parts[0]->h, parts[0]->w);
    int row = 0;
    for (const auto* p : parts) {
        out.m.middleRows(row, p->c) = p->m;
        row += p->c;
    }
    return out;
}

template <typename S>
Tensor<S> slice_channels(const Tensor<S>& x, int first, int count) {
    Tensor<S> out(count, x.h, x.w);
    out.m = x.m.middleRows(first, count);
    return out;
}

}  // namespace mvm::net
