#include "mvm/morphology.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mvm {

Mask fill_holes(const Mask& mask) {
    const Index h = mask.rows(), w = mask.cols();
    Image<uint8_t> outside = Image<uint8_t>::Zero(h, w);
    std::vector<std::pair<Index, Index>> stack;
    auto push_if_bg = [&](Index y, Index x) {
        if (y < 0 || y >= h || x < 0 || x >= w) return;
        if (outside(y, x) || mask(y, x) > 0.5f) return;
        outside(y, x) = 1;
        stack.emplace_back(y, x);
    };
    for (Index x = 0; x < w; ++x) {
        push_if_bg(0, x);
        push_if_bg(h - 1, x);
    }
    for (Index y = 0; y < h; ++y) {
        push_if_bg(y, 0);
        push_if_bg(y, w - 1);
    }
    while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        push_if_bg(y - 1, x);
        push_if_bg(y + 1, x);
        push_if_bg(y, x - 1);
        push_if_bg(y, x + 1);
    }
    Mask filled(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) filled(y, x) = outside(y, x) ? 0.f : 1.f;
    return filled;
}

Mask dilate_disk(const Mask& mask, int radius) {
    if (radius < 0) throw ArgumentError("dilation radius must be >= 0");
    const Index h = mask.rows(), w = mask.cols();
    std::vector<std::pair<int, int>> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dy * dy + dx * dx <= radius * radius) offsets.emplace_back(dy, dx);
    Mask out = Mask::Zero(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            if (mask(y, x) <= 0.5f) continue;
            for (auto [dy, dx] : offsets) {
                const Index yy = y + dy, xx = x + dx;
                if (yy >= 0 && yy < h && xx >= 0 && xx < w) out(yy, xx) = 1.f;
            }
        }
    return out;
}

namespace {

// Lower-envelope pass of the exact squared EDT. Columns without any seed
// carry +inf and are skipped; final distances are computed in exact int64.
std::vector<int64_t> edt_1d(const std::vector<int64_t>& f) {
    constexpr int64_t inf = std::numeric_limits<int64_t>::max();
    const int n = static_cast<int>(f.size());
    std::vector<int64_t> d(static_cast<size_t>(n), inf);
    std::vector<int> v(static_cast<size_t>(n), 0);
    std::vector<double> z(static_cast<size_t>(n) + 1, 0.0);
    int k = -1;
    for (int q = 0; q < n; ++q) {
        if (f[static_cast<size_t>(q)] == inf) continue;
        double s = 0.0;
        while (k >= 0) {
            const int p = v[static_cast<size_t>(k)];
            s = (double(f[static_cast<size_t>(q)]) + double(q) * q - double(f[static_cast<size_t>(p)]) -
                 double(p) * p) /
                (2.0 * (q - p));
            if (s <= z[static_cast<size_t>(k)])
                --k;
            else
                break;
        }
        if (k < 0) {
            k = 0;
            v[0] = q;
            z[0] = -std::numeric_limits<double>::infinity();
        } else {
            ++k;
            v[static_cast<size_t>(k)] = q;
            z[static_cast<size_t>(k)] = s;
        }
        z[static_cast<size_t>(k) + 1] = std::numeric_limits<double>::infinity();
    }
    if (k < 0) return d;
    int j = 0;
    for (int q = 0; q < n; ++q) {
        while (z[static_cast<size_t>(j) + 1] < q) ++j;
        const int p = v[static_cast<size_t>(j)];
        d[static_cast<size_t>(q)] = int64_t(q - p) * int64_t(q - p) + f[static_cast<size_t>(p)];
    }
    return d;
}

}  // namespace

Image<int64_t> squared_distance_transform(const Mask& seeds) {
    const Index h = seeds.rows(), w = seeds.cols();
    if (!(seeds > 0.5f).any()) throw ArgumentError("distance transform needs at least one seed pixel");
    constexpr int64_t inf = std::numeric_limits<int64_t>::max();

    // column pass: squared vertical distance to nearest seed in the column
    Image<int64_t> g(h, w);
    for (Index x = 0; x < w; ++x) {
        int64_t dist = inf;
        for (Index y = 0; y < h; ++y) {
            if (seeds(y, x) > 0.5f)
                dist = 0;
            else if (dist != inf)
                ++dist;
            g(y, x) = (dist == inf) ? inf : dist * dist;
        }
        dist = inf;
        for (Index y = h - 1; y >= 0; --y) {
            if (seeds(y, x) > 0.5f)
                dist = 0;
            else if (dist != inf)
                ++dist;
            if (dist != inf) g(y, x) = std::min(g(y, x), dist * dist);
        }
    }

    // row pass: lower envelope of parabolas
    Image<int64_t> out(h, w);
    std::vector<int64_t> f(static_cast<size_t>(w));
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) f[static_cast<size_t>(x)] = g(y, x);
        auto d = edt_1d(f);
        for (Index x = 0; x < w; ++x) out(y, x) = d[static_cast<size_t>(x)];
    }
    return out;
}

ImageF signed_distance_map(const Mask& mask) {
    const Index h = mask.rows(), w = mask.cols();
    const bool any_fg = (mask > 0.5f).any();
    const bool any_bg = (mask <= 0.5f).any();
    if (!any_fg) throw NumericError("signed_distance_map: mask is empty");
    if (!any_bg) throw NumericError("signed_distance_map: mask is full");

    Mask boundary = Mask::Zero(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            if (mask(y, x) <= 0.5f) continue;
            const bool bg_neighbor = (y > 0 && mask(y - 1, x) <= 0.5f) ||
                                     (y + 1 < h && mask(y + 1, x) <= 0.5f) ||
                                     (x > 0 && mask(y, x - 1) <= 0.5f) ||
                                     (x + 1 < w && mask(y, x + 1) <= 0.5f);
            if (bg_neighbor) boundary(y, x) = 1.f;
        }
    if (!(boundary > 0.5f).any()) {
        // mask touches every border pixel of its bounding region; treat the
        // whole foreground as boundary (cannot happen for non-full masks with
        // in-image background, kept as a guard)
        boundary = mask;
    }

    Image<int64_t> sq = squared_distance_transform(boundary);
    ImageF sdm(h, w);
    for (Index y = 0; y < h; ++y)
        for (Index x = 0; x < w; ++x) {
            const float d = std::sqrt(static_cast<float>(sq(y, x)));
            if (boundary(y, x) > 0.5f)
                sdm(y, x) = 0.f;
            else if (mask(y, x) > 0.5f)
                sdm(y, x) = -d;
            else
                sdm(y, x) = d;
        }
    return sdm;
}

}  // namespace mvm
