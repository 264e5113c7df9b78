#pragma once

#include "mvm/image.hpp"

namespace mvm {

/// Binary image as floats in {0,1}; foreground = value > 0.5.
using Mask = ImageF;

/// Fills enclosed cavities: background connected (4-neighborhood) to the image
/// border stays background, everything else becomes foreground.
Mask fill_holes(const Mask& mask);

/// Morphological dilation with the Euclidean disk {(dy,dx): dy^2+dx^2 <= r^2}.
/// r = 2 gives the 13-offset disk.
Mask dilate_disk(const Mask& mask, int radius);

/// Exact squared Euclidean distance (integer) from every pixel to the nearest
/// seed pixel. Seeds are foreground pixels of `seeds`; throws ArgumentError
/// when there are none.
Image<int64_t> squared_distance_transform(const Mask& seeds);

/// Signed Euclidean distance to the mask boundary. Boundary pixels are
/// foreground pixels with a background 4-neighbor; they get 0. Outside is
/// positive, strictly-inside negative. Throws NumericError for empty or full
/// masks.
ImageF signed_distance_map(const Mask& mask);

}  // namespace mvm
