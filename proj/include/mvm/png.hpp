#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvm/image.hpp"

namespace mvm {

/// 8-bit RGB raster.
struct Raster {
    Index height = 0;
    Index width = 0;
    std::vector<uint8_t> rgb;  // 3 bytes per pixel, row-major

    Raster() = default;
    Raster(Index h, Index w, uint8_t r = 255, uint8_t g = 255, uint8_t b = 255);
    void set(Index y, Index x, uint8_t r, uint8_t g, uint8_t b);
};

/// Writes an RGB PNG (stored-deflate zlib stream, no external encoder).
void write_png(const Raster& raster, const std::filesystem::path& path);

/// Maps values linearly from [lo, hi] to grayscale.
Raster to_raster(const ImageF& img, float lo = 0.f, float hi = 1.f);

}  // namespace mvm
