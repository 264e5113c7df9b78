#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "mvm/image.hpp"

namespace mvm {

/// One slice's cine velocity-mapping series.
///
/// Per frame: one magnitude image in [0,1], three phase images in [-1,1]
/// (normalized velocity; direction order x in-plane, y in-plane, z
/// through-plane) and a binary myocardium mask. Physical velocity is
/// phase * venc per direction.
struct MVMSeries {
    std::string subject_id;
    std::string slice_id;
    std::vector<ImageF> magnitude;                // [T] of HxW
    std::vector<std::array<ImageF, 3>> phase;     // [T][3] of HxW
    std::vector<ImageF> mask;                     // [T] of HxW, {0,1}
    Eigen::Vector2f pixel_spacing_mm{1.f, 1.f};   // (row/y, col/x)
    Eigen::Vector3f venc_mm_per_s{100.f, 100.f, 100.f};

    int frames() const { return static_cast<int>(magnitude.size()); }
    Index rows() const { return magnitude.empty() ? 0 : magnitude[0].rows(); }
    Index cols() const { return magnitude.empty() ? 0 : magnitude[0].cols(); }
};

/// Throws ValidationError naming the offending field when any invariant fails:
/// consistent T/H/W across arrays, H,W >= 32, magnitude in [0,1], phase in
/// [-1,1], binary mask, positive spacing and venc.
void validate_series(const MVMSeries& series);

/// True when some frame's mask has no foreground pixel (series still valid).
bool series_degenerate(const MVMSeries& series);

/// Spatial upsampling by an integer factor: bilinear for magnitude/phase,
/// nearest-neighbor for the mask, pixel spacing divided by the factor.
MVMSeries resample_bilinear(const MVMSeries& series, int factor);

/// Dataset split by subject; the three lists are pairwise disjoint by subject_id.
struct DatasetSplit {
    std::vector<std::string> train;  // series archive paths
    std::vector<std::string> val;
    std::vector<std::string> test;
};

/// Throws ValidationError if a subject_id appears in more than one part.
/// Subject ids are read from the series archives' manifests.
void validate_split(const DatasetSplit& split);

DatasetSplit load_split(const std::filesystem::path& json_path);
void save_split(const DatasetSplit& split, const std::filesystem::path& json_path);

/// Writes the archive: manifest.json (version, dims, spacing, venc, ids,
/// per-array SHA-256) plus raw little-endian float32 files magnitude.f32,
/// phase.f32, mask.f32 in [t, (dir,) y, x] order. Round-trips bit-exactly.
void save_series(const MVMSeries& series, const std::filesystem::path& dir);

MVMSeries load_series(const std::filesystem::path& dir);

}  // namespace mvm
