#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mvm/image.hpp"

namespace mvm {

/// Mean absolute error over all pixels/channels.
double mae(const ImageF& pred, const ImageF& target);
double mae(const std::vector<const ImageF*>& pred, const std::vector<const ImageF*>& target);

/// 10*log10(data_range^2 / MSE) in dB; identical images return +infinity.
double psnr(const ImageF& pred, const ImageF& target, double data_range = 1.0);
double psnr(const std::vector<const ImageF*>& pred, const std::vector<const ImageF*>& target,
            double data_range = 1.0);

/// Mean local SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
/// averaged over valid window positions. Throws ArgumentError when the image
/// is smaller than the window.
double ssim(const ImageF& pred, const ImageF& target, double data_range = 1.0);

/// 2|A&B| / (|A|+|B|); both-empty = 1.0 by convention. Inputs thresholded at 0.5.
double dice_score(const ImageF& mask_a, const ImageF& mask_b);

/// Sample Pearson correlation; throws NumericError for constant input or
/// length < 2.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Per-sample metric rows and their aggregates.
struct Aggregate {
    double mean = 0;
    double stddev = 0;
    size_t count = 0;
};

Aggregate aggregate(const std::vector<double>& values);

/// Column-oriented metric table: per-sample values keyed by metric name
/// ("magnitude_mae", "phase_psnr", "dice", ...) plus computed aggregates.
struct MetricReport {
    std::map<std::string, std::vector<double>> per_sample;
    std::map<std::string, Aggregate> aggregates() const;
    void add(const std::string& name, double value) { per_sample[name].push_back(value); }
};

}  // namespace mvm
