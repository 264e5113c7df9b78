#include "mvm/sampling.hpp"

#include <iostream>

namespace mvm {

ConditionMap build_condition_map(int tau, int k, int frames) {
    if (k < 1 || k > 3)
        throw ArgumentError("condition map: k must be in {1,2,3}, got " + std::to_string(k));
    if (tau < 0 || tau > frames - kAnchorGap - 1)
        throw ArgumentError("condition map: tau=" + std::to_string(tau) + " outside [0, " +
                            std::to_string(frames - kAnchorGap - 1) + "] for T=" + std::to_string(frames));
    ConditionMap cm;
    cm.ch0 = ImageF::Constant(kConditionSize, kConditionSize, static_cast<float>(tau) / frames);
    cm.ch1 = ImageF::Constant(kConditionSize, kConditionSize, static_cast<float>(k) / kAnchorGap);
    return cm;
}

std::vector<std::pair<int, int>> enumerate_sample_indices(int frames) {
    std::vector<std::pair<int, int>> out;
    if (frames < kAnchorGap + 1) return out;
    out.reserve(static_cast<size_t>(3 * (frames - kAnchorGap)));
    for (int tau = 0; tau <= frames - kAnchorGap - 1; ++tau)
        for (int k = 1; k <= 3; ++k) out.emplace_back(tau, k);
    return out;
}

SynthesisSample make_sample(const MVMSeries& series, int tau, int k) {
    const int frames = series.frames();
    if (k < 1 || k > 3) throw ArgumentError("make_sample: k must be in {1,2,3}");
    if (tau < 0 || tau + kAnchorGap >= frames)
        throw ArgumentError("make_sample: anchors " + std::to_string(tau) + "," +
                            std::to_string(tau + kAnchorGap) + " out of range for T=" +
                            std::to_string(frames));
    const auto a = static_cast<size_t>(tau);
    const auto b = static_cast<size_t>(tau + kAnchorGap);
    const auto t = static_cast<size_t>(tau + k);

    SynthesisSample s;
    s.mag_in = {series.magnitude[a], series.magnitude[b]};
    for (int d = 0; d < 3; ++d) {
        s.phase_in[static_cast<size_t>(2 * d)] = series.phase[a][static_cast<size_t>(d)];
        s.phase_in[static_cast<size_t>(2 * d + 1)] = series.phase[b][static_cast<size_t>(d)];
    }
    s.mask_in = {series.mask[a], series.mask[b]};
    s.mag_target = series.magnitude[t];
    s.phase_target = series.phase[t];
    s.mask_target = series.mask[t];
    s.condition = build_condition_map(tau, k, frames);
    s.tau = tau;
    s.k = k;
    s.series_ref = series.subject_id + "/" + series.slice_id;
    return s;
}

std::vector<SynthesisSample> enumerate_samples(const MVMSeries& series) {
    std::vector<SynthesisSample> out;
    const auto indices = enumerate_sample_indices(series.frames());
    if (indices.empty()) {
        std::cerr << "warning: series " << series.subject_id << "/" << series.slice_id << " has only "
                  << series.frames() << " frames, no synthesis samples\n";
        return out;
    }
    out.reserve(indices.size());
    for (auto [tau, k] : indices) out.push_back(make_sample(series, tau, k));
    return out;
}

}  // namespace mvm
