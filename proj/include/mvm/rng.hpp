#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mvm {

/// Deterministic uniform/Gaussian source on top of mt19937. Box-Muller is
/// hand-rolled so streams do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(static_cast<uint32_t>(seed)) {}

    double uniform01() { return (static_cast<double>(engine_()) + 0.5) / 4294967296.0; }

    /// Uniform integer in [0, n).
    uint32_t below(uint32_t n) { return static_cast<uint32_t>(uniform01() * n) % n; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    /// In-place Fisher-Yates shuffle (implementation-independent ordering).
    template <typename Vec>
    void shuffle(Vec& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = below(static_cast<uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace mvm
