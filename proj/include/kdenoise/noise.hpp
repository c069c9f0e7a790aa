#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "kdenoise/image.hpp"

namespace kdn {

// SplitMix64 (Steele, Lea & Flood). Splittable, trivially seedable, and
// stable across platforms, which keeps noise generation replayable.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1).
    double next_unit() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// Algorithm name recorded in metric output so runs stay replayable.
inline constexpr const char* kRngName = "splitmix64";

enum class NoiseKind { Uniform, Gaussian };

// Zero-mean pixel noise: Uniform on (-sigma, sigma) or Gaussian N(0, sigma^2).
struct NoiseModel {
    NoiseKind kind = NoiseKind::Gaussian;
    double sigma = 0.1;
    std::uint64_t seed = 1;
};

// Sequential sampler; the draw order is part of the determinism contract.
class NoiseStream {
public:
    explicit NoiseStream(const NoiseModel& model) : model_(model), rng_(model.seed) {
        if (model.sigma < 0.0)
            throw std::invalid_argument("NoiseStream: sigma must be nonnegative");
    }

    double next() {
        if (model_.sigma == 0.0) return 0.0;
        if (model_.kind == NoiseKind::Uniform) {
            // next_unit() is strictly inside (0,1), so the draw stays strictly
            // inside (-sigma, sigma).
            return model_.sigma * (2.0 * rng_.next_unit() - 1.0);
        }
        return model_.sigma * next_standard_normal();
    }

    // Standard normal via Box-Muller; the spare value is cached.
    double next_standard_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.next_unit();
        const double u2 = rng_.next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

private:
    NoiseModel model_;
    SplitMix64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Adds i.i.d. noise pixel by pixel in row-major order. The result is not
// clipped; out-of-range values are preserved so the noise keeps zero mean.
inline GrayscaleImage add_noise(const GrayscaleImage& img, const NoiseModel& model) {
    GrayscaleImage out = img;
    NoiseStream stream(model);
    for (double& v : out.values())
        v += stream.next();
    return out;
}

} // namespace kdn
