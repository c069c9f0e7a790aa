#pragma once

#include <chrono>
#include <string>

#include "kdenoise/metrics.hpp"
#include "kdenoise/patches.hpp"

namespace kdn {

// One denoise trial against a known clean image, with the measurements the
// experiment driver and the CSV output need.
struct TrialResult {
    GrayscaleImage clean;
    GrayscaleImage noisy;
    GrayscaleImage denoised;
    DenoiseDiagnostics diagnostics;
    double l2_noisy = 0.0;      // noisy vs clean
    double sup_noisy = 0.0;
    double l2_denoised = 0.0;   // denoised vs clean
    double sup_denoised = 0.0;
    double l2_vs_input = 0.0;   // denoised vs noisy
    double sup_vs_input = 0.0;
    double seconds = 0.0;
};

inline TrialResult run_denoise_trial(const GrayscaleImage& clean, const NoiseModel& noise,
                                     const DenoiseConfig& cfg) {
    TrialResult r{clean, add_noise(clean, noise), clean, {}, 0, 0, 0, 0, 0, 0, 0};

    const auto t0 = std::chrono::steady_clock::now();
    ImageDenoiseResult out = denoise_image_full(r.noisy, cfg);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    r.denoised = std::move(out.denoised);
    r.diagnostics = out.diagnostics;
    r.l2_noisy = l2_error(r.noisy, r.clean);
    r.sup_noisy = sup_error(r.noisy, r.clean);
    r.l2_denoised = l2_error(r.denoised, r.clean);
    r.sup_denoised = sup_error(r.denoised, r.clean);
    r.l2_vs_input = l2_error(r.denoised, r.noisy);
    r.sup_vs_input = sup_error(r.denoised, r.noisy);
    return r;
}

// Three CSV rows per trial: the denoised error against the clean truth and
// against the noisy input, plus the noisy baseline itself.
inline std::vector<MetricRow> trial_rows(const std::string& label, const TrialResult& r,
                                         const NoiseModel& noise, const DenoiseConfig& cfg,
                                         double alpha) {
    MetricRow base;
    base.n_pixels = static_cast<long>(r.clean.pixel_count());
    base.subgrid_size = r.diagnostics.subgrid_size;
    base.theta = r.diagnostics.theta;
    base.eta3 = cfg.eta3;
    base.sigma = noise.sigma;
    base.alpha = alpha;
    base.seconds = r.seconds;

    MetricRow denoised = base;
    denoised.experiment = label + ":denoised_vs_clean";
    denoised.l2_error = r.l2_denoised;
    denoised.sup_error = r.sup_denoised;

    MetricRow vs_input = base;
    vs_input.experiment = label + ":denoised_vs_noisy";
    vs_input.l2_error = r.l2_vs_input;
    vs_input.sup_error = r.sup_vs_input;

    MetricRow noisy = base;
    noisy.experiment = label + ":noisy_vs_clean";
    noisy.theta = 0.0;
    noisy.seconds = 0.0;
    noisy.l2_error = r.l2_noisy;
    noisy.sup_error = r.sup_noisy;

    return {denoised, vs_input, noisy};
}

} // namespace kdn
