#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <thread>
#include <vector>

#include "kdenoise/pipeline.hpp"

namespace kdn {

// Axis-aligned patch: a pixel index range plus its physical rectangle.
// Edges flagged as image boundary are excluded from the weight function's
// notion of boundary, so border pixels keep positive weight.
struct PatchRect {
    int row0 = 0, col0 = 0;
    int rows = 0, cols = 0;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool edge_left = false, edge_right = false, edge_top = false, edge_bottom = false;

    double diameter() const { return std::hypot(x1 - x0, y1 - y0); }
    bool contains(const Point2& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

struct PatchCover {
    std::vector<PatchRect> patches;
    int image_rows = 0, image_cols = 0;
    double length = 0, width = 0;
    int tile = 0, overlap = 0;
    double delta1 = 1.0;
};

// Tile start offsets along one axis: step by tile - overlap, clamp the last
// tile to the edge. dim < tile falls back to a single full-span tile.
inline std::vector<int> tile_positions(int dim, int tile, int overlap) {
    std::vector<int> pos;
    if (tile >= dim) {
        pos.push_back(0);
        return pos;
    }
    int p = 0;
    while (true) {
        if (p + tile >= dim) {
            pos.push_back(dim - tile);
            break;
        }
        pos.push_back(p);
        p += tile - overlap;
    }
    return pos;
}

inline PatchCover make_cover(int rows, int cols, double length, double width, int tile,
                             int overlap, double delta1 = 1.0) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("make_cover: pixel counts must be positive");
    if (overlap < 1 || tile <= overlap)
        throw std::invalid_argument("make_cover: need tile > overlap >= 1");
    if (!(delta1 > 0.0))
        throw std::invalid_argument("make_cover: delta1 must be positive");

    PatchCover cover;
    cover.image_rows = rows;
    cover.image_cols = cols;
    cover.length = length;
    cover.width = width;
    cover.tile = tile;
    cover.overlap = overlap;
    cover.delta1 = delta1;

    const int tile_r = std::min(tile, rows);
    const int tile_c = std::min(tile, cols);
    const double dx = length / cols;
    const double dy = width / rows;

    for (int r0 : tile_positions(rows, tile_r, overlap)) {
        for (int c0 : tile_positions(cols, tile_c, overlap)) {
            PatchRect u;
            u.row0 = r0;
            u.col0 = c0;
            u.rows = tile_r;
            u.cols = tile_c;
            u.x0 = c0 * dx;
            u.x1 = (c0 + tile_c) * dx;
            u.y0 = r0 * dy;
            u.y1 = (r0 + tile_r) * dy;
            u.edge_left = (c0 == 0);
            u.edge_right = (c0 + tile_c == cols);
            u.edge_top = (r0 == 0);
            u.edge_bottom = (r0 + tile_r == rows);
            cover.patches.push_back(u);
        }
    }
    return cover;
}

// Distance from an interior point to the effective patch boundary, with
// image-coincident edges excluded. Infinite when every edge is excluded.
inline double boundary_distance(const Point2& p, const PatchRect& u) {
    double d = std::numeric_limits<double>::infinity();
    if (!u.edge_left) d = std::min(d, p.x - u.x0);
    if (!u.edge_right) d = std::min(d, u.x1 - p.x);
    if (!u.edge_top) d = std::min(d, p.y - u.y0);
    if (!u.edge_bottom) d = std::min(d, u.y1 - p.y);
    return d;
}

// Partition-of-unity bump: zero outside the closed patch, zero on its
// effective boundary, approaching 1 deep inside.
inline double pou_weight(const Point2& p, const PatchRect& u, double h, double delta1) {
    if (!(h > 0.0) || !(delta1 > 0.0))
        throw std::invalid_argument("pou_weight: h and delta1 must be positive");
    if (!u.contains(p)) return 0.0;
    const double d = boundary_distance(p, u);
    if (std::isinf(d)) return 1.0;
    return 1.0 - std::exp(-(d * d) / (h * h * delta1));
}

// Aggregates per-patch estimates: out(x) = sum_i f_i(x) w_i(x) / sum_i w_i(x),
// accumulated in patch index order so the result is reproducible.
inline GrayscaleImage blend(const std::vector<GrayscaleImage>& estimates,
                            const PatchCover& cover) {
    if (estimates.size() != cover.patches.size())
        throw std::invalid_argument("blend: one estimate per patch required");

    GrayscaleImage out(cover.image_rows, cover.image_cols, cover.length, cover.width);
    std::vector<double> weight_sum(out.pixel_count(), 0.0);
    std::vector<double> numerator(out.pixel_count(), 0.0);

    for (std::size_t k = 0; k < cover.patches.size(); ++k) {
        const PatchRect& u = cover.patches[k];
        const GrayscaleImage& est = estimates[k];
        if (est.rows() != u.rows || est.cols() != u.cols)
            throw std::invalid_argument("blend: estimate shape does not match its patch");
        const double h = u.diameter();
        for (int pi = 0; pi < u.rows; ++pi) {
            for (int pj = 0; pj < u.cols; ++pj) {
                const int gi = u.row0 + pi;
                const int gj = u.col0 + pj;
                const double w = pou_weight(out.pixel_center(gi, gj), u, h, cover.delta1);
                const std::size_t flat =
                    static_cast<std::size_t>(gi) * cover.image_cols + gj;
                weight_sum[flat] += w;
                numerator[flat] += w * est(pi, pj);
            }
        }
    }

    for (std::size_t flat = 0; flat < out.pixel_count(); ++flat) {
        if (!(weight_sum[flat] > 0.0))
            throw CoverError("blend: pixel " + std::to_string(flat) +
                             " received zero total weight");
        out.values()[flat] = numerator[flat] / weight_sum[flat];
    }
    return out;
}

inline GrayscaleImage extract_patch(const GrayscaleImage& img, const PatchRect& u) {
    GrayscaleImage patch(u.rows, u.cols, u.cols * img.dx(), u.rows * img.dy());
    for (int pi = 0; pi < u.rows; ++pi)
        for (int pj = 0; pj < u.cols; ++pj)
            patch.at(pi, pj) = img(u.row0 + pi, u.col0 + pj);
    return patch;
}

struct ImageDenoiseResult {
    GrayscaleImage denoised;
    DenoiseDiagnostics diagnostics; // shared by all patches (one geometry)
    int patch_grid_rows = 0;
    int patch_grid_cols = 0;
    double seconds_build = 0.0;
    double seconds_solve = 0.0;
};

// Whole-image denoising: one patch engine, every patch solved against it
// (concurrently), partition-of-unity blending. All patches share a single
// tile shape, so the operators are built exactly once.
inline ImageDenoiseResult denoise_image_full(const GrayscaleImage& noisy,
                                             const DenoiseConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    PatchCover cover = make_cover(noisy.rows(), noisy.cols(), noisy.length(), noisy.width(),
                                  cfg.tile, cfg.overlap, cfg.delta1);
    const PatchRect& shape = cover.patches.front();
    PatchDenoiser engine(shape.rows, shape.cols, shape.cols * noisy.dx(),
                         shape.rows * noisy.dy(), cfg);

    const auto t1 = std::chrono::steady_clock::now();

    const std::size_t n_patches = cover.patches.size();
    std::vector<GrayscaleImage> estimates;
    estimates.reserve(n_patches);

    if (n_patches == 1) {
        estimates.push_back(engine.apply(extract_patch(noisy, cover.patches[0])).denoised);
    } else {
        std::vector<std::future<GrayscaleImage>> futures;
        futures.reserve(n_patches);
        for (std::size_t k = 0; k < n_patches; ++k) {
            futures.push_back(std::async(std::launch::async, [&, k] {
                return engine.apply(extract_patch(noisy, cover.patches[k])).denoised;
            }));
        }
        for (auto& f : futures) estimates.push_back(f.get());
    }

    ImageDenoiseResult res{blend(estimates, cover), engine.diagnostics(), 0, 0, 0.0, 0.0};
    const auto t2 = std::chrono::steady_clock::now();
    res.patch_grid_rows =
        static_cast<int>(tile_positions(noisy.rows(), std::min(cfg.tile, noisy.rows()),
                                        cfg.overlap)
                             .size());
    res.patch_grid_cols =
        static_cast<int>(tile_positions(noisy.cols(), std::min(cfg.tile, noisy.cols()),
                                        cfg.overlap)
                             .size());
    res.seconds_build = std::chrono::duration<double>(t1 - t0).count();
    res.seconds_solve = std::chrono::duration<double>(t2 - t1).count();
    return res;
}

inline GrayscaleImage denoise_image(const GrayscaleImage& noisy, const DenoiseConfig& cfg) {
    return denoise_image_full(noisy, cfg).denoised;
}

} // namespace kdn
