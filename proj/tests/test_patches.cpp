#include <doctest.h>

#include "kdenoise/noise.hpp"
#include "kdenoise/patches.hpp"

using namespace kdn;

TEST_CASE("whole-image tile yields a single patch") {
    const PatchCover cover = make_cover(64, 64, 1.0, 1.0, 64, 16);
    REQUIRE(cover.patches.size() == 1);
    const PatchRect& u = cover.patches[0];
    CHECK(u.row0 == 0);
    CHECK(u.col0 == 0);
    CHECK(u.rows == 64);
    CHECK(u.cols == 64);
    CHECK(u.edge_left);
    CHECK(u.edge_right);
    CHECK(u.edge_top);
    CHECK(u.edge_bottom);
}

TEST_CASE("100x100 with tile 64 overlap 16 clamps the last offset to 36") {
    const std::vector<int> pos = tile_positions(100, 64, 16);
    REQUIRE(pos == std::vector<int>{0, 36});
    const PatchCover cover = make_cover(100, 100, 1.0, 1.0, 64, 16);
    CHECK(cover.patches.size() == 4);
}

TEST_CASE("every pixel is covered across random geometries") {
    SplitMix64 rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 5 + static_cast<int>(rng.next() % 140);
        const int cols = 5 + static_cast<int>(rng.next() % 140);
        const int tile = 2 + static_cast<int>(rng.next() % 70);
        const int overlap = 1 + static_cast<int>(rng.next() % (tile - 1));
        const PatchCover cover = make_cover(rows, cols, 1.0, 1.0, tile, overlap);

        std::vector<int> hits(static_cast<std::size_t>(rows) * cols, 0);
        for (const PatchRect& u : cover.patches)
            for (int i = u.row0; i < u.row0 + u.rows; ++i)
                for (int j = u.col0; j < u.col0 + u.cols; ++j)
                    ++hits[static_cast<std::size_t>(i) * cols + j];
        for (int h : hits) CHECK(h >= 1);
    }
}

TEST_CASE("invalid cover geometry is rejected") {
    CHECK_THROWS_AS(make_cover(0, 10, 1.0, 1.0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_cover(10, 10, 1.0, 1.0, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_cover(10, 10, 1.0, 1.0, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(make_cover(10, 10, 1.0, 1.0, 4, 2, 0.0), std::invalid_argument);
}

TEST_CASE("partition-of-unity weight values") {
    PatchRect u;
    u.x0 = 0.0;
    u.x1 = 1.0;
    u.y0 = 0.0;
    u.y1 = 1.0; // interior patch: every edge counts

    CHECK(pou_weight(Point2{1.5, 0.5}, u, std::sqrt(2.0), 1.0) == 0.0);  // outside
    CHECK(pou_weight(Point2{0.0, 0.5}, u, std::sqrt(2.0), 1.0) == 0.0);  // on the boundary
    CHECK(pou_weight(Point2{0.5, 1.0}, u, std::sqrt(2.0), 1.0) == 0.0);

    // center of the unit square at h = sqrt(2): 1 - exp(-0.25 / 2)
    const double w = pou_weight(Point2{0.5, 0.5}, u, std::sqrt(2.0), 1.0);
    CHECK(w == doctest::Approx(1.0 - std::exp(-0.125)).epsilon(1e-12));
    CHECK(w == doctest::Approx(0.11750309741540454).epsilon(1e-10));

    CHECK_THROWS_AS(pou_weight(Point2{0.5, 0.5}, u, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("weights vanish continuously toward the effective boundary") {
    PatchRect u;
    u.x0 = 0.0;
    u.x1 = 1.0;
    u.y0 = 0.0;
    u.y1 = 1.0;
    double prev = pou_weight(Point2{0.5, 0.5}, u, 1.0, 1.0);
    for (double x : {0.25, 0.1, 0.01, 1e-4, 1e-8}) {
        const double w = pou_weight(Point2{x, 0.5}, u, 1.0, 1.0);
        CHECK(w < prev);
        prev = w;
    }
    CHECK(prev <= 1e-15);
}

TEST_CASE("image-boundary edges keep border pixels weighted") {
    const PatchCover cover = make_cover(10, 10, 1.0, 1.0, 10, 2);
    const PatchRect& u = cover.patches[0];
    // every edge coincides with the image boundary: full weight everywhere
    CHECK(pou_weight(Point2{0.05, 0.05}, u, u.diameter(), 1.0) == 1.0);
    CHECK(pou_weight(Point2{0.5, 0.99}, u, u.diameter(), 1.0) == 1.0);
}

TEST_CASE("blending a power-of-two constant is exact") {
    const PatchCover cover = make_cover(40, 40, 1.0, 1.0, 24, 8);
    REQUIRE(cover.patches.size() > 1);
    std::vector<GrayscaleImage> estimates;
    for (const PatchRect& u : cover.patches) {
        GrayscaleImage e(u.rows, u.cols, 1.0, 1.0);
        for (double& v : e.values()) v = 0.5;
        estimates.push_back(std::move(e));
    }
    const GrayscaleImage out = blend(estimates, cover);
    for (double v : out.values()) CHECK(v == 0.5);
}

TEST_CASE("blending a general constant cancels the weights") {
    const PatchCover cover = make_cover(33, 47, 1.0, 1.0, 20, 6);
    std::vector<GrayscaleImage> estimates;
    for (const PatchRect& u : cover.patches) {
        GrayscaleImage e(u.rows, u.cols, 1.0, 1.0);
        for (double& v : e.values()) v = 0.3171;
        estimates.push_back(std::move(e));
    }
    const GrayscaleImage out = blend(estimates, cover);
    for (double v : out.values()) CHECK(v == doctest::Approx(0.3171).epsilon(1e-14));
}

TEST_CASE("single positive-weight patch passes through unchanged") {
    const PatchCover cover = make_cover(12, 12, 1.0, 1.0, 12, 4);
    REQUIRE(cover.patches.size() == 1);
    GrayscaleImage est(12, 12, 1.0, 1.0);
    SplitMix64 rng(4);
    for (double& v : est.values()) v = rng.next_unit();
    const GrayscaleImage out = blend({est}, cover);
    CHECK(out.values() == est.values());
}

TEST_CASE("two overlapping strips blend by the scalar weight formula") {
    // one pixel row, two horizontally overlapping patches
    PatchCover cover;
    cover.image_rows = 1;
    cover.image_cols = 20;
    cover.length = 1.0;
    cover.width = 0.05;
    cover.delta1 = 1.0;
    cover.tile = 12;
    cover.overlap = 4;

    PatchRect left;
    left.row0 = 0;
    left.col0 = 0;
    left.rows = 1;
    left.cols = 12;
    left.x0 = 0.0;
    left.x1 = 12.0 / 20.0;
    left.y0 = 0.0;
    left.y1 = 0.05;
    left.edge_left = left.edge_top = left.edge_bottom = true;

    PatchRect right;
    right.row0 = 0;
    right.col0 = 8;
    right.rows = 1;
    right.cols = 12;
    right.x0 = 8.0 / 20.0;
    right.x1 = 1.0;
    right.y0 = 0.0;
    right.y1 = 0.05;
    right.edge_right = right.edge_top = right.edge_bottom = true;

    cover.patches = {left, right};

    GrayscaleImage zero(1, 12, 1.0, 1.0);
    GrayscaleImage one(1, 12, 1.0, 1.0);
    for (double& v : one.values()) v = 1.0;
    const GrayscaleImage out = blend({zero, one}, cover);

    const GrayscaleImage frame(1, 20, 1.0, 0.05);
    for (int j = 0; j < 20; ++j) {
        const Point2 p = frame.pixel_center(0, j);
        const double w1 = pou_weight(p, left, left.diameter(), 1.0);
        const double w2 = pou_weight(p, right, right.diameter(), 1.0);
        const double want = (w1 + w2) > 0 ? w2 / (w1 + w2) : 0.0;
        CHECK(out(0, j) == doctest::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("blended fields stay inside the per-pixel estimate range") {
    SplitMix64 rng(88);
    for (int trial = 0; trial < 5; ++trial) {
        const int rows = 20 + static_cast<int>(rng.next() % 40);
        const int cols = 20 + static_cast<int>(rng.next() % 40);
        const int tile = 8 + static_cast<int>(rng.next() % 20);
        const int overlap = 1 + static_cast<int>(rng.next() % (tile - 1));
        const PatchCover cover = make_cover(rows, cols, 1.0, 1.0, tile, overlap);

        std::vector<GrayscaleImage> estimates;
        for (const PatchRect& u : cover.patches) {
            GrayscaleImage e(u.rows, u.cols, 1.0, 1.0);
            for (double& v : e.values()) v = rng.next_unit();
            estimates.push_back(std::move(e));
        }
        const GrayscaleImage out = blend(estimates, cover);

        GrayscaleImage lo(rows, cols, 1.0, 1.0), hi(rows, cols, 1.0, 1.0);
        for (double& v : lo.values()) v = std::numeric_limits<double>::infinity();
        for (double& v : hi.values()) v = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cover.patches.size(); ++k) {
            const PatchRect& u = cover.patches[k];
            for (int i = 0; i < u.rows; ++i) {
                for (int j = 0; j < u.cols; ++j) {
                    double& l = lo.at(u.row0 + i, u.col0 + j);
                    double& h = hi.at(u.row0 + i, u.col0 + j);
                    l = std::min(l, estimates[k](i, j));
                    h = std::max(h, estimates[k](i, j));
                }
            }
        }
        for (std::size_t k = 0; k < out.pixel_count(); ++k) {
            CHECK(out.values()[k] >= lo.values()[k] - 1e-12);
            CHECK(out.values()[k] <= hi.values()[k] + 1e-12);
        }
    }
}

TEST_CASE("estimate shape mismatches are rejected") {
    const PatchCover cover = make_cover(10, 10, 1.0, 1.0, 8, 2);
    std::vector<GrayscaleImage> estimates(cover.patches.size(),
                                          GrayscaleImage(3, 3, 1.0, 1.0));
    CHECK_THROWS_AS(blend(estimates, cover), std::invalid_argument);
    CHECK_THROWS_AS(blend({}, cover), std::invalid_argument);
}

TEST_CASE("single-patch cover reproduces the patch pipeline exactly") {
    DenoiseConfig cfg;
    cfg.tile = 32;
    cfg.overlap = 8;
    const GrayscaleImage clean = synth_cosine(24, 24, 1.0, 1.0, 6.0);
    const GrayscaleImage noisy = add_noise(clean, NoiseModel{NoiseKind::Gaussian, 0.05, 3});

    const GrayscaleImage whole = denoise_image(noisy, cfg);
    const GrayscaleImage direct = denoise_patch(noisy, cfg).denoised;
    CHECK(whole.values() == direct.values());
}

TEST_CASE("patched and blended denoising improves a noisy cosine") {
    DenoiseConfig cfg;
    cfg.tile = 24;
    cfg.overlap = 8;
    cfg.eps_zero = std::exp(-1.0);
    const GrayscaleImage clean = synth_cosine(48, 48, 1.0, 1.0, 5.0);
    const GrayscaleImage noisy = add_noise(clean, NoiseModel{NoiseKind::Gaussian, 0.1, 12});
    const ImageDenoiseResult res = denoise_image_full(noisy, cfg);
    CHECK(res.patch_grid_rows == 3);
    CHECK(res.patch_grid_cols == 3);
    CHECK(l2_error(res.denoised, clean) < l2_error(noisy, clean));
}
