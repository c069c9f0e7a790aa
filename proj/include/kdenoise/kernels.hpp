#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "kdenoise/bandwidth.hpp"
#include "kdenoise/core.hpp"
#include "kdenoise/sparse_matrix.hpp"

namespace kdn {

// Gaussian kernel exp(-dist^2 / delta).
inline double gaussian(const Point2& a, const Point2& b, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("gaussian: bandwidth must be positive");
    return std::exp(-squared_dist(a, b) / delta);
}

// Squared distance beyond which the Gaussian drops below eps. Pairs at the
// cutoff itself evaluate to exactly eps and are kept.
inline double gaussian_cutoff2(double delta, double eps) {
    if (!(delta > 0.0))
        throw std::invalid_argument("gaussian_cutoff2: bandwidth must be positive");
    if (eps <= 0.0) return std::numeric_limits<double>::infinity();
    if (eps >= 1.0) return 0.0;
    return delta * std::log(1.0 / eps);
}

// Uniform cell binning for fixed-radius neighbor queries. Owns a copy of
// the points, so it stays valid independently of the caller's buffers.
class PointGrid {
public:
    PointGrid(std::span<const Point2> pts, double cell)
        : pts_(pts.begin(), pts.end()), cell_(cell) {
        if (!(cell_ > 0.0))
            throw std::invalid_argument("PointGrid: cell size must be positive");
        if (pts_.empty())
            throw std::invalid_argument("PointGrid: empty point set");
        min_x_ = max_x_ = pts_[0].x;
        min_y_ = max_y_ = pts_[0].y;
        for (const Point2& p : pts_) {
            min_x_ = std::min(min_x_, p.x);
            max_x_ = std::max(max_x_, p.x);
            min_y_ = std::min(min_y_, p.y);
            max_y_ = std::max(max_y_, p.y);
        }
        nx_ = cell_index(max_x_, min_x_) + 1;
        ny_ = cell_index(max_y_, min_y_) + 1;

        std::vector<int> counts(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        for (const Point2& p : pts_) ++counts[flat_cell(p) + 1];
        for (std::size_t c = 1; c < counts.size(); ++c) counts[c] += counts[c - 1];
        offsets_ = counts;
        order_.resize(pts_.size());
        std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
        for (int k = 0; k < static_cast<int>(pts_.size()); ++k)
            order_[cursor[flat_cell(pts_[k])]++] = k;
    }

    const std::vector<Point2>& points() const { return pts_; }

    // Calls f(index, squared_distance) for every stored point within the
    // given squared radius of q.
    template <class F>
    void for_each_in_ball(const Point2& q, double radius2, F&& f) const {
        const double r = std::sqrt(radius2);
        const int cx0 = std::clamp(cell_index(q.x - r, min_x_), 0, nx_ - 1);
        const int cx1 = std::clamp(cell_index(q.x + r, min_x_), 0, nx_ - 1);
        const int cy0 = std::clamp(cell_index(q.y - r, min_y_), 0, ny_ - 1);
        const int cy1 = std::clamp(cell_index(q.y + r, min_y_), 0, ny_ - 1);
        for (int cy = cy0; cy <= cy1; ++cy) {
            for (int cx = cx0; cx <= cx1; ++cx) {
                const std::size_t cell = static_cast<std::size_t>(cy) * nx_ + cx;
                for (int k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
                    const int idx = order_[k];
                    const double d2 = squared_dist(q, pts_[idx]);
                    if (d2 <= radius2) f(idx, d2);
                }
            }
        }
    }

private:
    int cell_index(double v, double origin) const {
        const int c = static_cast<int>(std::floor((v - origin) / cell_));
        return std::max(c, 0);
    }
    std::size_t flat_cell(const Point2& p) const {
        const int cx = std::clamp(cell_index(p.x, min_x_), 0, nx_ - 1);
        const int cy = std::clamp(cell_index(p.y, min_y_), 0, ny_ - 1);
        return static_cast<std::size_t>(cy) * nx_ + cx;
    }

    std::vector<Point2> pts_;
    double cell_;
    double min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0;
    int nx_ = 1, ny_ = 1;
    std::vector<int> offsets_;
    std::vector<int> order_;
};

namespace detail {

// Shared sparse assembly: visits every (row, col) pair whose squared
// distance is within cutoff2 and stores value(row_pt, col_pt, d2).
template <class Value>
SparseKernelMatrix assemble_truncated(std::span<const Point2> row_pts,
                                      std::span<const Point2> col_pts, double cutoff2,
                                      double eps_zero, RowKind kind, Value&& value) {
    if (row_pts.empty() || col_pts.empty())
        throw std::invalid_argument("kernel matrix assembly: empty point set");

    std::vector<Eigen::Triplet<double>> entries;
    if (!std::isfinite(cutoff2)) {
        entries.reserve(row_pts.size() * col_pts.size());
        for (int i = 0; i < static_cast<int>(row_pts.size()); ++i)
            for (int j = 0; j < static_cast<int>(col_pts.size()); ++j)
                entries.emplace_back(i, j, value(i, j, squared_dist(row_pts[i], col_pts[j])));
    } else {
        const double cell = std::max(std::sqrt(cutoff2), 1e-300);
        PointGrid grid(col_pts, cell);
        std::vector<std::pair<int, double>> row;
        for (int i = 0; i < static_cast<int>(row_pts.size()); ++i) {
            row.clear();
            grid.for_each_in_ball(row_pts[i], cutoff2,
                                  [&](int j, double d2) { row.emplace_back(j, d2); });
            std::sort(row.begin(), row.end());
            for (const auto& [j, d2] : row)
                entries.emplace_back(i, j, value(i, j, d2));
        }
    }
    return SparseKernelMatrix::from_triplets(static_cast<int>(row_pts.size()),
                                             static_cast<int>(col_pts.size()), entries,
                                             eps_zero, kind);
}

} // namespace detail

// Truncated Gaussian kernel matrix between two point sets. Entries below
// eps_zero are dropped; eps_zero = 0 produces the dense matrix.
inline SparseKernelMatrix gaussian_matrix(std::span<const Point2> row_pts,
                                          std::span<const Point2> col_pts, double delta,
                                          double eps_zero) {
    const double cutoff2 = gaussian_cutoff2(delta, eps_zero);
    return detail::assemble_truncated(
        row_pts, col_pts, cutoff2, eps_zero, RowKind::Raw,
        [delta](int, int, double d2) { return std::exp(-d2 / delta); });
}

// Row-stochastic normalization against probability weights over the columns
// (uniform weights when none are given). A row without support signals that
// the bandwidth is too small for the grid.
inline SparseKernelMatrix markov_normalize(const SparseKernelMatrix& raw,
                                           std::span<const double> weights = {}) {
    const int ncols = raw.cols();
    if (!weights.empty()) {
        if (static_cast<int>(weights.size()) != ncols)
            throw std::invalid_argument("markov_normalize: weight count must match columns");
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0)
                throw std::invalid_argument("markov_normalize: weights must be nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-8)
            throw std::invalid_argument("markov_normalize: weights must sum to 1");
    }
    const double uniform = 1.0 / static_cast<double>(ncols);

    SparseKernelMatrix::Matrix out = raw.matrix();
    for (int i = 0; i < out.rows(); ++i) {
        double denom = 0.0;
        for (SparseKernelMatrix::Matrix::InnerIterator it(out, i); it; ++it)
            denom += it.value() * (weights.empty() ? uniform : weights[it.col()]);
        if (!(denom > 0.0))
            throw DegenerateRowError("markov_normalize: row " + std::to_string(i) +
                                     " has no kernel support (bandwidth too small for grid)");
        for (SparseKernelMatrix::Matrix::InnerIterator it(out, i); it; ++it)
            it.valueRef() = it.value() * (weights.empty() ? uniform : weights[it.col()]) / denom;
    }
    return SparseKernelMatrix(std::move(out), raw.eps_zero(), RowKind::Markov);
}

// Doubly degree-normalized Gaussian geometry over a reference point set.
// Empirical means over the reference points stand in for the integrals
// against the underlying sampling measure.
class DiffusionGeometry {
public:
    DiffusionGeometry(std::vector<Point2> reference, double delta, double eps_zero)
        : ref_(std::move(reference)), delta_(delta), eps_zero_(eps_zero),
          cutoff2_(gaussian_cutoff2(delta, eps_zero)) {
        if (ref_.empty())
            throw std::invalid_argument("DiffusionGeometry: empty reference set");
        if (std::isfinite(cutoff2_))
            grid_.emplace(std::span<const Point2>(ref_), std::max(std::sqrt(cutoff2_), 1e-300));

        const int n = static_cast<int>(ref_.size());
        deg_r_.resize(n);
        for (int i = 0; i < n; ++i) deg_r_[i] = mean_kernel(ref_[i], nullptr);
        deg_l_.resize(n);
        for (int i = 0; i < n; ++i) deg_l_[i] = mean_kernel(ref_[i], &deg_r_);
    }

    double bandwidth() const { return delta_; }
    double eps_zero() const { return eps_zero_; }
    const std::vector<Point2>& reference() const { return ref_; }

    // mean_n kGauss(x, x_n) over the reference set.
    double deg_r_at(const Point2& x) const { return checked(mean_kernel(x, nullptr)); }
    // mean_n kGauss(x, x_n) / deg_r(x_n).
    double deg_l_at(const Point2& x) const { return checked(mean_kernel(x, &deg_r_)); }
    double rho_at(const Point2& x) const { return std::sqrt(deg_l_at(x) / deg_r_at(x)); }

    DegreeVectors degrees() const {
        DegreeVectors d;
        const int n = static_cast<int>(ref_.size());
        d.deg_r.resize(n);
        d.deg_l.resize(n);
        d.rho.resize(n);
        for (int i = 0; i < n; ++i) {
            d.deg_r[i] = deg_r_[i];
            d.deg_l[i] = deg_l_[i];
            d.rho[i] = std::sqrt(deg_l_[i] / deg_r_[i]);
        }
        return d;
    }

    // kGauss(a, b) / (deg_l(a) * deg_r(b)); not symmetric.
    double operator()(const Point2& a, const Point2& b) const {
        return gaussian(a, b, delta_) / (deg_l_at(a) * deg_r_at(b));
    }

    // The symmetrized variant kGauss / sqrt(deg_r deg_l (a) * deg_r deg_l (b)).
    double symmetric(const Point2& a, const Point2& b) const {
        const double sa = std::sqrt(deg_r_at(a) * deg_l_at(a));
        const double sb = std::sqrt(deg_r_at(b) * deg_l_at(b));
        return gaussian(a, b, delta_) / (sa * sb);
    }

    double deg_r_ref(int i) const { return deg_r_[i]; }
    double deg_l_ref(int i) const { return deg_l_[i]; }

private:
    double mean_kernel(const Point2& x, const std::vector<double>* per_point_divisor) const {
        double acc = 0.0;
        auto add = [&](int idx, double d2) {
            const double k = std::exp(-d2 / delta_);
            acc += per_point_divisor ? k / (*per_point_divisor)[idx] : k;
        };
        if (grid_) {
            grid_->for_each_in_ball(x, cutoff2_, add);
        } else {
            for (int idx = 0; idx < static_cast<int>(ref_.size()); ++idx)
                add(idx, squared_dist(x, ref_[idx]));
        }
        return acc / static_cast<double>(ref_.size());
    }

    double checked(double deg) const {
        if (!(deg > 0.0))
            throw NumericError("DiffusionGeometry: degenerate degree (point outside the "
                               "kernel support of the reference set)");
        return deg;
    }

    std::vector<Point2> ref_;
    double delta_;
    double eps_zero_;
    double cutoff2_;
    std::optional<PointGrid> grid_;
    std::vector<double> deg_r_;
    std::vector<double> deg_l_;
};

// Square diffusion kernel matrix over one point set, together with the
// symmetrized variant and the degree data. The symmetric matrix is built
// straight from kGauss / (s_i s_j) with s_i = sqrt(deg_r_i deg_l_i), an
// independent route from the rho-scaled plain matrix.
struct DiffusionMatrices {
    SparseKernelMatrix diffusion;
    SparseKernelMatrix symmetric;
    DegreeVectors degrees;
};

inline DiffusionMatrices diffusion_kernel_matrix(std::span<const Point2> points, double delta2,
                                                 double eps_zero) {
    DiffusionGeometry geom(std::vector<Point2>(points.begin(), points.end()), delta2, eps_zero);
    const double cutoff2 = gaussian_cutoff2(delta2, eps_zero);

    DiffusionMatrices out;
    out.degrees = geom.degrees();
    out.diffusion = detail::assemble_truncated(
        points, points, cutoff2, eps_zero, RowKind::Diffusion,
        [&geom, delta2](int i, int j, double d2) {
            return std::exp(-d2 / delta2) / (geom.deg_l_ref(i) * geom.deg_r_ref(j));
        });

    Eigen::VectorXd scale(static_cast<int>(points.size()));
    for (int i = 0; i < scale.size(); ++i)
        scale[i] = std::sqrt(geom.deg_r_ref(i) * geom.deg_l_ref(i));
    out.symmetric = detail::assemble_truncated(
        points, points, cutoff2, eps_zero, RowKind::DiffusionSymmetric,
        [&scale, delta2](int i, int j, double d2) {
            return std::exp(-d2 / delta2) / (scale[i] * scale[j]);
        });
    return out;
}

// Plain Gaussian kernel for use as an RKHS kernel.
struct GaussianKernel {
    double delta = 1.0;
    double bandwidth() const { return delta; }
    double operator()(const Point2& a, const Point2& b) const { return gaussian(a, b, delta); }
};

// Cross matrix K(i,j) = k(row_i, col_j), truncated where the underlying
// Gaussian factor falls below eps_zero.
inline SparseKernelMatrix kernel_cross_matrix(std::span<const Point2> row_pts,
                                              std::span<const Point2> col_pts,
                                              const GaussianKernel& kernel, double eps_zero) {
    const double delta = kernel.bandwidth();
    const double cutoff2 = gaussian_cutoff2(delta, eps_zero);
    return detail::assemble_truncated(
        row_pts, col_pts, cutoff2, eps_zero, RowKind::Raw,
        [delta](int, int, double d2) { return std::exp(-d2 / delta); });
}

inline SparseKernelMatrix kernel_cross_matrix(std::span<const Point2> row_pts,
                                              std::span<const Point2> col_pts,
                                              const DiffusionGeometry& kernel,
                                              double eps_zero) {
    const double delta = kernel.bandwidth();
    const double cutoff2 = gaussian_cutoff2(delta, eps_zero);

    // Degrees vary only with the point, not the pair; tabulate them once.
    std::vector<double> row_deg_l(row_pts.size());
    for (std::size_t i = 0; i < row_pts.size(); ++i)
        row_deg_l[i] = kernel.deg_l_at(row_pts[i]);
    std::vector<double> col_deg_r(col_pts.size());
    for (std::size_t j = 0; j < col_pts.size(); ++j)
        col_deg_r[j] = kernel.deg_r_at(col_pts[j]);

    return detail::assemble_truncated(
        row_pts, col_pts, cutoff2, eps_zero, RowKind::Diffusion,
        [&, delta](int i, int j, double d2) {
            return std::exp(-d2 / delta) / (row_deg_l[i] * col_deg_r[j]);
        });
}

} // namespace kdn
