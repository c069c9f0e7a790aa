#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "kdenoise/bandwidth.hpp"
#include "kdenoise/image.hpp"
#include "kdenoise/kernels.hpp"
#include "kdenoise/solver.hpp"

namespace kdn {

enum class RkhsKernelKind { Gaussian, Diffusion };

// Everything tunable about a denoise run. Defaults follow the constant
// parameter policy used in the experiments.
struct DenoiseConfig {
    int eta2 = 8;   // bandwidth selector for the RKHS kernel
    int eta3 = 4;   // bandwidth selector for the Markov averaging operator
    int eta_g = 0;  // selector for the data smoothing matrix; 0 follows eta3
    int stride = 1; // subgrid stride; 1 keeps the full lattice, s > 1 subsamples
    double theta_factor = 0.01;
    double eps_zero = 1e-14;
    RkhsKernelKind kernel = RkhsKernelKind::Diffusion;
    SolverPolicy solver{};
    // patch cover geometry, in pixels
    int tile = 64;
    int overlap = 16;
    double delta1 = 1.0;

    int effective_eta_g() const { return eta_g > 0 ? eta_g : eta3; }

    void validate() const {
        if (eta2 < 2) throw std::invalid_argument("DenoiseConfig: eta2 must be at least 2");
        if (eta3 < 2) throw std::invalid_argument("DenoiseConfig: eta3 must be at least 2");
        if (eta_g != 0 && eta_g < 2)
            throw std::invalid_argument("DenoiseConfig: eta_g must be 0 or at least 2");
        if (stride < 1) throw std::invalid_argument("DenoiseConfig: stride must be at least 1");
        if (!(theta_factor > 0.0))
            throw std::invalid_argument("DenoiseConfig: theta_factor must be positive");
        if (!(eps_zero > 0.0) || !(eps_zero < 1.0))
            throw std::invalid_argument("DenoiseConfig: eps_zero must lie in (0,1)");
        if (overlap < 1 || tile <= overlap)
            throw std::invalid_argument("DenoiseConfig: need tile > overlap >= 1");
        if (!(delta1 > 0.0))
            throw std::invalid_argument("DenoiseConfig: delta1 must be positive");
    }
};

// The three matrices of the per-patch filter: data smoother G, averaging
// operator P (both row-stochastic), and the RKHS kernel sections K over the
// subgrid columns.
struct FilterOperators {
    SparseKernelMatrix G;
    SparseKernelMatrix P;
    SparseKernelMatrix K;
    std::vector<Point2> subgrid;
    std::vector<int> subgrid_index; // flattened pixel index of each subgrid point
    double delta_g = 0.0;
    double delta3 = 0.0;
    double delta2 = 0.0;
};

struct DenoiseDiagnostics {
    double theta = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double delta_g = 0.0;
    double kernel_norm = 0.0;        // spectral norm of K
    double condition_estimate = 0.0; // (|W|^2 + theta) / theta for W = P K
    long n_pixels = 0;
    long subgrid_size = 0;
};

struct DenoiseResult {
    Eigen::VectorXd coefficients;
    GrayscaleImage denoised;
    DenoiseDiagnostics diagnostics;
};

// Flattened indices of every stride-th pixel per axis, anchored at
// offset stride/2 so the subgrid sits symmetrically in the patch.
inline std::vector<int> subgrid_indices(int rows, int cols, int stride) {
    if (stride < 1) throw std::invalid_argument("subgrid_indices: stride must be at least 1");
    const int off = stride / 2;
    std::vector<int> idx;
    for (int i = off; i < rows; i += stride)
        for (int j = off; j < cols; j += stride)
            idx.push_back(i * cols + j);
    return idx;
}

// Builds G, P and K for a patch geometry. Only pixel locations matter here;
// the grayscale values enter later.
inline FilterOperators build_operators(const GrayscaleImage& patch, const DenoiseConfig& cfg) {
    cfg.validate();
    const std::vector<Point2> pts = patch.pixel_centers();
    const double h = patch.pixel_spacing();

    FilterOperators ops;
    ops.delta_g = select_bandwidth(cfg.effective_eta_g(), h, cfg.eps_zero);
    ops.G = markov_normalize(gaussian_matrix(pts, pts, ops.delta_g, cfg.eps_zero));
    ops.delta3 = select_bandwidth(cfg.eta3, h, cfg.eps_zero);
    ops.P = markov_normalize(gaussian_matrix(pts, pts, ops.delta3, cfg.eps_zero));

    ops.subgrid_index = subgrid_indices(patch.rows(), patch.cols(), cfg.stride);
    if (ops.subgrid_index.empty())
        throw std::invalid_argument("build_operators: stride leaves no subgrid points");
    ops.subgrid.reserve(ops.subgrid_index.size());
    for (int idx : ops.subgrid_index) ops.subgrid.push_back(pts[idx]);

    ops.delta2 = select_bandwidth(cfg.eta2, h, cfg.eps_zero);
    if (cfg.kernel == RkhsKernelKind::Gaussian) {
        ops.K = kernel_cross_matrix(pts, ops.subgrid, GaussianKernel{ops.delta2}, cfg.eps_zero);
    } else {
        DiffusionGeometry geom(pts, ops.delta2, cfg.eps_zero);
        ops.K = kernel_cross_matrix(pts, ops.subgrid, geom, cfg.eps_zero);
    }
    for (int i = 0; i < ops.K.rows(); ++i) {
        if (ops.K.row_nonzeros(i) == 0)
            throw std::invalid_argument(
                "build_operators: pixel " + std::to_string(i) +
                " sees no subgrid point; raise eta2 or lower the stride");
    }
    return ops;
}

// Reusable patch engine. The operators and the normal-equation
// factorization depend only on the patch geometry and configuration, so one
// instance serves every patch of the same shape. apply() is const and safe
// to call concurrently.
class PatchDenoiser {
public:
    PatchDenoiser(int rows, int cols, double length, double width, const DenoiseConfig& cfg)
        : cfg_(cfg), rows_(rows), cols_(cols), length_(length), width_(width),
          ops_(build_operators(GrayscaleImage(rows, cols, length, width), cfg)) {
        design_ = ops_.P.matrix() * ops_.K.matrix();

        diag_.kernel_norm = spectral_norm(ops_.K.matrix(), 300, cfg_.solver.seed);
        theta_ = cfg_.theta_factor * diag_.kernel_norm;
        if (!(theta_ > 0.0))
            throw NumericError("PatchDenoiser: theta collapsed to zero");

        if (cfg_.solver.mode == SolverMode::RandomizedSvd) {
            const int min_dim = static_cast<int>(std::min(design_.rows(), design_.cols()));
            const int rank = cfg_.solver.rank > 0 ? cfg_.solver.rank : min_dim;
            svd_ = randomized_svd(design_, rank, cfg_.solver.oversampling,
                                  cfg_.solver.power_iterations, cfg_.solver.seed);
            const double wmax = svd_.S.size() > 0 ? svd_.S[0] : 0.0;
            diag_.condition_estimate = (wmax * wmax + theta_) / theta_;
        } else {
            Eigen::MatrixXd normal = Eigen::MatrixXd(
                Eigen::SparseMatrix<double>(design_.transpose() * design_));
            normal.diagonal().array() += theta_;
            llt_.compute(normal);
            if (llt_.info() != Eigen::Success)
                throw NumericError("PatchDenoiser: normal-equation factorization failed");
            const double wnorm = spectral_norm(design_, 300, cfg_.solver.seed);
            diag_.condition_estimate = (wnorm * wnorm + theta_) / theta_;
        }

        diag_.theta = theta_;
        diag_.delta2 = ops_.delta2;
        diag_.delta3 = ops_.delta3;
        diag_.delta_g = ops_.delta_g;
        diag_.n_pixels = static_cast<long>(rows_) * cols_;
        diag_.subgrid_size = static_cast<long>(ops_.subgrid.size());
    }

    const FilterOperators& operators() const { return ops_; }
    const DenoiseDiagnostics& diagnostics() const { return diag_; }
    double theta() const { return theta_; }

    // Solves  a = (K^T P^T P K + theta I)^{-1} K^T P^T (P G z)  and
    // reconstructs the patch as K a. Linear in the input values.
    DenoiseResult apply(const GrayscaleImage& patch) const {
        if (patch.rows() != rows_ || patch.cols() != cols_)
            throw std::invalid_argument("PatchDenoiser::apply: patch shape mismatch");

        const Eigen::Map<const Eigen::VectorXd> z(patch.values().data(),
                                                  static_cast<Eigen::Index>(patch.pixel_count()));
        const Eigen::VectorXd smoothed = ops_.P.matrix() * (ops_.G.matrix() * z);

        Eigen::VectorXd coef;
        if (cfg_.solver.mode == SolverMode::RandomizedSvd) {
            coef = ridge_from_svd(svd_, smoothed, theta_);
        } else {
            coef = llt_.solve(design_.transpose() * smoothed);
        }

        const Eigen::VectorXd reconstructed = ops_.K.matrix() * coef;
        GrayscaleImage out(rows_, cols_, length_, width_,
                           std::vector<double>(reconstructed.data(),
                                               reconstructed.data() + reconstructed.size()));

        DenoiseResult res{std::move(coef), std::move(out), diag_};
        return res;
    }

private:
    DenoiseConfig cfg_;
    int rows_, cols_;
    double length_, width_;
    FilterOperators ops_;
    Eigen::SparseMatrix<double, Eigen::RowMajor> design_; // W = P K
    double theta_ = 0.0;
    DenoiseDiagnostics diag_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    SvdResult svd_;
};

inline DenoiseResult denoise_patch(const GrayscaleImage& patch, const DenoiseConfig& cfg) {
    return PatchDenoiser(patch.rows(), patch.cols(), patch.length(), patch.width(), cfg)
        .apply(patch);
}

// Residual of a row-stochastic averaging matrix applied to a noise vector;
// with uniform column weights this equals (1/N) sum_n p(x_j, x_n) y_n.
inline Eigen::VectorXd noise_residual(const SparseKernelMatrix& p, const Eigen::VectorXd& y) {
    if (y.size() != p.cols())
        throw std::invalid_argument("noise_residual: vector length does not match matrix");
    return p.matrix() * y;
}

} // namespace kdn
