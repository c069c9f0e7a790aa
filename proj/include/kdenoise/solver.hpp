#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "kdenoise/core.hpp"
#include "kdenoise/noise.hpp"

namespace kdn {

enum class SolverMode { DenseDirect, RandomizedSvd };

struct SolverPolicy {
    SolverMode mode = SolverMode::DenseDirect;
    int rank = 0; // randomized path; 0 means full min(rows, cols)
    int oversampling = 10;
    int power_iterations = 2;
    std::uint64_t seed = 7;
};

// Regularized regression instance: minimize |A x - y|^2 + theta |x|^2.
template <class Mat>
struct RidgeProblem {
    const Mat& A;
    const Eigen::VectorXd& y;
    double theta = 0.0;
};

struct SvdResult {
    Eigen::MatrixXd U;
    Eigen::VectorXd S;
    Eigen::MatrixXd V;
};

namespace detail {

inline Eigen::MatrixXd gaussian_random_matrix(Eigen::Index rows, Eigen::Index cols,
                                              std::uint64_t seed) {
    NoiseStream stream(NoiseModel{NoiseKind::Gaussian, 1.0, seed});
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = stream.next();
    return m;
}

inline Eigen::MatrixXd thin_q(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Densified A^T A for either dense or sparse design matrices.
inline Eigen::MatrixXd gram(const Eigen::MatrixXd& a) {
    return a.transpose() * a;
}
template <class Scalar, int Options>
Eigen::MatrixXd gram(const Eigen::SparseMatrix<Scalar, Options>& a) {
    Eigen::SparseMatrix<Scalar> g = a.transpose() * a;
    return Eigen::MatrixXd(g);
}

} // namespace detail

// Largest singular value by alternating power iteration on A^T A. The
// Rayleigh estimate is nondecreasing; iteration stops once its relative
// change falls below 1e-12 or the iteration budget is spent.
template <class Mat>
double spectral_norm(const Mat& a, int max_iterations = 200, std::uint64_t seed = 1) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    if (max_iterations < 1)
        throw std::invalid_argument("spectral_norm: iteration count must be positive");

    Eigen::VectorXd v = detail::gaussian_random_matrix(a.cols(), 1, seed);
    const double vn = v.norm();
    if (vn == 0.0) return 0.0;
    v /= vn;

    double sigma = 0.0;
    double prev = -1.0;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd w = a * v;
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        w /= wn;
        Eigen::VectorXd z = a.transpose() * w;
        sigma = z.norm();
        if (sigma == 0.0) return 0.0;
        v = z / sigma;
        if (prev >= 0.0 && std::abs(sigma - prev) <= 1e-12 * sigma) break;
        prev = sigma;
    }
    return sigma;
}

// Halko-Martinsson-Tropp range finder followed by an exact SVD of the small
// projected matrix. Deterministic for a fixed seed.
template <class Mat>
SvdResult randomized_svd(const Mat& a, int rank, int oversampling, int power_iterations,
                         std::uint64_t seed) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    const Eigen::Index min_dim = std::min(m, n);
    if (rank < 1 || rank > min_dim)
        throw std::invalid_argument("randomized_svd: rank must lie in [1, min(rows, cols)]");
    if (oversampling < 0 || power_iterations < 0)
        throw std::invalid_argument("randomized_svd: negative oversampling or power count");

    const Eigen::Index sketch = std::min<Eigen::Index>(rank + oversampling, min_dim);
    Eigen::MatrixXd omega = detail::gaussian_random_matrix(n, sketch, seed);
    Eigen::MatrixXd q = detail::thin_q(a * omega);
    for (int it = 0; it < power_iterations; ++it) {
        Eigen::MatrixXd z = detail::thin_q(a.transpose() * q);
        q = detail::thin_q(a * z);
    }

    Eigen::MatrixXd b = q.transpose() * a;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

    SvdResult out;
    out.U = q * svd.matrixU().leftCols(rank);
    out.S = svd.singularValues().head(rank);
    out.V = svd.matrixV().leftCols(rank);
    return out;
}

// Ridge coefficients from a precomputed SVD: V diag(s / (s^2 + theta)) U^T y.
inline Eigen::VectorXd ridge_from_svd(const SvdResult& svd, const Eigen::VectorXd& y,
                                      double theta) {
    Eigen::VectorXd uty = svd.U.transpose() * y;
    for (Eigen::Index i = 0; i < svd.S.size(); ++i) {
        const double denom = svd.S[i] * svd.S[i] + theta;
        uty[i] = denom > 0.0 ? svd.S[i] * uty[i] / denom : 0.0;
    }
    return svd.V * uty;
}

// Solves the theta-regularized least squares problem
//     x = (A^T A + theta I)^{-1} A^T y.
// The dense path factors the normal equations; the randomized path routes
// the same quantity through a truncated SVD of A.
template <class Mat>
Eigen::VectorXd ridge_solve(const Mat& a, const Eigen::VectorXd& y, double theta,
                            const SolverPolicy& policy = {}) {
    if (a.rows() != y.size())
        throw std::invalid_argument("ridge_solve: rhs length does not match matrix rows");
    if (theta < 0.0)
        throw std::invalid_argument("ridge_solve: theta must be nonnegative");

    if (policy.mode == SolverMode::RandomizedSvd) {
        const int min_dim = static_cast<int>(std::min(a.rows(), a.cols()));
        const int rank = policy.rank > 0 ? policy.rank : min_dim;
        SvdResult svd =
            randomized_svd(a, rank, policy.oversampling, policy.power_iterations, policy.seed);
        if (theta == 0.0 && svd.S.size() > 0 &&
            svd.S.minCoeff() <= 1e-13 * std::max(svd.S.maxCoeff(), 1.0))
            throw SingularSystemError("ridge_solve: singular system with theta = 0");
        return ridge_from_svd(svd, y, theta);
    }

    Eigen::MatrixXd normal = detail::gram(a);
    normal.diagonal().array() += theta;
    Eigen::LLT<Eigen::MatrixXd> llt(normal);
    if (llt.info() != Eigen::Success) {
        if (theta == 0.0)
            throw SingularSystemError("ridge_solve: normal equations singular at theta = 0");
        throw NumericError("ridge_solve: Cholesky factorization failed");
    }
    Eigen::VectorXd rhs = a.transpose() * y;
    Eigen::VectorXd x = llt.solve(rhs);

    if (theta == 0.0) {
        // LLT can slip through on numerically singular systems; verify.
        const double resid = (normal * x - rhs).norm();
        const double scale = normal.norm() * x.norm() + rhs.norm();
        if (!(resid <= 1e-8 * std::max(scale, 1e-300)) || !x.allFinite())
            throw SingularSystemError("ridge_solve: normal equations singular at theta = 0");
    }
    return x;
}

template <class Mat>
Eigen::VectorXd ridge_solve(const RidgeProblem<Mat>& problem, const SolverPolicy& policy = {}) {
    return ridge_solve(problem.A, problem.y, problem.theta, policy);
}

} // namespace kdn
