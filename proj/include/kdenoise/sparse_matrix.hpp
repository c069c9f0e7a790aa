#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "kdenoise/core.hpp"

namespace kdn {

// How the rows of a kernel matrix were normalized.
enum class RowKind {
    Raw,                // truncated kernel values as evaluated
    Markov,             // every row sums to 1
    Diffusion,          // doubly degree-normalized
    DiffusionSymmetric, // degree-normalized and symmetrized
};

// Truncated kernel matrix. Entries whose underlying Gaussian factor falls
// below eps_zero are never stored; normalization happens after truncation.
class SparseKernelMatrix {
public:
    using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    SparseKernelMatrix() = default;

    SparseKernelMatrix(Matrix mat, double eps_zero, RowKind kind)
        : mat_(std::move(mat)), eps_zero_(eps_zero), kind_(kind) {
        mat_.makeCompressed();
    }

    static SparseKernelMatrix from_triplets(int rows, int cols,
                                            const std::vector<Eigen::Triplet<double>>& entries,
                                            double eps_zero, RowKind kind = RowKind::Raw) {
        Matrix m(rows, cols);
        m.setFromTriplets(entries.begin(), entries.end());
        return SparseKernelMatrix(std::move(m), eps_zero, kind);
    }

    int rows() const { return static_cast<int>(mat_.rows()); }
    int cols() const { return static_cast<int>(mat_.cols()); }
    double eps_zero() const { return eps_zero_; }
    RowKind kind() const { return kind_; }
    long nonzeros() const { return static_cast<long>(mat_.nonZeros()); }

    const Matrix& matrix() const { return mat_; }

    double coeff(int i, int j) const { return mat_.coeff(i, j); }

    double row_sum(int i) const {
        double s = 0.0;
        for (Matrix::InnerIterator it(mat_, i); it; ++it) s += it.value();
        return s;
    }

    int row_nonzeros(int i) const {
        int n = 0;
        for (Matrix::InnerIterator it(mat_, i); it; ++it) ++n;
        return n;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
        if (v.size() != mat_.cols())
            throw std::invalid_argument("SparseKernelMatrix::apply: dimension mismatch");
        return mat_ * v;
    }

private:
    Matrix mat_;
    double eps_zero_ = 0.0;
    RowKind kind_ = RowKind::Raw;
};

// Degree functions of the diffusion normalization, tabulated at the
// reference points, with the symmetrizer rho_i = sqrt(deg_l_i / deg_r_i).
struct DegreeVectors {
    Eigen::VectorXd deg_r;
    Eigen::VectorXd deg_l;
    Eigen::VectorXd rho;
};

} // namespace kdn
