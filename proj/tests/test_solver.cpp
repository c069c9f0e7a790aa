#include <doctest.h>

#include <Eigen/Dense>

#include "kdenoise/noise.hpp"
#include "kdenoise/solver.hpp"

using namespace kdn;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    NoiseStream stream(NoiseModel{NoiseKind::Gaussian, 1.0, seed});
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = stream.next();
    return m;
}

Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
    return random_matrix(n, 1, seed);
}

// Brute-force oracle: explicit normal-equation inverse.
Eigen::VectorXd ridge_oracle(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double theta) {
    Eigen::MatrixXd normal = a.transpose() * a;
    normal.diagonal().array() += theta;
    return normal.inverse() * (a.transpose() * y);
}

} // namespace

TEST_CASE("identity design with theta zero returns the data") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd y = random_vector(3, 5);
    const Eigen::VectorXd x = ridge_solve(a, y, 0.0);
    CHECK((x - y).norm() <= 1e-14 * y.norm());
}

TEST_CASE("scalar ridge: ([1], theta=1, y=2) -> 1") {
    Eigen::MatrixXd a(1, 1);
    a(0, 0) = 1.0;
    Eigen::VectorXd y(1);
    y[0] = 2.0;
    const Eigen::VectorXd x = ridge_solve(a, y, 1.0);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("dense path matches the explicit normal-equation inverse") {
    const Eigen::MatrixXd a = random_matrix(8, 5, 17);
    const Eigen::VectorXd y = random_vector(8, 18);
    const Eigen::VectorXd x = ridge_solve(a, y, 0.1);
    const Eigen::VectorXd want = ridge_oracle(a, y, 0.1);
    CHECK((x - want).norm() <= 1e-10 * want.norm());
}

TEST_CASE("ridge_solve accepts the problem wrapper and sparse designs") {
    const Eigen::MatrixXd a = random_matrix(12, 6, 21);
    const Eigen::VectorXd y = random_vector(12, 22);
    const RidgeProblem<Eigen::MatrixXd> prob{a, y, 0.05};
    const Eigen::VectorXd dense = ridge_solve(prob);

    Eigen::SparseMatrix<double, Eigen::RowMajor> sp = a.sparseView();
    const Eigen::VectorXd sparse = ridge_solve(sp, y, 0.05);
    CHECK((dense - sparse).norm() <= 1e-12 * dense.norm());
}

TEST_CASE("normal-equation residual stays within the contract") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const Eigen::MatrixXd a = random_matrix(40, 12, seed);
        const Eigen::VectorXd y = random_vector(40, seed + 100);
        const double theta = 0.3;
        const Eigen::VectorXd x = ridge_solve(a, y, theta);
        Eigen::MatrixXd normal = a.transpose() * a;
        normal.diagonal().array() += theta;
        const double resid = (normal * x - (a.transpose() * y)).norm();
        CHECK(resid <= 1e-10 * (normal.norm() + theta) * x.norm());
    }
}

TEST_CASE("coefficient norm shrinks as theta grows") {
    const Eigen::MatrixXd a = random_matrix(30, 10, 9);
    const Eigen::VectorXd y = random_vector(30, 10);
    double prev = std::numeric_limits<double>::infinity();
    for (double theta : {1e-4, 1e-2, 1.0, 1e2, 1e4}) {
        const double n = ridge_solve(a, y, theta).norm();
        CHECK(n <= prev + 1e-12);
        prev = n;
    }
}

TEST_CASE("huge theta collapses the solution like |A^T y| / theta") {
    const Eigen::MatrixXd a = random_matrix(25, 7, 30);
    const Eigen::VectorXd y = random_vector(25, 31);
    const double theta = 1e9;
    const Eigen::VectorXd x = ridge_solve(a, y, theta);
    CHECK(x.norm() <= (a.transpose() * y).norm() / theta);
}

TEST_CASE("randomized path at full rank matches the dense path") {
    for (auto [m, n] : {std::pair{120, 40}, std::pair{60, 80}, std::pair{200, 90}}) {
        const Eigen::MatrixXd a = random_matrix(m, n, static_cast<std::uint64_t>(m * n));
        const Eigen::VectorXd y = random_vector(m, 999);
        const double theta = 0.2;
        const Eigen::VectorXd direct = ridge_solve(a, y, theta);

        SolverPolicy policy;
        policy.mode = SolverMode::RandomizedSvd;
        policy.rank = std::min(m, n);
        policy.power_iterations = 2;
        const Eigen::VectorXd randomized = ridge_solve(a, y, theta, policy);
        CHECK((randomized - direct).norm() <= 1e-8 * direct.norm());
    }
}

TEST_CASE("truncated randomized svd captures a low-rank design") {
    const int rank = 6;
    const Eigen::MatrixXd a = random_matrix(80, rank, 3) * random_matrix(rank, 50, 4);
    const SvdResult svd = randomized_svd(a, rank, 10, 2, 42);
    const Eigen::MatrixXd approx =
        svd.U * svd.S.asDiagonal() * svd.V.transpose();
    CHECK((approx - a).norm() <= 1e-9 * a.norm());
}

TEST_CASE("spectral norm: diagonal, identity, and the SVD oracle") {
    Eigen::MatrixXd d = Eigen::VectorXd{{3.0, 1.0, 0.5}}.asDiagonal();
    CHECK(spectral_norm(d, 300, 1) == doctest::Approx(3.0).epsilon(1e-9));

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(5, 5);
    CHECK(spectral_norm(id, 300, 1) == doctest::Approx(1.0).epsilon(1e-12));

    const Eigen::MatrixXd a = random_matrix(20, 7, 77);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const double want = svd.singularValues()[0];
    CHECK(spectral_norm(a, 500, 3) == doctest::Approx(want).epsilon(1e-6));

    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 6);
    CHECK(spectral_norm(zero, 50, 1) == 0.0);
}

TEST_CASE("spectral norm estimates are nondecreasing in the budget") {
    const Eigen::MatrixXd a = random_matrix(30, 30, 8);
    double prev = 0.0;
    for (int iters : {1, 2, 4, 8, 32, 128}) {
        const double s = spectral_norm(a, iters, 4);
        CHECK(s >= prev - 1e-13 * s);
        prev = s;
    }
}

TEST_CASE("solver error contracts") {
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(4, 4);
    const Eigen::VectorXd y = random_vector(4, 1);
    CHECK_THROWS_AS(ridge_solve(zero, y, 0.0), SingularSystemError);

    const Eigen::MatrixXd a = random_matrix(6, 3, 2);
    CHECK_THROWS_AS(ridge_solve(a, y, 0.1), std::invalid_argument); // length mismatch

    const Eigen::VectorXd y6 = random_vector(6, 3);
    CHECK_THROWS_AS(ridge_solve(a, y6, -1.0), std::invalid_argument);

    SolverPolicy policy;
    policy.mode = SolverMode::RandomizedSvd;
    policy.rank = 10; // exceeds min(6, 3)
    CHECK_THROWS_AS(ridge_solve(a, y6, 0.1, policy), std::invalid_argument);

    // rank-deficient system with theta = 0 through the randomized path
    Eigen::MatrixXd low = random_matrix(8, 2, 5) * random_matrix(2, 5, 6);
    SolverPolicy full;
    full.mode = SolverMode::RandomizedSvd;
    CHECK_THROWS_AS(ridge_solve(low, random_vector(8, 7), 0.0, full), SingularSystemError);
}
