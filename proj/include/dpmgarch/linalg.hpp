#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "dpmgarch/errors.hpp"

namespace dpmgarch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Ridge added to a matrix whose plain Cholesky factorization failed.
inline constexpr double kPdRidge = 1e-10;

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Cholesky factorization with a single ridge retry. Returns nullopt when the
/// matrix is still not positive definite after adding kPdRidge * I.
template <typename Derived>
std::optional<Eigen::LLT<Matrix>> guarded_cholesky(const Eigen::MatrixBase<Derived>& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) return llt;
    Matrix ridged = m;
    ridged.diagonal().array() += kPdRidge;
    llt.compute(ridged);
    if (llt.info() == Eigen::Success) return llt;
    return std::nullopt;
}

/// Lower-triangular square-root factor L with L L' = m. This is the single
/// square-root convention used for H^{1/2} throughout the library.
template <typename Derived>
Matrix lower_sqrt(const Eigen::MatrixBase<Derived>& m, const std::string& what = "matrix") {
    auto llt = guarded_cholesky(m);
    if (!llt) throw NumericError(what + " is not positive definite");
    return llt->matrixL();
}

template <typename Derived>
double log_determinant_pd(const Eigen::MatrixBase<Derived>& m) {
    auto llt = guarded_cholesky(m);
    if (!llt) throw NumericError("log-determinant of a non positive definite matrix");
    return 2.0 * llt->matrixLLT().diagonal().array().log().sum();
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

template <typename Derived>
bool is_symmetric_pd(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
    return is_symmetric(m, tol) && min_eigenvalue(m) > tol;
}

/// Inverse of a symmetric positive definite matrix.
template <typename Derived>
Matrix inverse_pd(const Eigen::MatrixBase<Derived>& m) {
    auto llt = guarded_cholesky(m);
    if (!llt) throw NumericError("inverse of a non positive definite matrix");
    return llt->solve(Matrix::Identity(m.rows(), m.cols()));
}

/// log N_K(x | 0, precision^{-1}).
template <typename DerivedX, typename DerivedP>
double log_normal_density_precision(const Eigen::MatrixBase<DerivedX>& x,
                                    const Eigen::MatrixBase<DerivedP>& precision) {
    const double k = static_cast<double>(x.size());
    return -0.5 * (k * kLog2Pi - log_determinant_pd(precision) + x.dot(precision * x));
}

/// Symmetrize in place; Wishart products and sandwich forms drift by rounding.
template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
    m = (0.5 * (m + m.transpose())).eval();
}

}  // namespace dpmgarch
