#pragma once

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <memory>

#include "rdr/point.hpp"

namespace rdr {

inline constexpr double kRankRelTol = 1e-12; // sigma_min > tol * sigma_max

/// Moore-Penrose application M^+ y = M^T (M M^T)^{-1} y for full-row-rank M
/// (m <= n).  The factorization of M M^T is built once at construction:
/// Cholesky, with an SVD fallback when the Cholesky factorization fails.
class PseudoInverse {
public:
    explicit PseudoInverse(Matrix M) : M_(std::move(M)) {
        const Index m = M_.rows(), n = M_.cols();
        if (m < 1 || n < 1 || m > n)
            throw DimensionMismatch("PseudoInverse: need 1 <= m <= n");
        if (!M_.allFinite()) throw NonFinite("PseudoInverse: non-finite matrix entry");

        Eigen::JacobiSVD<Matrix> svd(M_);
        const auto& sv = svd.singularValues();
        sigma_max_ = sv(0);
        sigma_min_ = sv(sv.size() - 1);
        if (!(sigma_min_ > kRankRelTol * sigma_max_))
            throw RankDeficient("PseudoInverse: matrix is not full row rank");

        Matrix gram = M_ * M_.transpose();
        llt_.compute(gram);
        if (llt_.info() != Eigen::Success) {
            gram_svd_ = std::make_unique<Eigen::JacobiSVD<Matrix>>(
                gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
        }
    }

    /// M^+ y; residual M (M^+ y) - y vanishes to machine precision for
    /// well-conditioned M.
    RealVec apply(const RealVec& y) const {
        if (y.size() != M_.rows())
            throw DimensionMismatch("PseudoInverse: rhs dimension mismatch");
        RealVec w = gram_svd_ ? RealVec(gram_svd_->solve(y)) : RealVec(llt_.solve(y));
        return M_.transpose() * w;
    }

    const Matrix& matrix() const { return M_; }
    double sigma_min() const { return sigma_min_; }
    double sigma_max() const { return sigma_max_; }

private:
    Matrix M_;
    Eigen::LLT<Matrix> llt_;
    std::unique_ptr<Eigen::JacobiSVD<Matrix>> gram_svd_;
    double sigma_min_ = 0.0, sigma_max_ = 0.0;
};

/// One-shot M^+ y.  Callers projecting repeatedly should hold a
/// PseudoInverse instead.
inline RealVec pinv_apply(const Matrix& M, const RealVec& y) {
    return PseudoInverse(M).apply(y);
}

inline Point pinv_apply(const Matrix& M, const Point& y) {
    return Point(pinv_apply(M, y.reals()));
}

/// Orthonormal basis of the column space of A, rank decided by a relative
/// singular-value cutoff.  Returns an n x r matrix (r may be 0).
inline Matrix orthonormal_columns(const Matrix& A, double rel_tol = kRankRelTol * 1e3) {
    if (A.cols() == 0) return Matrix(A.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1e-300);
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return svd.matrixU().leftCols(r);
}

/// Orthonormal basis of ker(A) = {x : A x = 0}.  Returns an n x k matrix.
inline Matrix kernel_basis(const Matrix& A, double rel_tol = kRankRelTol * 1e3) {
    const Index n = A.cols();
    if (A.rows() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cutoff = rel_tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1e-300);
    Index r = 0;
    while (r < sv.size() && sv(r) > cutoff) ++r;
    return svd.matrixV().rightCols(n - r);
}

} // namespace rdr
