#pragma once

// Matrix-analysis kernel: metrics, weighted and logarithmic norms, Schur
// complements, pseudo-inverses and quadratic-matrix-inequality membership.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ddc {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative tolerance of the PSD test: S is PSD iff
/// lambda_min(S) >= -kPsdTolerance * max(1, ||S||_2).
inline constexpr double kPsdTolerance = 1e-9;
/// Allowed asymmetry for inputs that must be symmetric.
inline constexpr double kSymmetryTolerance = 1e-10;

template <typename Derived>
typename Derived::Scalar asymmetry(const Eigen::MatrixBase<Derived>& S) {
    return (S - S.transpose()).cwiseAbs().maxCoeff();
}

template <typename Derived>
MatrixX<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& S) {
    return (S + S.transpose()) / typename Derived::Scalar(2);
}

/// Extreme eigenvalues (lambda_min, lambda_max) of a symmetric matrix.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> eig_extremes(const Eigen::MatrixBase<Derived>& S) {
    using T = typename Derived::Scalar;
    if (S.rows() != S.cols() || S.rows() == 0) throw std::invalid_argument("eig_extremes: matrix must be square");
    const T scale = std::max(T(1), S.cwiseAbs().maxCoeff());
    if (asymmetry(S) > T(kSymmetryTolerance) * scale) {
        throw std::invalid_argument("eig_extremes: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<MatrixX<T>> es(symmetrize(S), Eigen::EigenvaluesOnly);
    return {es.eigenvalues()(0), es.eigenvalues()(S.rows() - 1)};
}

template <typename Derived>
typename Derived::Scalar lambda_max(const Eigen::MatrixBase<Derived>& S) {
    return eig_extremes(S).second;
}

template <typename Derived>
typename Derived::Scalar lambda_min(const Eigen::MatrixBase<Derived>& S) {
    return eig_extremes(S).first;
}

template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& M) {
    using T = typename Derived::Scalar;
    if (M.size() == 0) return T(0);
    Eigen::JacobiSVD<MatrixX<T>> svd(M);
    return svd.singularValues()(0);
}

template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& S) {
    using T = typename Derived::Scalar;
    const auto [lo, hi] = eig_extremes(S);
    const T norm = std::max(std::abs(lo), std::abs(hi));
    return lo >= -T(kPsdTolerance) * std::max(T(1), norm);
}

/// Moore-Penrose pseudo-inverse via SVD with the usual rank cut-off
/// eps * max(rows, cols) * sigma_max.
template <typename Derived>
MatrixX<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& M) {
    using T = typename Derived::Scalar;
    MatrixX<T> result = MatrixX<T>::Zero(M.cols(), M.rows());
    if (M.size() == 0) return result;
    Eigen::JacobiSVD<MatrixX<T>> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const T cutoff = std::numeric_limits<T>::epsilon() * T(std::max(M.rows(), M.cols())) * (sv.size() ? sv(0) : T(0));
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > T(0)) {
            result.noalias() += (svd.matrixV().col(i) / sv(i)) * svd.matrixU().col(i).transpose();
        }
    }
    return result;
}

/// Symmetric positive-definite weighting matrix P together with its square
/// root factors.
template <typename Scalar>
class BasicMetric {
public:
    using Matrix = MatrixX<Scalar>;

    explicit BasicMetric(const Matrix& P) : P_(P) {
        if (P.rows() != P.cols() || P.rows() == 0) throw std::invalid_argument("Metric: P must be square");
        const Scalar scale = std::max(Scalar(1), P.cwiseAbs().maxCoeff());
        if (asymmetry(P) > Scalar(kSymmetryTolerance) * scale) throw std::invalid_argument("Metric: P is not symmetric");
        Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(P));
        const auto& ev = es.eigenvalues();
        lmin_ = ev(0);
        lmax_ = ev(ev.size() - 1);
        if (!(lmax_ > Scalar(0)) || lmin_ <= Scalar(1e-12) * lmax_) {
            throw std::invalid_argument("Metric: P is not positive definite");
        }
        const auto& V = es.eigenvectors();
        sqrt_ = V * ev.cwiseSqrt().asDiagonal() * V.transpose();
        inv_sqrt_ = V * ev.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();
        inv_ = V * ev.cwiseInverse().asDiagonal() * V.transpose();
    }
    static BasicMetric identity(int n) { return BasicMetric(Matrix::Identity(n, n)); }

    int dim() const { return static_cast<int>(P_.rows()); }
    const Matrix& matrix() const { return P_; }
    const Matrix& sqrt() const { return sqrt_; }
    const Matrix& inv_sqrt() const { return inv_sqrt_; }
    const Matrix& inverse() const { return inv_; }
    Scalar lambda_min() const { return lmin_; }
    Scalar lambda_max() const { return lmax_; }
    Scalar condition() const { return lmax_ / lmin_; }

private:
    Matrix P_, sqrt_, inv_sqrt_, inv_;
    Scalar lmin_{}, lmax_{};
};

using Metric = BasicMetric<double>;

enum class NormKind { One, Two, Inf };

/// ||P^{1/2} x||_p.
template <typename Derived, typename Scalar>
Scalar weighted_norm(const Eigen::MatrixBase<Derived>& x, const BasicMetric<Scalar>& P, NormKind p) {
    if (x.size() != P.dim()) throw std::invalid_argument("weighted_norm: dimension mismatch");
    const VectorX<Scalar> y = P.sqrt() * x;
    switch (p) {
        case NormKind::One: return y.template lpNorm<1>();
        case NormKind::Inf: return y.template lpNorm<Eigen::Infinity>();
        case NormKind::Two: break;
    }
    return y.norm();
}

/// Weighted Euclidean log norm mu_{2,P^{1/2}}(A), evaluated on the symmetric
/// matrix (P^{1/2} A P^{-1/2} + P^{-1/2} A^T P^{1/2}) / 2, which is similar to
/// (P A P^{-1} + A^T) / 2.
template <typename Derived, typename Scalar>
Scalar lognorm2_weighted(const Eigen::MatrixBase<Derived>& A, const BasicMetric<Scalar>& P) {
    if (A.rows() != A.cols() || A.rows() != P.dim()) throw std::invalid_argument("lognorm2_weighted: dimension mismatch");
    const MatrixX<Scalar> S = P.sqrt() * A * P.inv_sqrt();
    return lambda_max(symmetrize(S));
}

/// Symmetric (n+m)x(n+m) matrix partitioned after row/column n.
template <typename Scalar>
class BasicPartitionedSym {
public:
    using Matrix = MatrixX<Scalar>;

    BasicPartitionedSym(Matrix A, int split) : A_(std::move(A)), split_(split) {
        if (A_.rows() != A_.cols()) throw std::invalid_argument("PartitionedSym: matrix must be square");
        if (split_ <= 0 || split_ >= A_.rows()) throw std::invalid_argument("PartitionedSym: split out of range");
        const Scalar scale = std::max(Scalar(1), A_.cwiseAbs().maxCoeff());
        if (asymmetry(A_) > Scalar(kSymmetryTolerance) * scale) {
            throw std::invalid_argument("PartitionedSym: matrix is not symmetric");
        }
    }

    const Matrix& matrix() const { return A_; }
    int split() const { return split_; }
    int size() const { return static_cast<int>(A_.rows()); }
    int lower_size() const { return size() - split_; }

    Matrix a11() const { return A_.topLeftCorner(split_, split_); }
    Matrix a12() const { return A_.topRightCorner(split_, lower_size()); }
    Matrix a21() const { return A_.bottomLeftCorner(lower_size(), split_); }
    Matrix a22() const { return A_.bottomRightCorner(lower_size(), lower_size()); }

private:
    Matrix A_;
    int split_;
};

using PartitionedSym = BasicPartitionedSym<double>;

/// A | A22 = A11 - A12 A22^+ A21.
template <typename Scalar>
MatrixX<Scalar> schur_complement(const BasicPartitionedSym<Scalar>& A) {
    return symmetrize(MatrixX<Scalar>(A.a11() - A.a12() * pinv(A.a22()) * A.a21()));
}

/// Z in Z(A): [I; Z]^T A [I; Z] >= -tol I with tol = 1e-9 ||A||_2.
template <typename Derived, typename Scalar>
bool qmi_membership(const Eigen::MatrixBase<Derived>& Z, const BasicPartitionedSym<Scalar>& A) {
    const int n = A.split();
    if (Z.cols() != n || Z.rows() != A.lower_size()) throw std::invalid_argument("qmi_membership: dimension mismatch");
    MatrixX<Scalar> stack(A.size(), n);
    stack.topRows(n).setIdentity();
    stack.bottomRows(A.lower_size()) = Z;
    const MatrixX<Scalar> Q = symmetrize(MatrixX<Scalar>(stack.transpose() * A.matrix() * stack));
    const Scalar tol = Scalar(kPsdTolerance) * spectral_norm(A.matrix());
    return lambda_min(Q) >= -tol;
}

}  // namespace ddc
