#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ddc/matan.hpp"
#include "ddc/rng.hpp"

#include <Eigen/Eigenvalues>

using namespace ddc;

namespace {

Eigen::MatrixXd random_matrix(SplitMix64& rng, int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
    return M;
}

Metric random_metric(SplitMix64& rng, int n) {
    const Eigen::MatrixXd R = random_matrix(rng, n, n);
    return Metric(R * R.transpose() + 0.2 * Eigen::MatrixXd::Identity(n, n));
}

Eigen::Vector2d v2(double a, double b) { return Eigen::Vector2d(a, b); }

}  // namespace

TEST_CASE("weighted norms") {
    CHECK(weighted_norm(v2(3, 4), Metric::identity(2), NormKind::Two) == doctest::Approx(5.0));
    const Metric P(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix());
    CHECK(weighted_norm(v2(1, 0), P, NormKind::Two) == doctest::Approx(2.0));
    CHECK(weighted_norm(v2(1, 1), P, NormKind::Inf) == doctest::Approx(2.0));
    CHECK(weighted_norm(v2(1, 1), P, NormKind::One) == doctest::Approx(3.0));
    CHECK_THROWS(weighted_norm(Eigen::Vector3d(1, 1, 1), P, NormKind::Two));
}

TEST_CASE("metric rejects non-PD input") {
    Eigen::Matrix2d bad;
    bad << 1, 0, 0, -1;
    CHECK_THROWS(Metric(Eigen::MatrixXd(bad)));
    Eigen::Matrix2d singular;
    singular << 1, 1, 1, 1;
    CHECK_THROWS(Metric(Eigen::MatrixXd(singular)));
    Eigen::Matrix2d asym;
    asym << 2, 1, 0, 2;
    CHECK_THROWS(Metric(Eigen::MatrixXd(asym)));
}

TEST_CASE("lognorm hand cases") {
    CHECK(lognorm2_weighted(-Eigen::MatrixXd::Identity(3, 3), Metric::identity(3)) == doctest::Approx(-1.0));
    Eigen::Matrix3d S;
    S << 0, 1, -2, -1, 0, 3, 2, -3, 0;
    CHECK(std::abs(lognorm2_weighted(Eigen::MatrixXd(S), Metric::identity(3))) < 1e-12);
    Eigen::Matrix2d A;
    A << 0, 1, 0, 0;
    const Metric P(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix());
    CHECK(lognorm2_weighted(Eigen::MatrixXd(A), P) == doctest::Approx(1.0));
}

TEST_CASE("lognorm matches an LMI bisection oracle") {
    // Smallest b with P A + A^T P <= 2 b P, found by bisection on PSD tests.
    SplitMix64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 3;
        const Eigen::MatrixXd A = random_matrix(rng, n, n);
        const Metric P = random_metric(rng, n);
        double lo = -10.0, hi = 10.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Eigen::MatrixXd L = 2.0 * mid * P.matrix() - P.matrix() * A - A.transpose() * P.matrix();
            if (Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L).eigenvalues().minCoeff() >= 0.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        CHECK(lognorm2_weighted(A, P) == doctest::Approx(hi).epsilon(1e-8));
    }
}

TEST_CASE("lognorm translation, subadditivity and the P = I reduction") {
    SplitMix64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 5;
        const Eigen::MatrixXd A = random_matrix(rng, n, n);
        const Eigen::MatrixXd B = random_matrix(rng, n, n);
        const Metric P = random_metric(rng, n);
        const double c = rng.uniform(-3.0, 3.0);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        CHECK(std::abs(lognorm2_weighted(Eigen::MatrixXd(A + c * I), P) - lognorm2_weighted(A, P) - c) <= 1e-9);
        CHECK(lognorm2_weighted(Eigen::MatrixXd(A + B), P) <= lognorm2_weighted(A, P) + lognorm2_weighted(B, P) + 1e-9);
        const double direct =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (A + A.transpose())).eigenvalues().maxCoeff();
        CHECK(std::abs(lognorm2_weighted(A, Metric::identity(n)) - direct) <= 1e-12);
    }
}

TEST_CASE("asymmetric form (P A P^-1 + A^T) / 2 has the same spectrum") {
    SplitMix64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + trial % 4;
        const Eigen::MatrixXd A = random_matrix(rng, n, n);
        const Metric P = random_metric(rng, n);
        const Eigen::MatrixXd W = 0.5 * (P.matrix() * A * P.inverse() + A.transpose());
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(W).eigenvalues();
        double top = -1e300;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            CHECK(std::abs(ev(i).imag()) <= 1e-8);
            top = std::max(top, ev(i).real());
        }
        CHECK(std::abs(top - lognorm2_weighted(A, P)) <= 1e-8);
    }
}

TEST_CASE("schur complement hand cases") {
    Eigen::Matrix2d A;
    A << 4, 2, 2, 2;
    CHECK(schur_complement(PartitionedSym(A, 1))(0, 0) == doctest::Approx(2.0));

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    D(0, 0) = 5;
    D(1, 1) = -1;
    D(2, 2) = -2;
    CHECK(schur_complement(PartitionedSym(D, 1))(0, 0) == doctest::Approx(5.0));

    Eigen::Matrix2d S;
    S << 1, 1, 1, 0;
    CHECK(schur_complement(PartitionedSym(S, 1))(0, 0) == doctest::Approx(1.0));

    CHECK_THROWS(PartitionedSym(Eigen::MatrixXd::Identity(2, 2), 0));
    CHECK_THROWS(PartitionedSym(Eigen::MatrixXd::Identity(2, 2), 2));
    Eigen::Matrix2d asym;
    asym << 1, 2, 0, 1;
    CHECK_THROWS(PartitionedSym(asym, 1));
}

TEST_CASE("pseudo-inverse hand cases") {
    const Eigen::MatrixXd Dg = Eigen::Vector2d(2, 0).asDiagonal();
    const Eigen::MatrixXd Pi = pinv(Dg);
    CHECK(Pi(0, 0) == doctest::Approx(0.5));
    CHECK(Pi(1, 1) == 0.0);

    Eigen::MatrixXd B(4, 2);
    B << 0, 0, 0, 0, 1, 0, 0, 1;
    CHECK((pinv(B) * B).isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("Penrose identities on random and rank-deficient matrices") {
    SplitMix64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int r = 1 + trial % 5, c = 1 + (trial / 5) % 5;
        Eigen::MatrixXd M = random_matrix(rng, r, c);
        if (trial % 3 == 0 && std::min(r, c) > 1) {
            const int k = 1 + trial % (std::min(r, c) - 1);
            M = random_matrix(rng, r, k) * random_matrix(rng, k, c);
        }
        const Eigen::MatrixXd X = pinv(M);
        CHECK((M * X * M - M).norm() <= 1e-9);
        CHECK((X * M * X - X).norm() <= 1e-9);
        CHECK(((M * X).transpose() - M * X).norm() <= 1e-9);
        CHECK(((X * M).transpose() - X * M).norm() <= 1e-9);
    }
}

TEST_CASE("eig_extremes and PSD test") {
    const auto [lo, hi] = eig_extremes(Eigen::MatrixXd(Eigen::Vector2d(-3, 5).asDiagonal()));
    CHECK(lo == doctest::Approx(-3.0));
    CHECK(hi == doctest::Approx(5.0));
    Eigen::Matrix2d asym;
    asym << 1, 1, 0, 1;
    CHECK_THROWS(eig_extremes(asym));
    CHECK(is_psd(Eigen::MatrixXd(Eigen::Vector2d(1, -1e-12).asDiagonal())));
    CHECK_FALSE(is_psd(Eigen::MatrixXd(Eigen::Vector2d(1, -1e-6).asDiagonal())));
}

TEST_CASE("QMI membership") {
    Eigen::Matrix2d A;
    A << 1, 0, 0, -1;
    const PartitionedSym PA(A, 1);
    CHECK(qmi_membership(Eigen::MatrixXd::Constant(1, 1, 0.5), PA));
    CHECK_FALSE(qmi_membership(Eigen::MatrixXd::Constant(1, 1, 2.0), PA));

    Eigen::Matrix2d N;
    N << -3, 2, 2, -1;
    const PartitionedSym PN(N, 1);
    CHECK(qmi_membership(Eigen::MatrixXd::Constant(1, 1, 2.0), PN));
    CHECK_FALSE(qmi_membership(Eigen::MatrixXd::Constant(1, 1, 0.0), PN));
    // -t^2 + 4t - 3 >= 0 exactly on [1, 3]
    SplitMix64 rng(9);
    for (int i = 0; i < 200; ++i) {
        const double t = rng.uniform(-1.0, 5.0);
        const double q = -t * t + 4.0 * t - 3.0;
        if (std::abs(q) < 1e-6) continue;
        CHECK(qmi_membership(Eigen::MatrixXd::Constant(1, 1, t), PN) == (q >= 0.0));
    }
    CHECK_THROWS(qmi_membership(Eigen::MatrixXd::Zero(2, 1), PN));
}
