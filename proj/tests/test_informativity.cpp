#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ddc/informativity.hpp"
#include "ddc/rng.hpp"

using namespace ddc;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

Eigen::VectorXd vec1(double v) { return Eigen::VectorXd::Constant(1, v); }

PartitionedSym tiny_N() {
    Eigen::Matrix2d N;
    N << -3, 2, 2, -1;
    return PartitionedSym(N, 1);
}

std::vector<Eigen::VectorXd> ball_points(SplitMix64& rng, int count, int n) {
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < count; ++i) pts.push_back(rng.uniform_ball(n, 1.0));
    return pts;
}

Eigen::MatrixXd random_theta(SplitMix64& rng, int k, int n) {
    Eigen::MatrixXd t(k, n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) t(i, j) = rng.uniform(-2.0, 2.0);
    return t;
}

}  // namespace

TEST_CASE("noise model validation") {
    const NoiseModel e = energy_noise_model(1, 3, 0.1);
    CHECK(e.sample_count() == 3);
    CHECK(e.pi().a11()(0, 0) == doctest::Approx(0.03));
    CHECK(e.pi().a22().isApprox(-Eigen::MatrixXd::Identity(3, 3)));

    Eigen::MatrixXd pos = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_WITH(validate_noise_model(PartitionedSym(pos, 1)), doctest::Contains("negative definite"));

    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(3, 3);
    neg(0, 0) = -0.5;
    CHECK_THROWS(validate_noise_model(PartitionedSym(neg, 1)));

    CHECK_THROWS(energy_noise_model(3, 2, 0.1));
    CHECK_THROWS(energy_noise_model(1, 3, -0.1));
}

TEST_CASE("assemble") {
    const PolyVecd bx({Poly::variable(1, 0)});
    const DataMatrices d1 = assemble({{vec1(1.0), vec1(2.0)}}, bx);
    CHECK(d1.Y(0, 0) == 2.0);
    CHECK(d1.Phi(0, 0) == 1.0);

    const DataMatrices d2 = assemble({{vec1(0.0), vec1(1.0)}, {vec1(1.0), vec1(3.0)}}, monomial_basis(1, 1));
    Eigen::Matrix2d expected;
    expected << 1, 1, 0, 1;
    CHECK(d2.Phi.isApprox(expected));

    CHECK_THROWS(assemble({{Eigen::Vector2d(0, 0), vec1(1.0)}}, bx));
    CHECK_THROWS(assemble({}, bx));
}

TEST_CASE("UAV-sized basis has full row rank on generic data") {
    SplitMix64 rng(1);
    const PolyVecd b = monomial_basis(4, 2);
    std::vector<Sample> s;
    for (int i = 0; i < 50; ++i) s.push_back({rng.uniform_ball(4, 1.0), Eigen::VectorXd::Zero(4)});
    const DataMatrices d = assemble(s, b);
    CHECK(d.Phi.rows() == 15);
    CHECK(d.Phi.cols() == 50);
    CHECK(numerical_rank(d.Phi) == 15);
}

TEST_CASE("build_N hand case and estimate") {
    Eigen::Matrix2d pi;
    pi << 1, 0, 0, -1;
    const NoiseModel noise = validate_noise_model(PartitionedSym(pi, 1));
    const PartitionedSym N = build_N(scalar(2.0), scalar(1.0), noise);
    CHECK(N.matrix().isApprox(tiny_N().matrix()));
    const LeastSquaresEstimate est = least_squares_estimate(N, PolyVecd({Poly::variable(1, 0)}));
    CHECK(est.theta(0, 0) == doctest::Approx(2.0));
    CHECK(est.phi.eval(vec1(1.5))(0) == doctest::Approx(3.0));
}

TEST_CASE("membership in the tiny consistent set") {
    const PartitionedSym N = tiny_N();
    CHECK(consistent_membership(scalar(1.0), N));
    CHECK(consistent_membership(scalar(2.0), N));
    CHECK(consistent_membership(scalar(3.0), N));
    CHECK_FALSE(consistent_membership(scalar(4.0), N));
    CHECK_FALSE(consistent_membership(scalar(0.0), N));
    const auto draws = sample_consistent_parameters(N, 50, 3);
    CHECK(draws.size() == 50);
    for (const auto& t : draws) {
        CHECK(t(0, 0) >= 1.0 - 1e-9);
        CHECK(t(0, 0) <= 3.0 + 1e-9);
    }
    CHECK(sample_consistent_parameters(N, 10, 3) == std::vector<Eigen::MatrixXd>(draws.begin(), draws.begin() + 10));
}

TEST_CASE("energy-bound estimate equals ordinary least squares") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 3;
        const PolyVecd b = monomial_basis(n, 2);
        const int T = 3 * b.size();
        const GeneratedData g =
            generate_dataset(random_theta(rng, b.size(), n), b, ball_points(rng, T, n), 0.1, 100 + trial);
        const DataBundle d = identify(g.samples, b, g.noise);
        const Eigen::MatrixXd ols = (d.Y * d.Phi.transpose() * (d.Phi * d.Phi.transpose()).inverse()).transpose();
        CHECK((d.theta_lse - ols).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(d.N.a22().isApprox(-d.Phi * d.Phi.transpose()));
        CHECK(lambda_max(d.N.a22()) < 0.0);
        CHECK((d.N.matrix() - d.N.matrix().transpose()).norm() <= 1e-12 * d.N.matrix().norm());
        CHECK(consistent_membership(d.theta_lse, d.N));
    }
}

TEST_CASE("zero noise recovers the true parameters") {
    SplitMix64 rng(8);
    const PolyVecd b = monomial_basis(2, 2);
    const Eigen::MatrixXd theta = random_theta(rng, b.size(), 2);
    const GeneratedData g = generate_dataset(theta, b, ball_points(rng, 20, 2), 0.0, 1);
    CHECK(g.W.isZero(0.0));
    const DataBundle d = identify(g.samples, b, g.noise);
    CHECK((d.theta_lse - theta).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(d.full_rank);
    // Only theta itself is consistent.
    CHECK(consistent_membership(theta, d.N));
    Eigen::MatrixXd off = theta;
    off(0, 0) += 1e-3;
    CHECK_FALSE(consistent_membership(off, d.N));
}

TEST_CASE("generated noise satisfies its own model") {
    SplitMix64 rng(12);
    const PolyVecd b = monomial_basis(2, 1);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GeneratedData g = generate_dataset(random_theta(rng, 3, 2), b, ball_points(rng, 10, 2), 0.5, seed);
        CHECK(qmi_membership(Eigen::MatrixXd(g.W.transpose()), g.noise.pi()));
    }
}

TEST_CASE("estimation error decays linearly in epsilon") {
    SplitMix64 rng(21);
    const PolyVecd b = monomial_basis(2, 1);
    const Eigen::MatrixXd theta = random_theta(rng, 3, 2);
    const auto pts = ball_points(rng, 40, 2);
    std::vector<double> errs;
    for (double eps : {0.1, 0.01, 0.001}) {
        const GeneratedData g = generate_dataset(theta, b, pts, eps, 4);
        errs.push_back((identify(g.samples, b, g.noise).theta_lse - theta).norm() / eps);
    }
    // Same seed, same direction: the error is exactly proportional to eps.
    CHECK(errs[1] == doctest::Approx(errs[0]).epsilon(1e-6));
    CHECK(errs[2] == doctest::Approx(errs[0]).epsilon(1e-6));
}

TEST_CASE("true parameters are always consistent") {
    SplitMix64 rng(99);
    int members = 0;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        const int n = 1 + i % 2;
        const PolyVecd b = monomial_basis(n, 1 + i % 2);
        const Eigen::MatrixXd theta = random_theta(rng, b.size(), n);
        const GeneratedData g = generate_dataset(theta, b, ball_points(rng, 2 * b.size(), n), rng.uniform(0.01, 1.0), i);
        members += consistent_membership(theta, identify(g.samples, b, g.noise).N) ? 1 : 0;
    }
    CHECK(members == draws);
}

TEST_CASE("shrinking epsilon shrinks the consistent set") {
    SplitMix64 rng(31);
    const PolyVecd b = monomial_basis(1, 1);
    const Eigen::MatrixXd theta = random_theta(rng, 2, 1);
    const GeneratedData g = generate_dataset(theta, b, ball_points(rng, 8, 1), 0.05, 2);
    const DataBundle tight = identify(g.samples, b, energy_noise_model(1, 8, 0.1));
    const DataBundle loose = identify(g.samples, b, energy_noise_model(1, 8, 0.2));
    for (const auto& t : sample_consistent_parameters(tight.N, 100, 7)) CHECK(consistent_membership(t, loose.N));
}

TEST_CASE("rank-deficient data raises a warning") {
    const PolyVecd b = monomial_basis(1, 2);
    std::vector<Sample> s = {{vec1(1.0), vec1(0.0)}, {vec1(1.0), vec1(0.0)}, {vec1(1.0), vec1(0.0)}};
    const DataBundle d = identify(s, b, energy_noise_model(1, 3, 0.1));
    CHECK_FALSE(d.full_rank);
    CHECK(d.phi_rank == 1);
    CHECK_FALSE(d.warnings.empty());
}
