#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ddc/optim.hpp"
#include "ddc/rng.hpp"

#include <cmath>

using namespace ddc;

TEST_CASE("QP: projection onto a half-plane") {
    QpProblem qp{Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(0, 0), Eigen::RowVector2d(1, 1), Eigen::VectorXd::Ones(1)};
    const QpResult r = solve_qp(qp);
    REQUIRE(r.converged);
    CHECK((r.x - Eigen::Vector2d(0.5, 0.5)).norm() <= 1e-8);
    CHECK(r.lambda(0) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("QP: inactive constraint leaves the unconstrained minimum") {
    QpProblem qp{2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d(-2, -4), Eigen::RowVector2d(-1, 0),
                 Eigen::VectorXd::Constant(1, -10.0)};
    const QpResult r = solve_qp(qp);
    REQUIRE(r.converged);
    CHECK((r.x - Eigen::Vector2d(1, 2)).norm() <= 1e-8);
    CHECK(std::abs(r.lambda(0)) <= 1e-6);
}

TEST_CASE("QP: linear program over a box") {
    // min x + 2y over [-1, 3] x [-2, 5]
    Eigen::MatrixXd A(4, 2);
    A << 1, 0, -1, 0, 0, 1, 0, -1;
    Eigen::Vector4d b(-1, -3, -2, -5);
    QpProblem qp{Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(1, 2), A, b};
    const QpResult r = solve_qp(qp);
    REQUIRE(r.converged);
    CHECK((r.x - Eigen::Vector2d(-1, -2)).norm() <= 1e-7);
}

TEST_CASE("QP: random strictly convex problems satisfy KKT") {
    SplitMix64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 4, m = 1 + trial % 6;
        Eigen::MatrixXd R(n, n), A(m, n);
        Eigen::VectorXd g(n), b(m);
        for (int i = 0; i < n; ++i) {
            g(i) = rng.uniform(-1, 1);
            for (int j = 0; j < n; ++j) R(i, j) = rng.uniform(-1, 1);
        }
        for (int i = 0; i < m; ++i) {
            b(i) = rng.uniform(-1, 0);
            for (int j = 0; j < n; ++j) A(i, j) = rng.uniform(-1, 1);
        }
        const Eigen::MatrixXd H = R * R.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
        const QpResult r = solve_qp({H, g, A, b});
        REQUIRE(r.converged);
        const Eigen::VectorXd slack = A * r.x - b;
        CHECK(slack.minCoeff() >= -1e-8);
        CHECK(r.lambda.minCoeff() >= -1e-8);
        CHECK((H * r.x + g - A.transpose() * r.lambda).norm() <= 1e-6);
        CHECK(std::abs(slack.dot(r.lambda)) <= 1e-6);
    }
}

TEST_CASE("SQP: linear objective on the unit disk") {
    NlpProblem p;
    p.num_vars = 2;
    p.objective = [](const Eigen::VectorXd& z) { return -z(0) - z(1); };
    p.objective_gradient = [](const Eigen::VectorXd&) { return Eigen::Vector2d(-1, -1).eval(); };
    p.constraints = [](const Eigen::VectorXd& z) { return Eigen::VectorXd::Constant(1, 1.0 - z.squaredNorm()); };
    p.A_lin = Eigen::MatrixXd::Zero(0, 2);
    p.b_lin = Eigen::VectorXd::Zero(0);
    const SqpResult r = solve_sqp(p, Eigen::Vector2d(0.1, -0.3));
    CHECK(r.converged);
    CHECK(r.feasible);
    CHECK((r.z - Eigen::Vector2d(M_SQRT1_2, M_SQRT1_2)).norm() <= 1e-6);
    CHECK(r.objective == doctest::Approx(-M_SQRT2).epsilon(1e-8));
}

TEST_CASE("SQP: linear rows stay hard and analytic jacobian is used") {
    // min (x - 2)^2 + (y - 2)^2  s.t.  x y >= 1,  x <= 1
    NlpProblem p;
    p.num_vars = 2;
    p.objective = [](const Eigen::VectorXd& z) { return (z.array() - 2.0).square().sum(); };
    p.objective_gradient = [](const Eigen::VectorXd& z) { return (2.0 * (z.array() - 2.0)).matrix().eval(); };
    p.constraints = [](const Eigen::VectorXd& z) { return Eigen::VectorXd::Constant(1, z(0) * z(1) - 1.0); };
    p.constraint_jacobian = [](const Eigen::VectorXd& z) { return Eigen::RowVector2d(z(1), z(0)).eval(); };
    p.A_lin = Eigen::RowVector2d(-1, 0);
    p.b_lin = Eigen::VectorXd::Constant(1, -1.0);
    const SqpResult r = solve_sqp(p, Eigen::Vector2d(0.5, 3.0));
    CHECK(r.feasible);
    CHECK(r.z(0) <= 1.0 + 1e-9);
    CHECK((r.z - Eigen::Vector2d(1, 2)).norm() <= 1e-6);
}

TEST_CASE("SQP: infeasible nonlinear rows are reported") {
    NlpProblem p;
    p.num_vars = 1;
    p.objective = [](const Eigen::VectorXd& z) { return z(0) * z(0); };
    p.objective_gradient = [](const Eigen::VectorXd& z) { return (2.0 * z).eval(); };
    p.constraints = [](const Eigen::VectorXd& z) { return Eigen::VectorXd::Constant(1, -1.0 - z(0) * z(0)); };
    p.A_lin = Eigen::MatrixXd::Zero(0, 1);
    p.b_lin = Eigen::VectorXd::Zero(0);
    const SqpResult r = solve_sqp(p, Eigen::VectorXd::Constant(1, 0.7));
    CHECK_FALSE(r.feasible);
    CHECK(r.max_violation >= 1.0 - 1e-9);
}

TEST_CASE("forward-difference jacobian") {
    const auto c = [](const Eigen::VectorXd& z) {
        Eigen::VectorXd v(2);
        v << z(0) * z(1), std::sin(z(0));
        return v;
    };
    const Eigen::Vector2d z(0.3, -1.2);
    Eigen::Matrix2d exact;
    exact << z(1), z(0), std::cos(z(0)), 0.0;
    CHECK((finite_difference_jacobian(c, z) - exact).cwiseAbs().maxCoeff() <= 1e-6);
}
