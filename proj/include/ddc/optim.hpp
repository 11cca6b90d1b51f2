#pragma once

// Dense local optimizers: a primal-dual interior-point QP for
//   min 1/2 x^T H x + g^T x  s.t.  A x >= b
// and an SQP driver for smooth inequality-constrained problems built on it.

#include <Eigen/Dense>

#include <functional>

namespace ddc {

struct QpProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

struct QpOptions {
    int max_iterations = 200;
    double tolerance = 1e-10;
};

struct QpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;  // multipliers of A x >= b
    bool converged = false;
    int iterations = 0;
};

/// Mehrotra predictor-corrector on the normal equations. H must be positive
/// semidefinite; a tiny diagonal shift is added for the factorization.
QpResult solve_qp(const QpProblem& qp, const QpOptions& options = {});

/// min f(z) s.t. c(z) >= 0 (nonlinear rows) and A_lin z >= b_lin (kept hard).
struct NlpProblem {
    int num_vars = 0;
    std::function<double(const Eigen::VectorXd&)> objective;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> objective_gradient;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraints;
    /// Optional; forward differences are used when empty.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> constraint_jacobian;
    Eigen::MatrixXd A_lin;
    Eigen::VectorXd b_lin;
};

struct SqpOptions {
    int max_iterations = 300;
    double step_tolerance = 1e-9;
    double feasibility_tolerance = 1e-9;
    double elastic_penalty = 1e4;
};

struct SqpResult {
    Eigen::VectorXd z;
    double objective = 0.0;
    double max_violation = 0.0;  // over nonlinear and linear rows
    bool converged = false;
    bool feasible = false;
    int iterations = 0;
};

/// Line-search SQP with an L1 merit function, damped BFGS on the Lagrangian
/// and an elastic slack that keeps every QP subproblem feasible.
SqpResult solve_sqp(const NlpProblem& problem, const Eigen::VectorXd& z0, const SqpOptions& options = {});

/// Forward-difference Jacobian of c at z.
Eigen::MatrixXd finite_difference_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& c,
                                           const Eigen::VectorXd& z);

}  // namespace ddc
