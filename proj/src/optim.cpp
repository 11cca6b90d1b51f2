#include "ddc/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddc {

namespace {

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
    }
    return alpha;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
    const Eigen::Index n = qp.H.rows();
    const Eigen::Index m = qp.A.rows();
    if (qp.H.cols() != n || qp.g.size() != n || qp.A.cols() != n || qp.b.size() != m) {
        throw std::invalid_argument("solve_qp: dimension mismatch");
    }
    QpResult r;
    r.x = Eigen::VectorXd::Zero(n);
    if (m == 0) {
        r.x = qp.H.ldlt().solve(-qp.g);
        r.converged = true;
        return r;
    }
    Eigen::VectorXd s = (qp.A * r.x - qp.b).cwiseMax(1.0);
    Eigen::VectorXd lam = Eigen::VectorXd::Ones(m);
    const double scale_d = 1.0 + inf_norm(qp.g);
    const double scale_p = 1.0 + inf_norm(qp.b);
    const double shift = 1e-12 * std::max(1.0, qp.H.diagonal().cwiseAbs().maxCoeff());

    for (int it = 0; it < options.max_iterations; ++it) {
        r.iterations = it;
        const Eigen::VectorXd rd = qp.H * r.x + qp.g - qp.A.transpose() * lam;
        const Eigen::VectorXd rp = qp.A * r.x - s - qp.b;
        const double mu = s.dot(lam) / static_cast<double>(m);
        if (inf_norm(rd) <= options.tolerance * scale_d && inf_norm(rp) <= options.tolerance * scale_p &&
            mu <= options.tolerance) {
            r.converged = true;
            break;
        }
        const Eigen::VectorXd D = lam.cwiseQuotient(s);
        Eigen::MatrixXd K = qp.H + qp.A.transpose() * D.asDiagonal() * qp.A;
        K.diagonal().array() += shift;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);

        auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& ds,
                             Eigen::VectorXd& dl) {
            const Eigen::VectorXd w = (lam.cwiseProduct(rp) + rc).cwiseQuotient(s);
            dx = ldlt.solve(-rd - qp.A.transpose() * w);
            ds = qp.A * dx + rp;
            dl = -(rc + lam.cwiseProduct(ds)).cwiseQuotient(s);
        };

        Eigen::VectorXd dx, ds, dl;
        direction(s.cwiseProduct(lam), dx, ds, dl);
        const double a_aff = std::min(max_step(s, ds), max_step(lam, dl));
        const double mu_aff = (s + a_aff * ds).dot(lam + a_aff * dl) / static_cast<double>(m);
        const double sigma = std::pow(mu_aff / mu, 3.0);

        const Eigen::VectorXd rc = s.cwiseProduct(lam) + ds.cwiseProduct(dl) - Eigen::VectorXd::Constant(m, sigma * mu);
        direction(rc, dx, ds, dl);
        const double alpha = std::min(1.0, 0.995 * std::min(max_step(s, ds), max_step(lam, dl)));
        r.x += alpha * dx;
        s += alpha * ds;
        lam += alpha * dl;
        if (!r.x.allFinite()) break;
    }
    r.lambda = lam;
    return r;
}

Eigen::MatrixXd finite_difference_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& c,
                                           const Eigen::VectorXd& z) {
    const Eigen::VectorXd c0 = c(z);
    Eigen::MatrixXd J(c0.size(), z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        Eigen::VectorXd zp = z;
        const double h = 1e-7 * std::max(1.0, std::abs(z(j)));
        zp(j) += h;
        J.col(j) = (c(zp) - c0) / h;
    }
    return J;
}

SqpResult solve_sqp(const NlpProblem& pb, const Eigen::VectorXd& z0, const SqpOptions& options) {
    const int n = pb.num_vars;
    if (z0.size() != n) throw std::invalid_argument("solve_sqp: z0 has wrong size");
    const Eigen::Index m_lin = pb.A_lin.rows();
    if (m_lin > 0 && (pb.A_lin.cols() != n || pb.b_lin.size() != m_lin)) {
        throw std::invalid_argument("solve_sqp: linear constraint dimension mismatch");
    }
    auto jac = [&](const Eigen::VectorXd& z) {
        return pb.constraint_jacobian ? pb.constraint_jacobian(z) : finite_difference_jacobian(pb.constraints, z);
    };
    auto violation_sum = [&](const Eigen::VectorXd& c, const Eigen::VectorXd& z) {
        double v = (-c).cwiseMax(0.0).sum();
        if (m_lin > 0) v += (pb.b_lin - pb.A_lin * z).cwiseMax(0.0).sum();
        return v;
    };
    auto violation_max = [&](const Eigen::VectorXd& c, const Eigen::VectorXd& z) {
        double v = c.size() > 0 ? std::max(0.0, -c.minCoeff()) : 0.0;
        if (m_lin > 0) v = std::max(v, std::max(0.0, (pb.b_lin - pb.A_lin * z).maxCoeff()));
        return v;
    };

    SqpResult res;
    Eigen::VectorXd z = z0;
    Eigen::VectorXd c = pb.constraints(z);
    Eigen::MatrixXd J = jac(z);
    Eigen::VectorXd grad = pb.objective_gradient(z);
    const Eigen::Index m = c.size();
    Eigen::MatrixXd Bk = Eigen::MatrixXd::Identity(n, n);
    double rho = 1.0;

    for (int it = 0; it < options.max_iterations; ++it) {
        res.iterations = it + 1;
        // QP in (d, t): elastic slack t relaxes every nonlinear row.
        QpProblem qp;
        qp.H = Eigen::MatrixXd::Zero(n + 1, n + 1);
        qp.H.topLeftCorner(n, n) = Bk;
        qp.g.resize(n + 1);
        qp.g << grad, options.elastic_penalty;
        qp.A = Eigen::MatrixXd::Zero(m + m_lin + 1, n + 1);
        qp.b.resize(m + m_lin + 1);
        qp.A.topLeftCorner(m, n) = J;
        qp.A.block(0, n, m, 1).setOnes();
        qp.b.head(m) = -c;
        if (m_lin > 0) {
            qp.A.block(m, 0, m_lin, n) = pb.A_lin;
            qp.b.segment(m, m_lin) = pb.b_lin - pb.A_lin * z;
        }
        qp.A(m + m_lin, n) = 1.0;
        qp.b(m + m_lin) = 0.0;
        const QpResult sub = solve_qp(qp);
        if (!sub.x.allFinite()) break;
        const Eigen::VectorXd d = sub.x.head(n);
        const Eigen::VectorXd lam_c = sub.lambda.head(m);

        const double viol = violation_max(c, z);
        if (inf_norm(d) <= options.step_tolerance * (1.0 + inf_norm(z)) && viol <= options.feasibility_tolerance) {
            res.converged = true;
            break;
        }

        rho = std::max(rho, 1.5 * (sub.lambda.size() > 0 ? sub.lambda.cwiseAbs().maxCoeff() : 0.0));
        const double merit0 = pb.objective(z) + rho * violation_sum(c, z);
        double slope = grad.dot(d) - rho * violation_sum(c, z);
        if (slope > 0.0) slope = 0.0;
        double alpha = 1.0;
        Eigen::VectorXd z_new, c_new;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            z_new = z + alpha * d;
            c_new = pb.constraints(z_new);
            const double merit = pb.objective(z_new) + rho * violation_sum(c_new, z_new);
            if (std::isfinite(merit) && merit <= merit0 + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        const Eigen::MatrixXd J_new = jac(z_new);
        const Eigen::VectorXd grad_new = pb.objective_gradient(z_new);
        const Eigen::VectorXd s = z_new - z;
        Eigen::VectorXd y = (grad_new - J_new.transpose() * lam_c) - (grad - J.transpose() * lam_c);
        const Eigen::VectorXd Bs = Bk * s;
        const double sBs = s.dot(Bs);
        if (sBs > 1e-300) {
            const double sy = s.dot(y);
            if (sy < 0.2 * sBs) {
                const double theta = 0.8 * sBs / (sBs - sy);
                y = theta * y + (1.0 - theta) * Bs;
            }
            Bk += y * y.transpose() / s.dot(y) - Bs * Bs.transpose() / sBs;
            Bk = 0.5 * (Bk + Bk.transpose());
        }
        z = z_new;
        c = c_new;
        J = J_new;
        grad = grad_new;
    }
    res.z = z;
    res.objective = pb.objective(z);
    res.max_violation = violation_max(c, z);
    res.feasible = res.max_violation <= options.feasibility_tolerance;
    return res;
}

}  // namespace ddc
