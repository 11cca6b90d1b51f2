#include "ddc/synthesis.hpp"

#include "ddc/informativity.hpp"
#include "ddc/optim.hpp"
#include "ddc/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddc {

namespace {

constexpr int kMaxExchangeRounds = 60;
constexpr int kVerifyRandomPoints = 10000;
constexpr std::uint64_t kVerifyStream = 0x5645524946ULL;
constexpr std::uint64_t kRestartStream = 0x52455354ULL;

int triangle_size(int n) { return n * (n + 1) / 2; }

// Row-major upper triangle (i <= j) <-> symmetric matrix.
Eigen::MatrixXd unpack(const Eigen::VectorXd& z, int n) {
    Eigen::MatrixXd G(n, n);
    int k = 2;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            G(i, j) = z(k);
            G(j, i) = z(k);
            ++k;
        }
    }
    return G;
}

Eigen::VectorXd pack(double mu, double a, const Eigen::MatrixXd& G) {
    const int n = static_cast<int>(G.rows());
    Eigen::VectorXd z(2 + triangle_size(n));
    z(0) = mu;
    z(1) = a;
    int k = 2;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) z(k++) = G(i, j);
    return z;
}

// x^T H(Gamma) x = (P x)^T Gamma (P^-1 x), linear in the packed triangle.
Eigen::VectorXd sos1_features(const Eigen::VectorXd& x, const Metric& P) {
    const int n = static_cast<int>(x.size());
    const Eigen::VectorXd u = P.matrix() * x;
    const Eigen::VectorXd v = P.inverse() * x;
    Eigen::VectorXd f(triangle_size(n));
    int k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) f(k++) = i == j ? u(i) * v(i) : u(i) * v(j) + u(j) * v(i);
    }
    return f;
}

// s(Gamma) = c0 + f^T gamma with the residual a * s(Gamma).
struct Sos2Row {
    double c0 = 0.0;
    Eigen::VectorXd f;
};

Sos2Row sos2_features(const Eigen::VectorXd& x, const PolyVecd& phi, const Poly& div_phi, const Poly& p,
                      const PolyVecd& grad_p, double alpha) {
    const int n = static_cast<int>(x.size());
    const double px = p.eval(x);
    const Eigen::VectorXd gp = grad_p.eval(x);
    Sos2Row row;
    row.c0 = px * div_phi.eval(x) - alpha * gp.dot(phi.eval(x));
    row.f.resize(triangle_size(n));
    int k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            row.f(k++) = i == j ? px - alpha * gp(i) * x(i) : -alpha * (gp(i) * x(j) + gp(j) * x(i));
        }
    }
    return row;
}

std::vector<Eigen::VectorXd> spanning_directions(int n) {
    std::vector<Eigen::VectorXd> dirs;
    for (int i = 0; i < n; ++i) dirs.push_back(Eigen::VectorXd::Unit(n, i));
    const double h = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            dirs.push_back(h * (Eigen::VectorXd::Unit(n, i) + Eigen::VectorXd::Unit(n, j)));
            dirs.push_back(h * (Eigen::VectorXd::Unit(n, i) - Eigen::VectorXd::Unit(n, j)));
        }
    }
    return dirs;
}

struct Program {
    int n = 0;
    int nz = 0;
    // SOS-I rows: mu - w1 * f1^T gamma - w1 * delta, w1 = 1 / ||x||^2.
    std::vector<Eigen::VectorXd> f1;
    std::vector<double> w1;
    // SOS-II rows: w2 * (a * (c0 + f^T gamma) - delta).
    std::vector<Sos2Row> rows2;
    std::vector<double> w2;
    Eigen::MatrixXd A_lin;
    Eigen::VectorXd b_lin;

    void add_sos1(const Eigen::VectorXd& x, const Metric& P) {
        f1.push_back(sos1_features(x, P));
        w1.push_back(1.0 / x.squaredNorm());
    }

    Eigen::VectorXd constraints(const Eigen::VectorXd& z) const {
        const Eigen::VectorXd g = z.tail(nz - 2);
        Eigen::VectorXd c(static_cast<Eigen::Index>(f1.size() + rows2.size()));
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < f1.size(); ++i) c(r++) = z(0) - w1[i] * (f1[i].dot(g) + kSynthesisMargin);
        for (std::size_t i = 0; i < rows2.size(); ++i) {
            c(r++) = w2[i] * (z(1) * (rows2[i].c0 + rows2[i].f.dot(g)) - kSynthesisMargin);
        }
        return c;
    }

    Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const {
        const Eigen::VectorXd g = z.tail(nz - 2);
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(f1.size() + rows2.size()), nz);
        Eigen::Index r = 0;
        for (std::size_t i = 0; i < f1.size(); ++i, ++r) {
            J(r, 0) = 1.0;
            J.row(r).tail(nz - 2) = -w1[i] * f1[i].transpose();
        }
        for (std::size_t i = 0; i < rows2.size(); ++i, ++r) {
            J(r, 1) = w2[i] * (rows2[i].c0 + rows2[i].f.dot(g));
            J.row(r).tail(nz - 2) = w2[i] * z(1) * rows2[i].f.transpose();
        }
        return J;
    }
};

}  // namespace

std::string to_string(SynthesisStatus status) {
    switch (status) {
        case SynthesisStatus::Ok: return "ok";
        case SynthesisStatus::Infeasible: return "infeasible";
        case SynthesisStatus::Unverified: return "unverified";
    }
    return "unknown";
}

void validate_problem(const SynthesisProblem& pb) {
    const int n = pb.K.dim();
    if (pb.P.dim() != n) throw std::invalid_argument("synthesis: P and K dimensions differ");
    if (pb.B.rows() != n || pb.B.cols() < 1) throw std::invalid_argument("synthesis: B must be n x m with m >= 1");
    if (numerical_rank(pb.B) != pb.B.cols()) throw std::invalid_argument("synthesis: B must have full column rank");
    if (pb.phi_lse.size() != n || pb.phi_lse.dim() != n) throw std::invalid_argument("synthesis: phi_lse must be a field on R^n");
    if (pb.basis.dim() != n || pb.N.split() != n || pb.N.lower_size() != pb.basis.size()) {
        throw std::invalid_argument("synthesis: N, basis and state dimension disagree");
    }
    if (pb.p_poly.dim() != n) throw std::invalid_argument("synthesis: p has wrong dimension");
    if (!(pb.alpha > 0.0) || !std::isfinite(pb.alpha)) throw std::invalid_argument("synthesis: alpha must be > 0");
    if (!(pb.M > 0.0) || !std::isfinite(pb.M)) throw std::invalid_argument("synthesis: M must be > 0");
    if (pb.gamma_target && !(*pb.gamma_target < 0.0)) throw std::invalid_argument("synthesis: gamma_target must be < 0");
    for (const auto& x : sample_grid(pb.K, pb.grid).points) {
        if (!(pb.p_poly.eval(x) > 0.0)) throw std::invalid_argument("synthesis: p is not positive on K");
    }
}

double varsigma(const PartitionedSym& N, const PolyVecd& b, const CompactSet& K, const PolyVecd& phi_lse,
                const Metric& P, int resolution) {
    const double top22 = lambda_max(N.a22());
    if (!(top22 < 0.0)) throw std::invalid_argument("varsigma: N22 is not negative definite");
    const double s = std::max(lambda_max(schur_complement(N)), 0.0);
    const double noise = std::sqrt(s / -top22) * basis_jacobian_sup(b, K, resolution).certified_upper;
    return noise + oslip(phi_lse, P, K, resolution).certified_upper;
}

double beta(const Metric& P) { return 1.0 + std::sqrt(P.lambda_max()); }

Eigen::MatrixXd sos1_matrix(const Eigen::MatrixXd& Gamma, const Metric& P) {
    if (Gamma.rows() != P.dim() || Gamma.cols() != P.dim()) throw std::invalid_argument("sos1_matrix: dimension mismatch");
    const Eigen::MatrixXd H = 0.5 * (P.matrix() * Gamma * P.inverse() + P.inverse() * Gamma * P.matrix());
    return symmetrize(H);
}

double sos1_residual(const Eigen::MatrixXd& Gamma, double mu, const Metric& P, const Eigen::VectorXd& x) {
    return mu * x.squaredNorm() - x.dot(sos1_matrix(Gamma, P) * x);
}

Poly sos2_polynomial(const Eigen::MatrixXd& Gamma, double a, const PolyVecd& phi_lse, const Poly& p, double alpha) {
    const PolyVecd field = a * (phi_lse + PolyVecd::linear(Gamma));
    return p * divergence(field) - alpha * dot(gradient(p), field);
}

double sos2_residual(const Eigen::MatrixXd& Gamma, double a, const PolyVecd& phi_lse, const Poly& p, double alpha,
                     const Eigen::VectorXd& x) {
    return sos2_polynomial(Gamma, a, phi_lse, p, alpha).eval(x);
}

int dense_resolution(int resolution, int dim) {
    return static_cast<int>(std::ceil((resolution - 1) * std::pow(10.0, 1.0 / dim))) + 1;
}

SynthesisResult synthesize(const SynthesisProblem& pb) {
    validate_problem(pb);
    const int n = pb.K.dim();
    const double delta = kSynthesisMargin;

    SynthesisResult out;
    out.beta = beta(pb.P);
    out.varsigma = varsigma(pb.N, pb.basis, pb.K, pb.phi_lse, pb.P, pb.grid);

    Program prog;
    prog.n = n;
    prog.nz = 2 + triangle_size(n);
    const SampleGrid grid = sample_grid(pb.K, pb.grid);
    for (const auto& x : grid.points) {
        if (x.squaredNorm() > 0.0) prog.add_sos1(x, pb.P);
    }
    for (const auto& d : spanning_directions(n)) prog.add_sos1(d, pb.P);

    const Poly div_phi = divergence(pb.phi_lse);
    const PolyVecd grad_p = gradient(pb.p_poly);
    for (const auto& x : grid.points) {
        Sos2Row row = sos2_features(x, pb.phi_lse, div_phi, pb.p_poly, grad_p, pb.alpha);
        const double norm = std::sqrt(row.c0 * row.c0 + row.f.squaredNorm());
        prog.w2.push_back(1.0 / std::max(1.0, norm));
        prog.rows2.push_back(std::move(row));
    }

    const int nt = triangle_size(n);
    const int n_lin = 2 + 2 * nt + (pb.gamma_target ? 1 : 0);
    prog.A_lin = Eigen::MatrixXd::Zero(n_lin, prog.nz);
    prog.b_lin = Eigen::VectorXd::Zero(n_lin);
    prog.A_lin(0, 1) = 1.0;
    prog.b_lin(0) = kMinDensityScale;
    prog.A_lin(1, 1) = -1.0;
    prog.b_lin(1) = -kMaxDensityScale;
    for (int k = 0; k < nt; ++k) {
        prog.A_lin(2 + 2 * k, 2 + k) = 1.0;
        prog.b_lin(2 + 2 * k) = -pb.M;
        prog.A_lin(3 + 2 * k, 2 + k) = -1.0;
        prog.b_lin(3 + 2 * k) = -pb.M;
    }
    double mu_cap = std::numeric_limits<double>::infinity();
    if (pb.gamma_target) {
        mu_cap = *pb.gamma_target / out.beta - out.varsigma / out.beta - delta;
        prog.A_lin(n_lin - 1, 0) = -1.0;
        prog.b_lin(n_lin - 1) = -mu_cap;
    }

    std::vector<Eigen::MatrixXd> starts;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    starts.push_back(-I);
    starts.push_back(-0.1 * I);
    starts.push_back(-(pb.M / 2.0) * I);
    {
        SplitMix64 rng = SplitMix64::stream(pb.seed, kRestartStream);
        Eigen::MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) R(i, j) = R(j, i) = rng.uniform(-1.0, 1.0);
        starts.push_back(R);
    }
    starts.push_back(Eigen::MatrixXd::Zero(n, n));

    const std::size_t base_sos1 = prog.f1.size();
    bool found = false;
    for (int r = 0; r < static_cast<int>(starts.size()); ++r) {
        Program attempt = prog;
        const Eigen::MatrixXd& G0 = starts[static_cast<std::size_t>(r)];
        Eigen::VectorXd z = pack(lambda_max(sos1_matrix(G0, pb.P)) + delta, 1.0, G0);
        int iterations = 0;
        bool ok = false;
        for (int round = 0; round < kMaxExchangeRounds; ++round) {
            NlpProblem nlp;
            nlp.num_vars = attempt.nz;
            nlp.objective = [](const Eigen::VectorXd& v) { return v(0); };
            nlp.objective_gradient = [nz = attempt.nz](const Eigen::VectorXd&) {
                return Eigen::VectorXd::Unit(nz, 0);
            };
            nlp.constraints = [&attempt](const Eigen::VectorXd& v) { return attempt.constraints(v); };
            nlp.constraint_jacobian = [&attempt](const Eigen::VectorXd& v) { return attempt.jacobian(v); };
            nlp.A_lin = attempt.A_lin;
            nlp.b_lin = attempt.b_lin;
            const SqpResult sol = solve_sqp(nlp, z, {});
            iterations += sol.iterations;
            z = sol.z;
            if (!sol.feasible) break;
            const Eigen::MatrixXd H = sos1_matrix(unpack(z, n), pb.P);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            if (es.eigenvalues()(n - 1) <= z(0) - 0.5 * delta) {
                ok = true;
                break;
            }
            attempt.add_sos1(es.eigenvectors().col(n - 1), pb.P);
        }
        if (!ok) continue;
        if (!found || z(0) < out.mu) {
            found = true;
            out.mu = z(0);
            out.a = z(1);
            out.Gamma = unpack(z, n);
            out.restart = r;
            out.iterations = iterations;
            out.cuts = static_cast<int>(attempt.f1.size() - base_sos1);
        }
    }

    if (!found) {
        out.status = SynthesisStatus::Infeasible;
        return out;
    }
    out.G = pinv(pb.B) * out.Gamma / out.a;
    out.gamma_achieved = out.beta * out.mu + out.varsigma;
    out.constraint_report = verify(out, pb);
    out.verified = out.constraint_report.verified;
    out.status = out.verified ? SynthesisStatus::Ok : SynthesisStatus::Unverified;
    return out;
}

SynthesisResult synthesize_max_contraction(SynthesisProblem problem) {
    problem.gamma_target.reset();
    return synthesize(problem);
}

ConstraintReport verify(const SynthesisResult& result, const SynthesisProblem& pb) {
    const int n = pb.K.dim();
    ConstraintReport rep;
    rep.dense_resolution = dense_resolution(pb.grid, n);
    rep.random_points = kVerifyRandomPoints;

    std::vector<Eigen::VectorXd> points = sample_grid(pb.K, rep.dense_resolution).points;
    SplitMix64 rng = SplitMix64::stream(pb.seed, kVerifyStream);
    for (int i = 0; i < kVerifyRandomPoints; ++i) points.push_back(pb.K.center() + rng.uniform_ball(n, pb.K.radius()));

    const Eigen::MatrixXd& Gamma = result.Gamma;
    const bool shaped = Gamma.rows() == n && Gamma.cols() == n;
    if (!shaped) {
        rep.constraints.push_back({"gamma_shape", -1.0, Eigen::VectorXd(), 0});
        return rep;
    }

    const Eigen::MatrixXd H = sos1_matrix(Gamma, pb.P);
    const Poly s2 = sos2_polynomial(Gamma, result.a, pb.phi_lse, pb.p_poly, pb.alpha);
    ConstraintMin c1{"sos1", std::numeric_limits<double>::infinity(), Eigen::VectorXd(), 0};
    ConstraintMin c2{"sos2", std::numeric_limits<double>::infinity(), Eigen::VectorXd(), 0};
    for (const auto& x : points) {
        const double r1 = result.mu * x.squaredNorm() - x.dot(H * x);
        const double r2 = s2.eval(x);
        if (r1 < c1.min_residual) {
            c1.min_residual = r1;
            c1.argmin = x;
        }
        if (r2 < c2.min_residual) {
            c2.min_residual = r2;
            c2.argmin = x;
        }
    }
    c1.points = c2.points = static_cast<int>(points.size());
    rep.constraints.push_back(c1);
    rep.constraints.push_back(c2);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    rep.constraints.push_back({"sos1_eigen", result.mu - es.eigenvalues()(n - 1), es.eigenvectors().col(n - 1), 1});
    rep.constraints.push_back({"symmetry", -asymmetry(Gamma), Eigen::VectorXd(), 1});
    rep.constraints.push_back({"a_lower", result.a - kMinDensityScale, Eigen::VectorXd(), 1});
    rep.constraints.push_back({"a_upper", kMaxDensityScale - result.a, Eigen::VectorXd(), 1});
    rep.constraints.push_back({"gamma_bound", pb.M - Gamma.cwiseAbs().maxCoeff(), Eigen::VectorXd(), 1});

    const double b = beta(pb.P);
    const double s = varsigma(pb.N, pb.basis, pb.K, pb.phi_lse, pb.P, pb.grid);
    if (pb.gamma_target) {
        rep.constraints.push_back({"rate_target", *pb.gamma_target / b - s / b - result.mu, Eigen::VectorXd(), 1});
    }
    rep.gamma_recomputed = b * result.mu + s;
    rep.gamma_mismatch = std::abs(rep.gamma_recomputed - result.gamma_achieved);

    bool ok = rep.gamma_mismatch <= 1e-6;
    for (const auto& c : rep.constraints) ok = ok && c.min_residual >= 0.0;
    rep.verified = ok;
    return rep;
}

}  // namespace ddc
