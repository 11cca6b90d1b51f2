#include "ddc/contraction.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace ddc {

CompactSet::CompactSet(Eigen::VectorXd center, double radius) : center_(std::move(center)), radius_(radius) {
    if (center_.size() == 0) throw std::invalid_argument("CompactSet: empty center");
    if (!center_.allFinite()) throw std::invalid_argument("CompactSet: non-finite center");
    if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw std::invalid_argument("CompactSet: degenerate radius");
}

bool CompactSet::contains(const Eigen::VectorXd& x, double tol) const {
    return (x - center_).norm() <= radius_ + tol;
}

Eigen::VectorXd CompactSet::project(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd d = x - center_;
    const double r = d.norm();
    if (r <= radius_) return x;
    return center_ + d * (radius_ / r);
}

Eigen::VectorXd CompactSet::abs_bound() const {
    return center_.cwiseAbs().array() + radius_;
}

SampleGrid sample_grid(const CompactSet& K, int resolution) {
    if (resolution < 2) throw std::invalid_argument("sample_grid: resolution must be >= 2");
    const int n = K.dim();
    const double R = K.radius();
    SampleGrid grid;
    grid.resolution = resolution;
    grid.spacing = 2.0 * R / (resolution - 1);
    grid.covering_radius = grid.spacing * std::sqrt(static_cast<double>(n)) / 2.0;

    std::map<std::vector<double>, bool> seen;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        Eigen::VectorXd offset(n);
        for (int i = 0; i < n; ++i) offset(i) = -R + grid.spacing * idx[static_cast<std::size_t>(i)];
        const Eigen::VectorXd p = K.project(K.center() + offset);
        std::vector<double> key(p.data(), p.data() + n);
        if (seen.emplace(std::move(key), true).second) grid.points.push_back(p);
        int i = 0;
        while (i < n) {
            if (++idx[static_cast<std::size_t>(i)] < resolution) break;
            idx[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == n) break;
    }
    for (int i = 0; i < n; ++i) {
        for (double s : {-1.0, 1.0}) {
            Eigen::VectorXd p = K.center();
            p(i) += s * R;
            std::vector<double> key(p.data(), p.data() + n);
            if (seen.emplace(std::move(key), true).second) grid.points.push_back(p);
        }
    }
    return grid;
}

namespace {

// Upper bound of sup_{x in box} ||grad q(x)||_2 for |x_i| <= bound_i.
double gradient_norm_bound(const Poly& q, const Eigen::VectorXd& bound) {
    const int n = q.dim();
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (const auto& [m, c] : q.terms()) {
            const int e = m[k];
            if (e == 0) continue;
            double v = std::abs(c) * e;
            for (int l = 0; l < n; ++l) {
                const int p = m[l] - (l == k ? 1 : 0);
                for (int r = 0; r < p; ++r) v *= bound(l);
            }
            s += v;
        }
        total += s * s;
    }
    return std::sqrt(total);
}

template <typename Eval>
GridBound grid_max(const SampleGrid& grid, double lipschitz, Eval&& eval) {
    GridBound b;
    b.value = -std::numeric_limits<double>::infinity();
    for (const auto& x : grid.points) {
        const double v = eval(x);
        if (v > b.value) {
            b.value = v;
            b.argmax = x;
        }
    }
    b.grid_spacing = grid.spacing;
    b.margin = lipschitz * grid.covering_radius;
    b.certified_upper = b.value + b.margin;
    return b;
}

}  // namespace

double jacobian_lipschitz_bound(const PolyMatrixd& J, const CompactSet& K) {
    const Eigen::VectorXd bound = K.abs_bound();
    double total = 0.0;
    for (int i = 0; i < J.rows(); ++i) {
        for (int j = 0; j < J.cols(); ++j) {
            const double g = gradient_norm_bound(J(i, j), bound);
            total += g * g;
        }
    }
    return std::sqrt(total);
}

OsLipEstimate oslip(const PolyVecd& f, const Metric& P, const CompactSet& K, int resolution) {
    if (f.size() != f.dim() || f.dim() != K.dim() || P.dim() != K.dim()) {
        throw std::invalid_argument("oslip: field, metric and set dimensions must agree");
    }
    const PolyMatrixd J = jacobian(f);
    const double lipschitz = std::sqrt(P.condition()) * jacobian_lipschitz_bound(J, K);
    const SampleGrid grid = sample_grid(K, resolution);
    return grid_max(grid, lipschitz, [&](const Eigen::VectorXd& x) { return lognorm2_weighted(J.eval(x), P); });
}

GridBound basis_jacobian_sup(const PolyVecd& b, const CompactSet& K, int resolution) {
    if (b.dim() != K.dim()) throw std::invalid_argument("basis_jacobian_sup: dimension mismatch");
    const PolyMatrixd J = jacobian(b);
    const double lipschitz = jacobian_lipschitz_bound(J, K);
    const SampleGrid grid = sample_grid(K, resolution);
    return grid_max(grid, lipschitz, [&](const Eigen::VectorXd& x) { return spectral_norm(J.eval(x)); });
}

double schur_term(const PartitionedSym& N) {
    return std::sqrt(std::max(lambda_max(schur_complement(N)), 0.0));
}

double l_k_bound(const PartitionedSym& N, const PolyVecd& b, const CompactSet& K, int resolution) {
    if (N.lower_size() != b.size()) throw std::invalid_argument("l_k_bound: basis length mismatch");
    const double top = lambda_max(N.a22());
    if (!(top < 0.0)) throw std::invalid_argument("l_k_bound: N22 is not negative definite");
    return std::sqrt(-1.0 / top) * basis_jacobian_sup(b, K, resolution).certified_upper;
}

RobustnessCheck robust_contractivity_check(const PartitionedSym& N, const PolyVecd& b, const Metric& P,
                                           const CompactSet& K, double gamma, const PolyVecd& phi_lse,
                                           int resolution) {
    if (!std::isfinite(gamma)) throw std::invalid_argument("robust_contractivity_check: gamma must be finite");
    RobustnessCheck r;
    r.l_k = l_k_bound(N, b, K, resolution);
    r.schur = schur_term(N);
    r.oslip = oslip(phi_lse, P, K, resolution).certified_upper;
    r.rhs = gamma - r.l_k * r.schur * P.condition();
    r.slack = r.rhs - r.oslip;
    r.pass = r.oslip < r.rhs;
    return r;
}

RateCertificate closed_loop_certificate(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B, const Metric& P,
                                        const PolyVecd& phi_lse, const PartitionedSym& N, const PolyVecd& b,
                                        const CompactSet& K, double gamma, EllMode mode, int resolution) {
    if (B.cols() != G.rows() || B.rows() != G.cols() || B.rows() != P.dim()) {
        throw std::invalid_argument("closed_loop_certificate: B G must be square and match P");
    }
    const Eigen::MatrixXd BG = B * G;
    RateCertificate c;
    c.mode = mode;
    c.mu_star = lognorm2_weighted(BG, P);
    const double root_pmax = std::sqrt(P.lambda_max());
    Eigen::EigenSolver<Eigen::MatrixXd> es(BG, false);
    c.ell_modulus = root_pmax * es.eigenvalues().cwiseAbs().maxCoeff();
    c.ell_spectral = root_pmax * spectral_norm(BG);
    c.ell = mode == EllMode::EigenvalueModulus ? c.ell_modulus : c.ell_spectral;
    c.l_k = l_k_bound(N, b, K, resolution);
    c.schur_term = schur_term(N);
    c.oslip_lse = oslip(phi_lse, P, K, resolution).certified_upper;
    c.kappa = P.condition();
    c.gamma_certified = c.mu_star + c.schur_term * c.l_k * c.kappa + c.ell + c.oslip_lse;
    c.gamma_target = gamma;
    c.pass = c.gamma_certified < gamma;
    return c;
}

double deviation_envelope(double d0, double gamma, double t) {
    if (d0 < 0.0 || t < 0.0) throw std::invalid_argument("deviation_envelope: d0 and t must be non-negative");
    return d0 * std::exp(gamma * t);
}

}  // namespace ddc
