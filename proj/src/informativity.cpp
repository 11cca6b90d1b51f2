#include "ddc/informativity.hpp"

#include "ddc/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ddc {

NoiseModel validate_noise_model(const PartitionedSym& pi) {
    const int n = pi.split();
    const int T = pi.lower_size();
    if (T < n) throw std::invalid_argument("noise model: sample count T must be >= state dimension n");
    const auto [lo22, hi22] = eig_extremes(pi.a22());
    if (!(hi22 < -kPsdTolerance * std::max(1.0, std::abs(lo22)))) {
        throw std::invalid_argument("noise block not negative definite");
    }
    if (!is_psd(schur_complement(pi))) {
        throw std::invalid_argument("noise model Schur complement is not positive semidefinite");
    }
    return NoiseModel(pi);
}

NoiseModel energy_noise_model(int state_dim, int sample_count, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("energy noise model: epsilon must be >= 0");
    const int size = state_dim + sample_count;
    Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(size, size);
    pi.topLeftCorner(state_dim, state_dim).diagonal().setConstant(epsilon * epsilon * sample_count);
    pi.bottomRightCorner(sample_count, sample_count).diagonal().setConstant(-1.0);
    return validate_noise_model(PartitionedSym(std::move(pi), state_dim));
}

DataMatrices assemble(const std::vector<Sample>& samples, const PolyVecd& basis) {
    if (samples.empty()) throw std::invalid_argument("assemble: need at least one sample");
    const int n = static_cast<int>(samples.front().y.size());
    const int T = static_cast<int>(samples.size());
    DataMatrices d{Eigen::MatrixXd(n, T), Eigen::MatrixXd(basis.size(), T)};
    for (int i = 0; i < T; ++i) {
        const Sample& s = samples[static_cast<std::size_t>(i)];
        if (s.x.size() != basis.dim() || s.y.size() != n) throw std::invalid_argument("assemble: dimension mismatch");
        if (!s.x.allFinite() || !s.y.allFinite()) throw std::invalid_argument("assemble: non-finite sample");
        d.Y.col(i) = s.y;
        d.Phi.col(i) = basis.eval(s.x);
    }
    return d;
}

PartitionedSym build_N(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi, const NoiseModel& noise) {
    const int n = static_cast<int>(Y.rows());
    const int T = static_cast<int>(Y.cols());
    const int k = static_cast<int>(Phi.rows());
    if (Phi.cols() != T || noise.sample_count() != T || noise.state_dim() != n) {
        throw std::invalid_argument("build_N: dimension mismatch");
    }
    // L = [[I_n, Y], [0, -Phi]]
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n + k, n + T);
    L.topLeftCorner(n, n).setIdentity();
    L.topRightCorner(n, T) = Y;
    L.bottomRightCorner(k, T) = -Phi;
    Eigen::MatrixXd N = L * noise.pi().matrix() * L.transpose();
    return PartitionedSym(symmetrize(N), n);
}

LeastSquaresEstimate least_squares_estimate(const PartitionedSym& N, const PolyVecd& basis) {
    if (N.lower_size() != basis.size()) throw std::invalid_argument("least_squares_estimate: basis length mismatch");
    Eigen::MatrixXd theta = (-N.a12() * pinv(N.a22())).transpose();
    PolyVecd phi = combine(theta, basis);
    return {std::move(theta), std::move(phi)};
}

bool consistent_membership(const Eigen::MatrixXd& theta, const PartitionedSym& N) {
    return qmi_membership(theta, N);
}

std::vector<Eigen::MatrixXd> sample_consistent_parameters(const PartitionedSym& N, int count, std::uint64_t seed) {
    const int n = N.split();
    const int k = N.lower_size();
    const Eigen::MatrixXd Q = -N.a22();
    if (!(eig_extremes(Q).first > 0.0)) {
        throw std::invalid_argument("sample_consistent_parameters: N22 is not negative definite");
    }
    const Eigen::MatrixXd center = (-N.a12() * pinv(N.a22())).transpose();

    // Z(N) = {C + Q^-1/2 U S^1/2 : ||U||_2 <= 1} with S = N | N22.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(Q);
    const Eigen::MatrixXd q_inv_half =
        qe.eigenvectors() * qe.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * qe.eigenvectors().transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(symmetrize(schur_complement(N)));
    const Eigen::MatrixXd s_half =
        se.eigenvectors() * se.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * se.eigenvectors().transpose();

    std::vector<Eigen::MatrixXd> out;
    out.reserve(static_cast<std::size_t>(std::max(count, 0)));
    SplitMix64 rng(seed);
    for (int i = 0; i < count; ++i) {
        Eigen::MatrixXd U(k, n);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < n; ++c) U(r, c) = rng.normal();
        const double radial = std::pow(rng.uniform(), 1.0 / (k * n)) * (1.0 - 1e-9);
        U *= radial / spectral_norm(U);
        out.push_back(center + q_inv_half * U * s_half);
    }
    return out;
}

GeneratedData generate_dataset(const Eigen::MatrixXd& theta_true, const PolyVecd& basis,
                               const std::vector<Eigen::VectorXd>& points, double epsilon, std::uint64_t seed) {
    if (epsilon < 0.0) throw std::invalid_argument("generate_dataset: epsilon must be >= 0");
    if (points.empty()) throw std::invalid_argument("generate_dataset: need at least one point");
    const int n = static_cast<int>(theta_true.cols());
    const int T = static_cast<int>(points.size());
    SplitMix64 rng(seed);
    std::vector<Sample> samples;
    samples.reserve(points.size());
    Eigen::MatrixXd W(n, T);
    for (int i = 0; i < T; ++i) {
        const Eigen::VectorXd& x = points[static_cast<std::size_t>(i)];
        const Eigen::VectorXd w = epsilon > 0.0 ? rng.uniform_ball(n, epsilon) : Eigen::VectorXd::Zero(n);
        W.col(i) = w;
        samples.push_back({x, theta_true.transpose() * basis.eval(x) + w});
    }
    return {std::move(samples), energy_noise_model(n, T, epsilon), std::move(W)};
}

int numerical_rank(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto& sv = svd.singularValues();
    const double cutoff = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(M.rows(), M.cols())) * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) r += sv(i) > cutoff ? 1 : 0;
    return r;
}

DataBundle identify(const std::vector<Sample>& samples, const PolyVecd& basis, const NoiseModel& noise) {
    DataMatrices dm = assemble(samples, basis);
    PartitionedSym N = build_N(dm.Y, dm.Phi, noise);
    LeastSquaresEstimate lse = least_squares_estimate(N, basis);
    const int rank = numerical_rank(dm.Phi);
    DataBundle bundle{samples, basis, std::move(dm.Y), std::move(dm.Phi), std::move(N),
                      std::move(lse.theta), std::move(lse.phi), rank, rank == basis.size(), {}};
    if (!bundle.full_rank) {
        bundle.warnings.push_back("Phi has rank " + std::to_string(rank) + " < k = " + std::to_string(basis.size()) +
                                  "; data is not persistently exciting and theta_lse is not unique");
    }
    return bundle;
}

}  // namespace ddc
