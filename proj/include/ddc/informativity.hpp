#pragma once

// Data-informativity identification: noise models, data matrices, the QMI
// representation N of the consistent parameter set, and the noise-aware
// least-squares estimate.

#include "ddc/matan.hpp"
#include "ddc/polynomial.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ddc {

/// Partitioned noise model Pi with Pi22 < 0 and Pi | Pi22 >= 0.
class NoiseModel {
public:
    int state_dim() const { return pi_.split(); }
    int sample_count() const { return pi_.lower_size(); }
    const PartitionedSym& pi() const { return pi_; }

private:
    friend NoiseModel validate_noise_model(const PartitionedSym& pi);
    explicit NoiseModel(PartitionedSym pi) : pi_(std::move(pi)) {}
    PartitionedSym pi_;
};

/// Throws std::invalid_argument on a violated noise-model invariant.
NoiseModel validate_noise_model(const PartitionedSym& pi);

/// Energy bound sum_i ||w_i||^2 <= eps^2 T, i.e. Pi = diag(eps^2 T I_n, -I_T).
NoiseModel energy_noise_model(int state_dim, int sample_count, double epsilon);

struct Sample {
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

struct DataMatrices {
    Eigen::MatrixXd Y;    // n x T
    Eigen::MatrixXd Phi;  // k x T
};

DataMatrices assemble(const std::vector<Sample>& samples, const PolyVecd& basis);

PartitionedSym build_N(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi, const NoiseModel& noise);

struct LeastSquaresEstimate {
    Eigen::MatrixXd theta;  // k x n
    PolyVecd phi;           // theta^T b(x)
};

LeastSquaresEstimate least_squares_estimate(const PartitionedSym& N, const PolyVecd& basis);

bool consistent_membership(const Eigen::MatrixXd& theta, const PartitionedSym& N);

/// Draws `count` members of Z(N) as theta_lse + Q^-1/2 U S^1/2 with
/// Q = -N22, S = N | N22 and U a random direction of spectral norm <= 1.
std::vector<Eigen::MatrixXd> sample_consistent_parameters(const PartitionedSym& N, int count, std::uint64_t seed);

struct GeneratedData {
    std::vector<Sample> samples;
    NoiseModel noise;
    Eigen::MatrixXd W;  // n x T, the noise actually drawn
};

/// y_i = theta_true^T b(x_i) + w_i with w_i uniform in the eps-ball, and the
/// matching energy-bound noise model.
GeneratedData generate_dataset(const Eigen::MatrixXd& theta_true, const PolyVecd& basis,
                               const std::vector<Eigen::VectorXd>& points, double epsilon, std::uint64_t seed);

struct DataBundle {
    std::vector<Sample> samples;
    PolyVecd basis;
    Eigen::MatrixXd Y;
    Eigen::MatrixXd Phi;
    PartitionedSym N;
    Eigen::MatrixXd theta_lse;
    PolyVecd phi_lse;
    int phi_rank = 0;
    bool full_rank = false;
    std::vector<std::string> warnings;
};

/// assemble -> build_N -> least_squares_estimate, with rank diagnostics.
DataBundle identify(const std::vector<Sample>& samples, const PolyVecd& basis, const NoiseModel& noise);

/// Numerical rank with the SVD cut-off used by pinv.
int numerical_rank(const Eigen::MatrixXd& M);

}  // namespace ddc
