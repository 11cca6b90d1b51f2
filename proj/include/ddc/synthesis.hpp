#pragma once

// Fixed-gain controller synthesis: the eigenvalue (SOS-I) and density
// (SOS-II) residuals, the constrained program over (mu, a, Gamma), gain
// extraction G = B^+ Gamma / a, and an independent dense-grid audit.

#include "ddc/contraction.hpp"
#include "ddc/matan.hpp"
#include "ddc/polynomial.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ddc {

inline constexpr double kSynthesisMargin = 1e-6;
inline constexpr double kMinDensityScale = 1e-3;
inline constexpr double kMaxDensityScale = 1e3;
inline constexpr int kSynthesisRestarts = 5;

struct SynthesisProblem {
    Metric P;
    CompactSet K;
    Eigen::MatrixXd B;  // n x m, full column rank
    PolyVecd phi_lse;
    PartitionedSym N;
    PolyVecd basis;
    std::optional<double> gamma_target;  // empty: relaxed mode
    Poly p_poly;
    double alpha = 1000.0;
    double M = 10.0;
    int grid = kDefaultGridResolution;
    std::uint64_t seed = 0;
};

/// Throws std::invalid_argument if a problem invariant fails.
void validate_problem(const SynthesisProblem& problem);

struct ConstraintMin {
    std::string name;
    double min_residual = 0.0;
    Eigen::VectorXd argmin;
    int points = 0;
};

struct ConstraintReport {
    std::vector<ConstraintMin> constraints;
    int dense_resolution = 0;
    int random_points = 0;
    double gamma_recomputed = 0.0;
    double gamma_mismatch = 0.0;
    bool verified = false;
};

enum class SynthesisStatus { Ok, Infeasible, Unverified };

std::string to_string(SynthesisStatus status);

struct SynthesisResult {
    SynthesisStatus status = SynthesisStatus::Infeasible;
    Eigen::MatrixXd Gamma;
    double a = 1.0;
    double mu = 0.0;
    Eigen::MatrixXd G;
    double beta = 0.0;
    double varsigma = 0.0;
    double gamma_achieved = 0.0;
    bool verified = false;
    ConstraintReport constraint_report;
    int restart = -1;       // index of the restart that produced the result
    int iterations = 0;     // SQP iterations summed over exchange rounds
    int cuts = 0;           // eigenvector cuts added to the SOS-I rows
};

/// sqrt(lambda_max(N|N22) / -lambda_max(N22)) * max_K ||Db|| + osLip_K(phi_lse),
/// both sampled terms taken as certified upper bounds.
double varsigma(const PartitionedSym& N, const PolyVecd& b, const CompactSet& K, const PolyVecd& phi_lse,
                const Metric& P, int resolution = kDefaultGridResolution);

/// 1 + sqrt(lambda_max(P)).
double beta(const Metric& P);

/// (P Gamma P^-1 + P^-1 Gamma P) / 2.
Eigen::MatrixXd sos1_matrix(const Eigen::MatrixXd& Gamma, const Metric& P);

/// x^T (mu I - sos1_matrix(Gamma, P)) x.
double sos1_residual(const Eigen::MatrixXd& Gamma, double mu, const Metric& P, const Eigen::VectorXd& x);

/// p div(a phi + a Gamma x) - alpha grad(p) . (a phi + a Gamma x) as a polynomial.
Poly sos2_polynomial(const Eigen::MatrixXd& Gamma, double a, const PolyVecd& phi_lse, const Poly& p, double alpha);

double sos2_residual(const Eigen::MatrixXd& Gamma, double a, const PolyVecd& phi_lse, const Poly& p, double alpha,
                     const Eigen::VectorXd& x);

/// Minimizes mu; honors gamma_target when set.
SynthesisResult synthesize(const SynthesisProblem& problem);

/// synthesize with gamma_target cleared.
SynthesisResult synthesize_max_contraction(SynthesisProblem problem);

/// Per-axis resolution of the audit grid: ten times the point count of the
/// synthesis grid.
int dense_resolution(int resolution, int dim);

/// Re-evaluates every constraint on the dense grid plus 1e4 seeded random
/// points of K and recomputes gamma_achieved from scratch.
ConstraintReport verify(const SynthesisResult& result, const SynthesisProblem& problem);

}  // namespace ddc
