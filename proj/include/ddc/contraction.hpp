#pragma once

// Contraction certificates on a compact ball K: sampled Demidovic bounds on
// the one-sided Lipschitz constant with a rigorous grid margin, the L_K bound
// of the basis, the robust contractivity test over the consistent set, and the
// closed-loop rate certificate for a fixed gain.

#include "ddc/matan.hpp"
#include "ddc/polynomial.hpp"

#include <vector>

namespace ddc {

inline constexpr int kDefaultGridResolution = 5;

/// Closed Euclidean ball {center} + B_radius.
class CompactSet {
public:
    CompactSet(Eigen::VectorXd center, double radius);

    int dim() const { return static_cast<int>(center_.size()); }
    const Eigen::VectorXd& center() const { return center_; }
    double radius() const { return radius_; }
    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
    /// Componentwise bound max_{x in K} |x_i|.
    Eigen::VectorXd abs_bound() const;

private:
    Eigen::VectorXd center_;
    double radius_;
};

/// Axis-aligned grid over the bounding box of K; grid points outside the ball
/// are projected onto it. Every x in K lies within covering_radius of a point.
struct SampleGrid {
    std::vector<Eigen::VectorXd> points;
    int resolution = 0;
    double spacing = 0.0;
    double covering_radius = 0.0;
};

SampleGrid sample_grid(const CompactSet& K, int resolution = kDefaultGridResolution);

/// Resolution whose grid contains the given one with half the spacing.
inline int refine_resolution(int resolution) { return 2 * resolution - 1; }

/// A sampled maximum with a Lipschitz safety margin: certified_upper bounds
/// the true supremum over K.
struct GridBound {
    double value = 0.0;
    double grid_spacing = 0.0;
    double margin = 0.0;
    double certified_upper = 0.0;
    Eigen::VectorXd argmax;
};

using OsLipEstimate = GridBound;

/// L such that ||J(x) - J(y)||_2 <= L ||x - y||_2 on K, from coefficient
/// magnitudes over the bounding box of K.
double jacobian_lipschitz_bound(const PolyMatrixd& J, const CompactSet& K);

OsLipEstimate oslip(const PolyVecd& f, const Metric& P, const CompactSet& K, int resolution = kDefaultGridResolution);

/// max_{x in K} ||D b(x)||_2.
GridBound basis_jacobian_sup(const PolyVecd& b, const CompactSet& K, int resolution = kDefaultGridResolution);

/// sqrt(max(lambda_max(N | N22), 0)): radius of the consistent set.
double schur_term(const PartitionedSym& N);

/// L_K = sqrt(-1 / lambda_max(N22)) * max_K ||D b||_2 (certified upper).
double l_k_bound(const PartitionedSym& N, const PolyVecd& b, const CompactSet& K,
                 int resolution = kDefaultGridResolution);

struct RobustnessCheck {
    bool pass = false;
    double slack = 0.0;  // rhs - oslip
    double oslip = 0.0;  // certified upper bound for phi_lse
    double rhs = 0.0;
    double l_k = 0.0;
    double schur = 0.0;
};

/// Passes iff osLip_K(phi_lse) < gamma - L_K sqrt(lambda_max(N|N22)) kappa(P);
/// a pass bounds the one-sided Lipschitz constant of theta^T b by gamma for
/// every theta in Z(N).
RobustnessCheck robust_contractivity_check(const PartitionedSym& N, const PolyVecd& b, const Metric& P,
                                           const CompactSet& K, double gamma, const PolyVecd& phi_lse,
                                           int resolution = kDefaultGridResolution);

enum class EllMode { EigenvalueModulus, SpectralNorm };

struct RateCertificate {
    double mu_star = 0.0;
    double ell = 0.0;           // term used in gamma_certified
    double ell_modulus = 0.0;   // sqrt(lambda_max(P)) * max |eig(BG)|
    double ell_spectral = 0.0;  // sqrt(lambda_max(P)) * ||BG||_2
    double l_k = 0.0;
    double schur_term = 0.0;
    double oslip_lse = 0.0;
    double kappa = 1.0;
    double gamma_certified = 0.0;
    double gamma_target = 0.0;
    bool pass = false;
    EllMode mode = EllMode::EigenvalueModulus;
};

/// Rate certificate for x' = f(x) + B G xbar with any estimate xbar in K.
RateCertificate closed_loop_certificate(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B, const Metric& P,
                                        const PolyVecd& phi_lse, const PartitionedSym& N, const PolyVecd& b,
                                        const CompactSet& K, double gamma, EllMode mode = EllMode::EigenvalueModulus,
                                        int resolution = kDefaultGridResolution);

/// d0 * exp(gamma * t).
double deviation_envelope(double d0, double gamma, double t);

}  // namespace ddc
