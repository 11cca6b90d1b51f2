#pragma once

// Closed-loop simulation: the planar UAV in wind, fixed-step RK4, seeded
// Monte Carlo ensembles, contraction-envelope and robust-stability checks.

#include "ddc/contraction.hpp"
#include "ddc/polynomial.hpp"
#include "ddc/rng.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddc {

/// State (x, y, xdot, ydot); wind v_w is a polynomial in x alone.
struct UavParams {
    double c_d = 1e-2;
    double c_w = 1e-2;
    Poly wind = Poly(1);
};

Eigen::VectorXd uav_field(const Eigen::VectorXd& state, const Eigen::VectorXd& u, const UavParams& params);

/// The windless, uncontrolled UAV field (xdot, ydot, c_d (xdot^2 + ydot^2), 0).
PolyVecd uav_nominal_field(double c_d);

/// x' = drift(x) + B u.
struct Plant {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> drift;
    Eigen::MatrixXd B;
};

Plant uav_plant(const UavParams& params);
Plant polynomial_plant(const PolyVecd& f, const Eigen::MatrixXd& B);

struct SimConfig {
    Eigen::VectorXd x0;
    double dt = 1e-3;
    double horizon = 10.0;
    Eigen::MatrixXd gain;
    double estimate_error_radius = 0.0;
    std::uint64_t seed = 0;
    int realizations = 20;
};

void validate_sim_config(const SimConfig& config, const CompactSet& K);

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> controls;  // empty for autonomous runs
    bool diverged = false;
};

/// Classical RK4 at fixed step; stops early if the state becomes non-finite.
Trajectory integrate(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field, const Eigen::VectorXd& x0,
                     double dt, double horizon);

/// u = G xbar with xbar = x + e; e is drawn once per step from the ball of
/// radius estimate_error_radius and xbar is clipped into K while x is in K.
Trajectory closed_loop(const Plant& plant, const SimConfig& config, const CompactSet& K, SplitMix64& rng);
Trajectory closed_loop(const UavParams& params, const Eigen::MatrixXd& G, const SimConfig& config, const CompactSet& K);

struct Perturbation {
    Plant plant;
    double wind = 0.0;  // constant wind level, informational
};

/// Draws the off-nominal plant of one realization from its own stream.
using PlantSampler = std::function<Perturbation(SplitMix64&)>;

/// Constant wind uniform in [lo, hi].
PlantSampler uniform_wind_sampler(const UavParams& base, double lo, double hi);

/// Wind polynomial of the given degree in x with random coefficients, scaled
/// so that |v_w| <= bound on [x_lo, x_hi].
PlantSampler polynomial_wind_sampler(const UavParams& base, int degree, double bound, double x_lo, double x_hi);

/// Same plant for every realization; only x0 varies.
PlantSampler fixed_plant_sampler(const Plant& plant);

struct Violation {
    int realization = 0;
    double time = 0.0;
    double excess = 0.0;
};

struct Realization {
    Eigen::VectorXd x0;
    double wind = 0.0;
    double d0 = 0.0;
    Trajectory trajectory;
    std::vector<double> deviation;  // ||x(t) - x_nom(t)||_inf
    std::vector<double> envelope;   // d0 exp(gamma t)
    bool left_k = false;            // envelope check inconclusive after exit
    double checked_until = 0.0;
    int violation_samples = 0;
};

struct DeviationReport {
    Trajectory nominal;
    std::vector<Realization> realizations;
    std::vector<Violation> violations;  // worst sample of each violating realization
    double gamma = 0.0;
    int inconclusive = 0;
};

inline constexpr double kEnvelopeSlack = 1e-6;
inline constexpr double kMinDecayExponent = 1e-6;

/// Nominal run from config.x0 and `realizations` off-nominal runs with x0
/// uniform in K. The result depends only on (inputs, seed), never on the
/// number of worker threads.
DeviationReport monte_carlo(const Plant& nominal, const PlantSampler& sampler, const SimConfig& config,
                            const CompactSet& K, double gamma, unsigned workers = 0);

/// One off-nominal run from x0 compared against the nominal trajectory.
Realization run_realization(const Plant& plant, const SimConfig& config, const CompactSet& K,
                            const Trajectory& nominal, const Eigen::VectorXd& x0, double gamma, SplitMix64& rng);

struct DecayFit {
    bool ok = false;
    double alpha = 0.0;       // used rate
    double regression = 0.0;  // tail log-linear slope, negated
    double cap = 0.0;         // min_t -ln(|x(t)| / |x(0)|) / t
    std::string reason;
};

/// Decay rate of ||x_nom(t)||_2: regression on the second half, capped so that
/// ||x_nom(t)|| <= ||x_nom(0)|| exp(-alpha t) holds at every sample.
DecayFit fit_decay_rate(const Trajectory& nominal);

struct StabilityCheck {
    bool conclusive = false;
    bool all_pass = false;
    DecayFit fit;
    double rate = 0.0;
    std::vector<bool> pass;
    std::vector<double> worst_excess;
};

/// ||x(t)|| <= (||x(0) - x_nom(0)|| + ||x(0)||) exp(-min(alpha_stab, |gamma|) t) + 1e-6.
StabilityCheck robust_stability_check(const DeviationReport& report, double gamma);

/// t,x,y,xdot,ydot,u1,u2 for the UAV; generic names otherwise.
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory, int stride = 1);
/// t,dev_inf,envelope,realization.
void write_deviation_csv(std::ostream& os, const DeviationReport& report, int stride = 1);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace ddc
