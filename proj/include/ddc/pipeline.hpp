#pragma once

// The identify -> oslip -> synthesize -> simulate -> verify pipeline behind
// the command-line tool. Each stage reads the experiment config plus the
// artifacts of earlier stages from the output directory.

#include "ddc/informativity.hpp"
#include "ddc/json_io.hpp"
#include "ddc/simkit.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace ddc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitVerification = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommandOptions {
    std::filesystem::path out = "out";
    std::optional<std::uint64_t> seed;
    bool relaxed = false;
    std::optional<int> grid;
    std::optional<int> realizations;
};

struct WindSpec {
    std::string type = "uniform";  // uniform | polynomial | none
    double lo = -1.0;
    double hi = 1.0;
    int degree = 2;
    double bound = 1.0;
    double x_lo = 0.0;
    double x_hi = 20.0;
};

struct SimSpec {
    double dt = 1e-3;
    double horizon = 10.0;
    int realizations = 20;
    double estimate_error_radius = 0.0;
    Eigen::VectorXd x0;
    WindSpec wind;
    int csv_stride = 10;
};

struct ExperimentConfig {
    Json source;
    std::uint64_t seed = 0;
    std::string system = "uav";  // uav | polynomial
    UavParams uav;
    std::optional<PolyVecd> drift;
    PolyVecd basis;
    std::vector<Sample> samples;
    std::optional<NoiseModel> noise;
    std::optional<CompactSet> K;
    std::optional<Metric> P;
    Eigen::MatrixXd B;
    Poly p_poly;
    double alpha = 1000.0;
    double M = 10.0;
    std::optional<double> gamma_target;
    int grid = kDefaultGridResolution;
    SimSpec sim;
};

/// Parses and validates every block; throws ConfigError.
ExperimentConfig parse_config(const Json& j, const CommandOptions& options = {});

/// The planar UAV study with its published constants.
Json uav_config_json();

void cmd_identify(const ExperimentConfig& cfg, const std::filesystem::path& out);
void cmd_oslip(const ExperimentConfig& cfg, const std::filesystem::path& out);
void cmd_synthesize(const ExperimentConfig& cfg, const std::filesystem::path& out, bool relaxed);
void cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Writes audit.json; throws VerificationError if any check fails.
void cmd_verify(const ExperimentConfig& cfg, const std::filesystem::path& out);
/// Full UAV pipeline plus summary.md.
void cmd_reproduce_uav(const CommandOptions& options);

/// Runs a named command and maps failures onto the exit-code contract,
/// printing a JSON error object to stderr.
int run_command(const std::string& command, const std::optional<std::filesystem::path>& config_path,
                const CommandOptions& options);

}  // namespace ddc
