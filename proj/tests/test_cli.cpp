#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ddc/json_io.hpp"
#include "ddc/pipeline.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ddc;
namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* p = std::getenv("DDC_CLI");
    REQUIRE_MESSAGE(p != nullptr, "DDC_CLI must point at the command-line binary");
    return p;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ddc_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& s) {
    std::ofstream os(p, std::ios::binary);
    os << s;
}

int run(const std::string& args, const fs::path& err) {
    const int status = std::system((cli() + " " + args + " > /dev/null 2> " + err.string()).c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json poly_x(int dim, int var, double coef = 1.0) {
    std::vector<int> e(static_cast<std::size_t>(dim), 0);
    e[static_cast<std::size_t>(var)] = 1;
    return {{"dim", dim}, {"terms", Json::array({{{"exp", e}, {"coef", coef}}})}};
}

Json zero_poly(int dim) { return {{"dim", dim}, {"terms", Json::array()}}; }

// One state, basis [x], one sample (1, 2), Pi = diag(1, -1).
Json tiny_config() {
    return {{"system", {{"type", "polynomial"}, {"field", Json::array({poly_x(1, 0, 2.0)})}}},
            {"dataset",
             {{"basis", Json::array({poly_x(1, 0)})},
              {"samples", Json::array({{{"x", {1.0}}, {"y", {2.0}}}})},
              {"noise", {{"type", "matrix"}, {"matrix", {{1.0, 0.0}, {0.0, -1.0}}}}}}},
            {"K", {{"center", {2.0}}, {"radius", 1.0}}},
            {"B", {{1.0}}}};
}

// x1' = x2 + u1, x2' = u2 from exact data.
Json double_integrator_config(double gamma_target) {
    const Json field = Json::array({poly_x(2, 1), zero_poly(2)});
    return {{"seed", 5},
            {"system", {{"type", "polynomial"}, {"field", field}}},
            {"dataset",
             {{"basis", {{"dim", 2}, {"degree", 1}, {"include_constant", false}}},
              {"generate", {{"field", field}, {"points", 10}, {"epsilon", 0.0}}}}},
            {"K", {{"center", {1.5, 1.5}}, {"radius", 1.0}}},
            {"B", {{1.0, 0.0}, {0.0, 1.0}}},
            {"alpha", 10.0},
            {"M", 10.0},
            {"gamma_target", gamma_target},
            {"sim", {{"horizon", 0.5}, {"realizations", 3}, {"csv_stride", 50}}}};
}

fs::path write_config(const fs::path& dir, const Json& cfg) {
    const fs::path p = dir / "config.json";
    write(p, cfg.dump());
    return p;
}

std::string args(const std::string& cmd, const fs::path& cfg, const fs::path& out, const std::string& extra = "") {
    return cmd + " --config " + cfg.string() + " --out " + out.string() + (extra.empty() ? "" : " " + extra);
}

}  // namespace

TEST_CASE("identify on the tiny dataset writes N") {
    const fs::path dir = scratch("tiny");
    const fs::path cfg = write_config(dir, tiny_config());
    REQUIRE(run(args("identify", cfg, dir / "out"), dir / "err") == kExitOk);
    const PartitionedSym N = partitioned_from_json(Json::parse(slurp(dir / "out" / "N.json")));
    Eigen::Matrix2d expected;
    expected << -3, 2, 2, -1;
    CHECK(N.matrix().isApprox(Eigen::MatrixXd(expected)));
    const Json theta = Json::parse(slurp(dir / "out" / "theta_lse.json"));
    CHECK(theta.at("theta")[0][0].get<double>() == doctest::Approx(2.0));
}

TEST_CASE("zero-noise identification recovers the generator") {
    const fs::path dir = scratch("zero");
    const fs::path cfg = write_config(dir, double_integrator_config(-0.5));
    REQUIRE(run(args("identify", cfg, dir / "out"), dir / "err") == kExitOk);
    const Eigen::MatrixXd theta = matrix_from_json(Json::parse(slurp(dir / "out" / "theta_lse.json")).at("theta"));
    Eigen::Matrix2d expected;
    expected << 0, 0, 1, 0;
    CHECK((theta - expected).cwiseAbs().maxCoeff() <= 1e-8);
    const Json diag = Json::parse(slurp(dir / "out" / "diagnostics.json"));
    CHECK(diag.at("full_rank").get<bool>());
}

TEST_CASE("rank-deficient data warns but succeeds") {
    const fs::path dir = scratch("rank");
    Json cfg = tiny_config();
    cfg["dataset"]["basis"] = {{"dim", 1}, {"degree", 2}, {"include_constant", true}};
    cfg["dataset"]["samples"] = Json::array({{{"x", {1.0}}, {"y", {2.0}}}, {{"x", {1.0}}, {"y", {2.0}}}});
    cfg["dataset"]["noise"] = {{"type", "energy"}, {"epsilon", 0.1}};
    REQUIRE(run(args("identify", write_config(dir, cfg), dir / "out"), dir / "err") == kExitOk);
    const Json diag = Json::parse(slurp(dir / "out" / "diagnostics.json"));
    CHECK_FALSE(diag.at("full_rank").get<bool>());
    CHECK_FALSE(diag.at("warnings").empty());
    CHECK(slurp(dir / "err").find("warning") != std::string::npos);
}

TEST_CASE("invalid configurations exit 2 with a JSON error") {
    const fs::path dir = scratch("invalid");
    write(dir / "broken.json", "{ not json");
    CHECK(run("identify --config " + (dir / "broken.json").string() + " --out " + (dir / "out").string(), dir / "err") ==
          kExitInvalidConfig);
    const Json err = Json::parse(slurp(dir / "err"));
    CHECK(err.at("exit_code").get<int>() == kExitInvalidConfig);
    CHECK(err.at("error").get<std::string>() == "invalid_config");

    Json cfg = tiny_config();
    cfg["K"]["radius"] = -1.0;
    CHECK(run(args("identify", write_config(dir, cfg), dir / "out"), dir / "err") == kExitInvalidConfig);

    cfg = double_integrator_config(-0.5);
    cfg["alpha"] = 0.0;
    CHECK(run(args("identify", write_config(dir, cfg), dir / "out"), dir / "err") == kExitInvalidConfig);

    cfg = double_integrator_config(-0.5);
    cfg["sim"]["estimate_error_radius"] = 2.0;
    CHECK(run(args("identify", write_config(dir, cfg), dir / "out"), dir / "err") == kExitInvalidConfig);

    CHECK(run("identify --out " + (dir / "out").string(), dir / "err") == kExitInvalidConfig);
    CHECK(run("no-such-command", dir / "err") == kExitInvalidConfig);
}

TEST_CASE("stages need their upstream artifacts") {
    const fs::path dir = scratch("upstream");
    const fs::path cfg = write_config(dir, double_integrator_config(-0.5));
    CHECK(run(args("oslip", cfg, dir / "out"), dir / "err") == kExitInvalidConfig);
    CHECK(run(args("simulate", cfg, dir / "out"), dir / "err") == kExitInvalidConfig);
}

TEST_CASE("unreachable target exits 3") {
    const fs::path dir = scratch("infeasible");
    Json c = double_integrator_config(-1000.0);
    c["M"] = 1.0;
    const fs::path cfg = write_config(dir, c);
    REQUIRE(run(args("identify", cfg, dir / "out"), dir / "err") == kExitOk);
    CHECK(run(args("synthesize", cfg, dir / "out"), dir / "err") == kExitInfeasible);
    CHECK(Json::parse(slurp(dir / "err")).at("error").get<std::string>() == "infeasible");
    CHECK_FALSE(fs::exists(dir / "out" / "gain.json"));
}

TEST_CASE("full pipeline, idempotence and tamper detection") {
    const fs::path dir = scratch("pipeline");
    const fs::path cfg = write_config(dir, double_integrator_config(-0.5));
    const fs::path out = dir / "out";
    for (const char* cmd : {"identify", "oslip", "synthesize", "simulate", "verify"}) {
        CAPTURE(cmd);
        REQUIRE(run(args(cmd, cfg, out), dir / "err") == kExitOk);
    }
    for (const char* f : {"N.json", "theta_lse.json", "phi_lse.json", "diagnostics.json", "oslip.json", "synthesis.json",
                          "gain.json", "manifest.json", "trajectory.csv", "deviation.csv", "report.json", "audit.json"}) {
        CHECK_MESSAGE(fs::exists(out / f), f);
    }
    const Json syn = Json::parse(slurp(out / "synthesis.json"));
    CHECK(syn.at("mode").get<std::string>() == "target");
    CHECK(syn.at("result").at("gamma_achieved").get<double>() <= -0.5);
    CHECK(Json::parse(slurp(out / "audit.json")).at("pass").get<bool>());

    // Re-running a stage reproduces its bytes.
    const std::string gain = slurp(out / "gain.json");
    const std::string report = slurp(out / "report.json");
    REQUIRE(run(args("synthesize", cfg, out), dir / "err") == kExitOk);
    REQUIRE(run(args("simulate", cfg, out), dir / "err") == kExitOk);
    CHECK(slurp(out / "gain.json") == gain);
    CHECK(slurp(out / "report.json") == report);

    // Every single-byte corruption of gain.json is caught.
    for (std::size_t pos : {std::size_t{0}, gain.size() / 3, gain.size() / 2, gain.size() - 2}) {
        std::string bad = gain;
        bad[pos] = bad[pos] == '7' ? '8' : '7';
        write(out / "gain.json", bad);
        CAPTURE(pos);
        CHECK(run(args("verify", cfg, out), dir / "err") == kExitVerification);
        CHECK_FALSE(Json::parse(slurp(out / "audit.json")).at("pass").get<bool>());
    }
    write(out / "gain.json", gain);
    CHECK(run(args("verify", cfg, out), dir / "err") == kExitOk);

    // A stored certificate that no longer matches the data is caught too.
    Json tampered = syn;
    tampered["result"]["Gamma"][0][0] = -tampered["result"]["Gamma"][0][0].get<double>();
    write(out / "synthesis.json", dump(tampered));
    CHECK(run(args("verify", cfg, out), dir / "err") == kExitVerification);
}

TEST_CASE("relaxed flag and overrides") {
    const fs::path dir = scratch("relaxed");
    const fs::path cfg = write_config(dir, double_integrator_config(-0.5));
    const fs::path out = dir / "out";
    REQUIRE(run(args("identify", cfg, out), dir / "err") == kExitOk);
    REQUIRE(run(args("synthesize", cfg, out, "--relaxed --grid 4"), dir / "err") == kExitOk);
    const Json syn = Json::parse(slurp(out / "synthesis.json"));
    CHECK(syn.at("mode").get<std::string>() == "relaxed");
    REQUIRE(run(args("simulate", cfg, out, "--realizations 2 --seed 9"), dir / "err") == kExitOk);
    CHECK(Json::parse(slurp(out / "report.json")).at("realization_count").get<int>() == 2);
}

TEST_CASE("reproduce-uav writes the summary") {
    const fs::path dir = scratch("uav");
    const int code = run("reproduce-uav --realizations 2 --out " + (dir / "out").string(), dir / "err");
    CHECK((code == kExitOk || code == kExitVerification));
    CHECK(fs::exists(dir / "out" / "config.json"));
    const std::string summary = slurp(dir / "out" / "summary.md");
    CHECK(summary.find("osLip") != std::string::npos);
    CHECK(summary.find("envelope violations") != std::string::npos);
}
