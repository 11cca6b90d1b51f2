#include "ddc/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace ddc {

namespace fs = std::filesystem;

namespace {

// Published UAV values the reproduction is compared against.
constexpr double kReferenceOslip = 0.190;
constexpr double kReferenceOslipTol = 0.02;
constexpr double kReferenceMu = -0.141;
constexpr double kReferenceMuLo = -0.20;
constexpr double kReferenceMuHi = -0.10;
constexpr double kReferenceGainTol = 0.5;
constexpr double kReferenceGain[2][4] = {{-3.142, 0.015, -3.365, 0.473}, {-0.017, -3.179, 0.473, -3.365}};
constexpr std::uint64_t kDefaultUavSeed = 1;
constexpr double kAuditTolerance = 1e-6;

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << bytes;
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("missing upstream artifact " + path.filename().string() + " in " + path.parent_path().string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Json read_json(const fs::path& path) {
    const std::string bytes = read_file(path);
    try {
        return Json::parse(bytes);
    } catch (const Json::exception& e) {
        throw ConfigError(path.filename().string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const Json& j) { write_file(path, dump(j)); }

std::string fixed(double v, int digits = 4) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

PolyVecd parse_basis(const Json& j) {
    if (j.is_array()) return polyvec_from_json(j);
    return monomial_basis(j.at("dim").get<int>(), j.at("degree").get<int>(), j.value("include_constant", true));
}

// Coefficients of `field` over a basis of unit monomials.
Eigen::MatrixXd coefficients_in_basis(const PolyVecd& field, const PolyVecd& basis) {
    std::map<Monomial, int> index;
    for (int i = 0; i < basis.size(); ++i) {
        const auto& terms = basis[i].terms();
        if (terms.size() == 1 && terms.begin()->second == 1.0) index.emplace(terms.begin()->first, i);
    }
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(basis.size(), field.size());
    for (int j = 0; j < field.size(); ++j) {
        for (const auto& [m, c] : field[j].terms()) {
            const auto it = index.find(m);
            if (it == index.end()) throw ConfigError("dataset.generate: field is not in the span of the basis");
            theta(it->second, j) = c;
        }
    }
    return theta;
}

WindSpec parse_wind(const Json& j) {
    WindSpec w;
    w.type = j.value("type", std::string("uniform"));
    if (w.type == "uniform") {
        w.lo = j.value("lo", -1.0);
        w.hi = j.value("hi", 1.0);
        if (!(w.lo <= w.hi)) throw ConfigError("sim.wind: lo must be <= hi");
    } else if (w.type == "polynomial") {
        w.degree = j.value("degree", 2);
        w.bound = j.value("bound", 1.0);
        w.x_lo = j.value("x_lo", 0.0);
        w.x_hi = j.value("x_hi", 20.0);
        if (w.degree < 0 || w.degree > kMaxPolynomialDegree || w.bound < 0.0 || !(w.x_lo < w.x_hi)) {
            throw ConfigError("sim.wind: invalid polynomial wind block");
        }
    } else if (w.type != "none") {
        throw ConfigError("sim.wind: unknown type " + w.type);
    }
    return w;
}

ExperimentConfig parse_config_impl(const Json& j, const CommandOptions& opt) {
    ExperimentConfig c;
    c.source = j;
    c.seed = opt.seed ? *opt.seed : j.value("seed", std::uint64_t{0});

    const Json sys = j.value("system", Json{{"type", "uav"}});
    c.system = sys.value("type", std::string("uav"));
    if (c.system == "uav") {
        c.uav.c_d = sys.value("c_d", 1e-2);
        c.uav.c_w = sys.value("c_w", 1e-2);
        if (!std::isfinite(c.uav.c_d) || !std::isfinite(c.uav.c_w)) throw ConfigError("system: non-finite coefficients");
    } else if (c.system == "polynomial") {
        c.drift = polyvec_from_json(sys.at("field"));
        if (c.drift->size() != c.drift->dim()) throw ConfigError("system.field must be a square vector field");
    } else {
        throw ConfigError("system: unknown type " + c.system);
    }

    if (!j.contains("K")) throw ConfigError("config: missing K block");
    c.K = compact_set_from_json(j.at("K"));
    const int n = c.K->dim();
    if (c.system == "uav" && n != 4) throw ConfigError("K: the UAV has 4 states");
    if (c.drift && c.drift->dim() != n) throw ConfigError("system.field dimension does not match K");

    c.P = j.contains("P") ? Metric(matrix_from_json(j.at("P"))) : Metric::identity(n);
    if (c.P->dim() != n) throw ConfigError("P: dimension does not match K");
    if (j.contains("B")) {
        c.B = matrix_from_json(j.at("B"));
    } else if (c.system == "uav") {
        c.B = uav_plant(c.uav).B;
    } else {
        throw ConfigError("config: missing B");
    }
    if (c.B.rows() != n || numerical_rank(c.B) != c.B.cols()) throw ConfigError("B: must be n x m with full column rank");
    c.p_poly = j.contains("p_poly") ? poly_from_json(j.at("p_poly")) : squared_norm(n);
    c.alpha = j.value("alpha", 1000.0);
    c.M = j.value("M", 10.0);
    if (j.contains("gamma_target") && !j.at("gamma_target").is_null()) c.gamma_target = j.at("gamma_target").get<double>();
    c.grid = opt.grid ? *opt.grid : j.value("grid", kDefaultGridResolution);
    if (c.grid < 2) throw ConfigError("grid: resolution must be >= 2");
    if (!(c.alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(c.M > 0.0)) throw ConfigError("M must be > 0");
    if (c.gamma_target && !(*c.gamma_target < 0.0)) throw ConfigError("gamma_target must be < 0");
    if (c.p_poly.dim() != n) throw ConfigError("p_poly: dimension does not match K");
    for (const auto& x : sample_grid(*c.K, c.grid).points) {
        if (!(c.p_poly.eval(x) > 0.0)) throw ConfigError("p_poly must be positive on K");
    }

    const Json& ds = j.at("dataset");
    c.basis = parse_basis(ds.at("basis"));
    if (c.basis.dim() != n) throw ConfigError("dataset.basis: dimension does not match K");
    if (ds.contains("generate")) {
        const Json& g = ds.at("generate");
        const Json& field_spec = g.at("field");
        const PolyVecd field = field_spec.is_string() && field_spec.get<std::string>() == "uav"
                                   ? uav_nominal_field(c.uav.c_d)
                                   : polyvec_from_json(field_spec);
        if (field.dim() != n) throw ConfigError("dataset.generate.field: dimension does not match K");
        const int count = g.value("points", 50);
        if (count < n) throw ConfigError("dataset.generate.points must be >= n");
        const std::uint64_t seed = g.value("seed", c.seed);
        SplitMix64 rng = SplitMix64::stream(seed, 0x444154ULL);
        std::vector<Eigen::VectorXd> points;
        for (int i = 0; i < count; ++i) points.push_back(c.K->center() + rng.uniform_ball(n, c.K->radius()));
        GeneratedData data =
            generate_dataset(coefficients_in_basis(field, c.basis), c.basis, points, g.value("epsilon", 0.0), seed);
        c.samples = std::move(data.samples);
        c.noise = std::move(data.noise);
    } else {
        for (const auto& s : ds.at("samples")) c.samples.push_back({vector_from_json(s.at("x")), vector_from_json(s.at("y"))});
        if (c.samples.empty()) throw ConfigError("dataset.samples: empty");
        const Json& nz = ds.at("noise");
        const std::string type = nz.value("type", std::string("energy"));
        const int T = static_cast<int>(c.samples.size());
        const int ny = static_cast<int>(c.samples.front().y.size());
        if (type == "energy") {
            c.noise = energy_noise_model(ny, T, nz.at("epsilon").get<double>());
        } else if (type == "matrix") {
            c.noise = validate_noise_model(PartitionedSym(matrix_from_json(nz.at("matrix")), ny));
        } else {
            throw ConfigError("dataset.noise: unknown type " + type);
        }
        if (c.noise->sample_count() != T) throw ConfigError("dataset.noise: size does not match the sample count");
        for (const auto& s : c.samples) {
            if (s.x.size() != n || s.y.size() != n) throw ConfigError("dataset.samples: dimension mismatch");
        }
    }

    const Json sim = j.value("sim", Json::object());
    c.sim.dt = sim.value("dt", 1e-3);
    c.sim.horizon = sim.value("horizon", 10.0);
    c.sim.realizations = opt.realizations ? *opt.realizations : sim.value("realizations", 20);
    c.sim.estimate_error_radius = sim.value("estimate_error_radius", 0.0);
    c.sim.x0 = sim.contains("x0") ? vector_from_json(sim.at("x0")) : c.K->center();
    c.sim.wind = parse_wind(sim.value("wind", Json::object()));
    c.sim.csv_stride = sim.value("csv_stride", 10);
    if (c.sim.csv_stride < 1) throw ConfigError("sim.csv_stride must be >= 1");
    SimConfig probe{c.sim.x0, c.sim.dt, c.sim.horizon, Eigen::MatrixXd::Zero(c.B.cols(), n), c.sim.estimate_error_radius,
                    c.seed, c.sim.realizations};
    validate_sim_config(probe, *c.K);
    return c;
}

struct Identified {
    PartitionedSym N;
    Eigen::MatrixXd theta;
    PolyVecd phi;
};

Identified load_identified(const ExperimentConfig& cfg, const fs::path& out) {
    PartitionedSym N = partitioned_from_json(read_json(out / "N.json"));
    Eigen::MatrixXd theta = matrix_from_json(read_json(out / "theta_lse.json").at("theta"));
    if (theta.rows() != cfg.basis.size()) throw ConfigError("theta_lse.json does not match the configured basis");
    PolyVecd phi = combine(theta, cfg.basis);
    return {std::move(N), std::move(theta), std::move(phi)};
}

SynthesisProblem make_problem(const ExperimentConfig& cfg, const Identified& id, bool relaxed) {
    SynthesisProblem p{*cfg.P, *cfg.K, cfg.B, id.phi, id.N, cfg.basis, cfg.gamma_target, cfg.p_poly,
                       cfg.alpha, cfg.M, cfg.grid, cfg.seed};
    if (relaxed) p.gamma_target.reset();
    return p;
}

Plant nominal_plant(const ExperimentConfig& cfg) {
    if (cfg.system == "uav") {
        UavParams p = cfg.uav;
        p.wind = Poly::constant(1, 0.0);
        return uav_plant(p);
    }
    return polynomial_plant(*cfg.drift, cfg.B);
}

PlantSampler make_sampler(const ExperimentConfig& cfg) {
    if (cfg.system != "uav" || cfg.sim.wind.type == "none") return fixed_plant_sampler(nominal_plant(cfg));
    const WindSpec& w = cfg.sim.wind;
    if (w.type == "polynomial") return polynomial_wind_sampler(cfg.uav, w.degree, w.bound, w.x_lo, w.x_hi);
    return uniform_wind_sampler(cfg.uav, w.lo, w.hi);
}

struct Simulation {
    DeviationReport report;
    StabilityCheck stability;
};

Simulation simulate(const ExperimentConfig& cfg, const Eigen::MatrixXd& G, double gamma) {
    SimConfig sc{cfg.sim.x0, cfg.sim.dt, cfg.sim.horizon, G, cfg.sim.estimate_error_radius, cfg.seed, cfg.sim.realizations};
    Simulation s;
    s.report = monte_carlo(nominal_plant(cfg), make_sampler(cfg), sc, *cfg.K, gamma);
    s.stability = robust_stability_check(s.report, gamma);
    return s;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

void update_manifest(const fs::path& out, const std::vector<std::string>& files) {
    Json m = fs::exists(out / "manifest.json") ? read_json(out / "manifest.json") : Json::object();
    for (const auto& f : files) m[f] = fnv1a_hex(read_file(out / f));
    write_json(out / "manifest.json", m);
}

}  // namespace

ExperimentConfig parse_config(const Json& j, const CommandOptions& options) {
    try {
        return parse_config_impl(j, options);
    } catch (const ConfigError&) {
        throw;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

Json uav_config_json() {
    return {{"seed", kDefaultUavSeed},
            {"system", {{"type", "uav"}, {"c_d", 1e-2}, {"c_w", 1e-2}}},
            {"dataset",
             {{"basis", {{"dim", 4}, {"degree", 2}, {"include_constant", true}}},
              {"generate", {{"field", "uav"}, {"points", 50}, {"epsilon", 0.0}, {"seed", kDefaultUavSeed}}}}},
            {"K", {{"center", {10.0, 10.0, 1.0, 0.1}}, {"radius", 1.0}}},
            {"P", {{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}}},
            {"B", {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}},
            {"p_poly", to_json(squared_norm(4))},
            {"alpha", 1000.0},
            {"M", 10.0},
            {"gamma_target", nullptr},
            {"grid", kDefaultGridResolution},
            {"sim",
             {{"dt", 1e-3},
              {"horizon", 10.0},
              {"realizations", 20},
              {"estimate_error_radius", 0.0},
              {"x0", {10.0, 10.0, 1.0, 0.1}},
              {"wind", {{"type", "uniform"}, {"lo", -1.0}, {"hi", 1.0}}},
              {"csv_stride", 10}}}};
}

void cmd_identify(const ExperimentConfig& cfg, const fs::path& out) {
    fs::create_directories(out);
    const DataBundle b = identify(cfg.samples, cfg.basis, *cfg.noise);
    write_json(out / "N.json", to_json(b.N));
    write_json(out / "theta_lse.json", {{"theta", matrix_to_json(b.theta_lse)}});
    write_json(out / "phi_lse.json", to_json(b.phi_lse));
    const auto [lo22, hi22] = eig_extremes(b.N.a22());
    Json diag = {{"samples", b.samples.size()},
                 {"state_dim", b.N.split()},
                 {"basis_size", b.basis.size()},
                 {"phi_rank", b.phi_rank},
                 {"full_rank", b.full_rank},
                 {"n22_lambda_min", lo22},
                 {"n22_lambda_max", hi22},
                 {"schur_lambda_max", lambda_max(schur_complement(b.N))},
                 {"warnings", b.warnings}};
    write_json(out / "diagnostics.json", diag);
    for (const auto& w : b.warnings) std::cerr << "warning: " << w << "\n";
}

void cmd_oslip(const ExperimentConfig& cfg, const fs::path& out) {
    const Identified id = load_identified(cfg, out);
    Json j;
    j["grid"] = cfg.grid;
    j["grid_points"] = sample_grid(*cfg.K, cfg.grid).points.size();
    j["oslip"] = to_json(oslip(id.phi, *cfg.P, *cfg.K, cfg.grid));
    j["basis_jacobian_sup"] = to_json(basis_jacobian_sup(cfg.basis, *cfg.K, cfg.grid));
    j["schur_term"] = schur_term(id.N);
    j["beta"] = beta(*cfg.P);
    if (lambda_max(id.N.a22()) < 0.0) {
        j["l_k"] = l_k_bound(id.N, cfg.basis, *cfg.K, cfg.grid);
        j["varsigma"] = varsigma(id.N, cfg.basis, *cfg.K, id.phi, *cfg.P, cfg.grid);
        if (cfg.gamma_target) {
            j["robust_check"] =
                to_json(robust_contractivity_check(id.N, cfg.basis, *cfg.P, *cfg.K, *cfg.gamma_target, id.phi, cfg.grid));
        }
    } else {
        j["l_k"] = nullptr;
        j["varsigma"] = nullptr;
        j["warning"] = "N22 is not negative definite; L_K is undefined";
    }
    write_json(out / "oslip.json", j);
}

void cmd_synthesize(const ExperimentConfig& cfg, const fs::path& out, bool relaxed) {
    const Identified id = load_identified(cfg, out);
    const SynthesisProblem problem = make_problem(cfg, id, relaxed || !cfg.gamma_target);
    const SynthesisResult res = synthesize(problem);
    Json j = {{"mode", problem.gamma_target ? "target" : "relaxed"}, {"result", to_json(res)}};
    if (res.status != SynthesisStatus::Infeasible) {
        const double gamma = problem.gamma_target ? *problem.gamma_target : res.gamma_achieved;
        j["certificate"] = to_json(closed_loop_certificate(res.G, cfg.B, *cfg.P, id.phi, id.N, cfg.basis, *cfg.K, gamma,
                                                           EllMode::EigenvalueModulus, cfg.grid));
        j["certificate_spectral"] = to_json(closed_loop_certificate(res.G, cfg.B, *cfg.P, id.phi, id.N, cfg.basis, *cfg.K,
                                                                    gamma, EllMode::SpectralNorm, cfg.grid));
    }
    write_json(out / "synthesis.json", j);
    if (res.status == SynthesisStatus::Infeasible) {
        update_manifest(out, {"synthesis.json"});
        throw InfeasibleError("no certificate found from any restart");
    }
    write_json(out / "gain.json", {{"G", matrix_to_json(res.G)}});
    update_manifest(out, {"synthesis.json", "gain.json"});
    if (res.status == SynthesisStatus::Unverified) throw VerificationError("synthesized certificate failed dense-grid verification");
}

void cmd_simulate(const ExperimentConfig& cfg, const fs::path& out) {
    const Eigen::MatrixXd G = matrix_from_json(read_json(out / "gain.json").at("G"));
    const double gamma = read_json(out / "synthesis.json").at("result").at("gamma_achieved").get<double>();
    if (G.rows() != cfg.B.cols() || G.cols() != cfg.K->dim()) throw ConfigError("gain.json has the wrong shape");
    const Simulation s = simulate(cfg, G, gamma);
    {
        std::ostringstream os;
        write_trajectory_csv(os, s.report.nominal, cfg.sim.csv_stride);
        write_file(out / "trajectory.csv", os.str());
    }
    {
        std::ostringstream os;
        write_deviation_csv(os, s.report, cfg.sim.csv_stride);
        write_file(out / "deviation.csv", os.str());
    }
    write_json(out / "report.json", to_json(s.report, s.stability));
}

void cmd_verify(const ExperimentConfig& cfg, const fs::path& out) {
    Json checks = Json::array();
    bool all = true;
    auto record = [&](const std::string& name, bool pass, Json detail) {
        all = all && pass;
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", std::move(detail)}});
    };
    auto guarded = [&](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            record(name, false, {{"error", e.what()}});
        }
    };

    const DataBundle b = identify(cfg.samples, cfg.basis, *cfg.noise);
    guarded("identify", [&] {
        const PartitionedSym N = partitioned_from_json(read_json(out / "N.json"));
        const Eigen::MatrixXd theta = matrix_from_json(read_json(out / "theta_lse.json").at("theta"));
        const double dN = rel_diff(N.matrix(), b.N.matrix());
        const double dT = rel_diff(theta, b.theta_lse);
        record("identify", dN <= kAuditTolerance && dT <= kAuditTolerance, {{"N_diff", dN}, {"theta_diff", dT}});
    });
    const PolyVecd phi = b.phi_lse;

    if (fs::exists(out / "oslip.json")) {
        guarded("oslip", [&] {
            const double stored = read_json(out / "oslip.json").at("oslip").at("certified_upper").get<double>();
            const double fresh = oslip(phi, *cfg.P, *cfg.K, cfg.grid).certified_upper;
            const double d = rel_diff(stored, fresh);
            record("oslip", d <= kAuditTolerance, {{"stored", stored}, {"recomputed", fresh}, {"diff", d}});
        });
    }

    if (fs::exists(out / "synthesis.json")) {
        guarded("manifest", [&] {
            const Json m = read_json(out / "manifest.json");
            bool ok = true;
            Json detail = Json::object();
            for (const std::string f : {"synthesis.json", "gain.json"}) {
                if (!m.contains(f)) continue;
                const std::string h = fnv1a_hex(read_file(out / f));
                detail[f] = {{"stored", m.at(f)}, {"recomputed", h}};
                ok = ok && h == m.at(f).get<std::string>();
            }
            record("manifest", ok, detail);
        });
        guarded("synthesis", [&] {
            const Json sj = read_json(out / "synthesis.json");
            const SynthesisResult res = result_from_json(sj.at("result"));
            if (res.status == SynthesisStatus::Infeasible) {
                record("synthesis", false, {{"status", "infeasible"}});
                return;
            }
            const bool relaxed = sj.at("mode").get<std::string>() == "relaxed";
            const Identified id{b.N, b.theta_lse, phi};
            const SynthesisProblem problem = make_problem(cfg, id, relaxed);
            const ConstraintReport rep = verify(res, problem);
            const Eigen::MatrixXd G_file = matrix_from_json(read_json(out / "gain.json").at("G"));
            const Eigen::MatrixXd G_fresh = pinv(cfg.B) * res.Gamma / res.a;
            const double dG = rel_diff(G_file, G_fresh);
            const double dGs = rel_diff(G_file, res.G);
            record("synthesis",
                   rep.verified && dG <= kAuditTolerance && dGs <= kAuditTolerance,
                   {{"verified", rep.verified},
                    {"gamma_stored", res.gamma_achieved},
                    {"gamma_recomputed", rep.gamma_recomputed},
                    {"gain_vs_gamma_diff", dG},
                    {"gain_vs_result_diff", dGs},
                    {"report", to_json(rep)}});
        });
    }

    if (fs::exists(out / "report.json")) {
        guarded("simulate", [&] {
            const Json stored = read_json(out / "report.json");
            const Eigen::MatrixXd G = matrix_from_json(read_json(out / "gain.json").at("G"));
            const double gamma = read_json(out / "synthesis.json").at("result").at("gamma_achieved").get<double>();
            const Simulation s = simulate(cfg, G, gamma);
            const Json fresh = to_json(s.report, s.stability);
            record("simulate", fresh == stored,
                   {{"violation_count_stored", stored.at("violation_count")},
                    {"violation_count_recomputed", fresh.at("violation_count")}});
        });
    }

    write_json(out / "audit.json", {{"pass", all}, {"checks", checks}});
    if (!all) throw VerificationError("audit failed; see audit.json");
}

namespace {

void write_summary(const fs::path& out) {
    const Json os = read_json(out / "oslip.json");
    const Json sj = read_json(out / "synthesis.json");
    const Json rep = fs::exists(out / "report.json") ? read_json(out / "report.json") : Json();
    const Json audit = fs::exists(out / "audit.json") ? read_json(out / "audit.json") : Json();

    const double oslip_value = os.at("oslip").at("value").get<double>();
    const double oslip_upper = os.at("oslip").at("certified_upper").get<double>();
    std::ostringstream md;
    md << "# UAV reproduction summary\n\n";
    md << "| quantity | computed | reference | match |\n";
    md << "|---|---|---|---|\n";
    md << "| osLip_K(f_nom) | " << fixed(oslip_value) << " (certified <= " << fixed(oslip_upper) << ") | "
       << fixed(kReferenceOslip, 3) << " +/- " << fixed(kReferenceOslipTol, 2) << " | "
       << (std::abs(oslip_value - kReferenceOslip) <= kReferenceOslipTol ? "yes" : "no") << " |\n";

    const Json& res = sj.at("result");
    if (res.at("status").get<std::string>() != "infeasible") {
        const double mu = res.at("mu").get<double>();
        md << "| mu* | " << fixed(mu) << " | " << fixed(kReferenceMu, 3) << " in [" << fixed(kReferenceMuLo, 2) << ", "
           << fixed(kReferenceMuHi, 2) << "] | " << (mu >= kReferenceMuLo && mu <= kReferenceMuHi ? "yes" : "no") << " |\n";
        const Eigen::MatrixXd G = matrix_from_json(res.at("G"));
        double dev = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 4; ++k) dev = std::max(dev, std::abs(G(i, k) - kReferenceGain[i][k]));
        md << "| max gain entry deviation | " << fixed(dev) << " | <= " << fixed(kReferenceGainTol, 1) << " | "
           << (dev <= kReferenceGainTol ? "yes" : "no") << " |\n";
        md << "| gamma_achieved | " << fixed(res.at("gamma_achieved").get<double>()) << " | - | - |\n";
        md << "| certificate verified | " << (res.at("verified").get<bool>() ? "yes" : "no") << " | yes | "
           << (res.at("verified").get<bool>() ? "yes" : "no") << " |\n";
    } else {
        md << "| mu* | infeasible | " << fixed(kReferenceMu, 3) << " | no |\n";
    }
    if (!rep.is_null()) {
        const auto violations = rep.at("violation_count").get<int>();
        md << "| envelope violations | " << violations << " of " << rep.at("realization_count").get<int>() << " | 0 | "
           << (violations == 0 ? "yes" : "no") << " |\n";
        const Json& st = rep.at("robust_stability");
        const std::string stab = !st.at("conclusive").get<bool>() ? "inconclusive (" + st.at("reason").get<std::string>() + ")"
                                 : st.at("all_pass").get<bool>() ? "all pass"
                                                                 : "violated";
        md << "| robust stability bound | " << stab << " | all pass | "
           << (st.at("conclusive").get<bool>() && st.at("all_pass").get<bool>() ? "yes" : "no") << " |\n";
    }
    if (!audit.is_null()) md << "\nAudit: " << (audit.at("pass").get<bool>() ? "pass" : "fail") << "\n";
    if (res.at("status").get<std::string>() != "infeasible") {
        const Eigen::MatrixXd G = matrix_from_json(res.at("G"));
        md << "\nGain G:\n\n```\n";
        for (int i = 0; i < G.rows(); ++i) {
            for (int k = 0; k < G.cols(); ++k) md << (k ? " " : "") << fixed(G(i, k));
            md << "\n";
        }
        md << "```\n";
    }
    write_file(out / "summary.md", md.str());
}

}  // namespace

void cmd_reproduce_uav(const CommandOptions& options) {
    CommandOptions opt = options;
    const ExperimentConfig cfg = parse_config(uav_config_json(), opt);
    fs::create_directories(opt.out);
    write_json(opt.out / "config.json", cfg.source);
    cmd_identify(cfg, opt.out);
    cmd_oslip(cfg, opt.out);
    cmd_synthesize(cfg, opt.out, true);
    cmd_simulate(cfg, opt.out);
    try {
        cmd_verify(cfg, opt.out);
    } catch (const VerificationError&) {
        write_summary(opt.out);
        throw;
    }
    write_summary(opt.out);
}

int run_command(const std::string& command, const std::optional<fs::path>& config_path, const CommandOptions& options) {
    auto fail = [&](int code, const std::string& kind, const std::string& message) {
        std::cerr << Json({{"error", kind}, {"message", message}, {"exit_code", code}}).dump() << "\n";
        return code;
    };
    try {
        if (command == "reproduce-uav") {
            cmd_reproduce_uav(options);
            return kExitOk;
        }
        if (!config_path) throw ConfigError("--config is required for " + command);
        Json raw;
        {
            std::ifstream is(*config_path, std::ios::binary);
            if (!is) throw ConfigError("cannot read config " + config_path->string());
            try {
                raw = Json::parse(is);
            } catch (const Json::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
        }
        const ExperimentConfig cfg = parse_config(raw, options);
        fs::create_directories(options.out);
        if (command == "identify") {
            cmd_identify(cfg, options.out);
        } else if (command == "oslip") {
            cmd_oslip(cfg, options.out);
        } else if (command == "synthesize") {
            cmd_synthesize(cfg, options.out, options.relaxed);
        } else if (command == "simulate") {
            cmd_simulate(cfg, options.out);
        } else if (command == "verify") {
            cmd_verify(cfg, options.out);
        } else {
            throw ConfigError("unknown command " + command);
        }
        return kExitOk;
    } catch (const ConfigError& e) {
        return fail(kExitInvalidConfig, "invalid_config", e.what());
    } catch (const InfeasibleError& e) {
        return fail(kExitInfeasible, "infeasible", e.what());
    } catch (const VerificationError& e) {
        return fail(kExitVerification, "verification_failed", e.what());
    } catch (const std::exception& e) {
        return fail(kExitFailure, "internal", e.what());
    }
}

}  // namespace ddc
