#include "ddc/json_io.hpp"

#include <cstdio>
#include <stdexcept>

namespace ddc {

Json to_json(const Poly& p) {
    Json terms = Json::array();
    for (const auto& [m, c] : p.terms()) terms.push_back({{"exp", m.exponents()}, {"coef", c}});
    return {{"dim", p.dim()}, {"terms", terms}};
}

Poly poly_from_json(const Json& j) {
    const int dim = j.at("dim").get<int>();
    if (dim < 1) throw std::invalid_argument("polynomial: dim must be >= 1");
    Poly p(dim);
    for (const auto& t : j.at("terms")) {
        std::vector<int> e = t.at("exp").get<std::vector<int>>();
        if (static_cast<int>(e.size()) != dim) throw std::invalid_argument("polynomial: exponent length != dim");
        for (int v : e) {
            if (v < 0) throw std::invalid_argument("polynomial: negative exponent");
        }
        const Monomial m(std::move(e));
        if (m.degree() > kMaxPolynomialDegree) throw std::invalid_argument("polynomial: degree above supported maximum");
        p.add_term(m, t.at("coef").get<double>());
    }
    return p;
}

Json to_json(const PolyVecd& v) {
    Json a = Json::array();
    for (const auto& p : v.entries()) a.push_back(to_json(p));
    return a;
}

PolyVecd polyvec_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("polynomial vector: expected a non-empty array");
    std::vector<Poly> entries;
    for (const auto& p : j) entries.push_back(poly_from_json(p));
    return PolyVecd(std::move(entries));
}

Json matrix_to_json(const Eigen::MatrixXd& M) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(row);
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty() || !j.front().is_array()) throw std::invalid_argument("matrix: expected nested arrays");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j.front().size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw std::invalid_argument("matrix: ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = row[static_cast<std::size_t>(k)].get<double>();
    }
    return M;
}

Json vector_to_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
    if (!j.is_array()) throw std::invalid_argument("vector: expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

Json to_json(const PartitionedSym& A) { return {{"matrix", matrix_to_json(A.matrix())}, {"split", A.split()}}; }

PartitionedSym partitioned_from_json(const Json& j) {
    return PartitionedSym(matrix_from_json(j.at("matrix")), j.at("split").get<int>());
}

Json to_json(const CompactSet& K) { return {{"center", vector_to_json(K.center())}, {"radius", K.radius()}}; }

CompactSet compact_set_from_json(const Json& j) {
    return CompactSet(vector_from_json(j.at("center")), j.at("radius").get<double>());
}

Json to_json(const GridBound& b) {
    return {{"value", b.value},
            {"grid_spacing", b.grid_spacing},
            {"margin", b.margin},
            {"certified_upper", b.certified_upper},
            {"argmax", vector_to_json(b.argmax)}};
}

Json to_json(const RateCertificate& c) {
    return {{"mu_star", c.mu_star},
            {"ell", c.ell},
            {"ell_modulus", c.ell_modulus},
            {"ell_spectral", c.ell_spectral},
            {"ell_mode", c.mode == EllMode::EigenvalueModulus ? "eigenvalue_modulus" : "spectral_norm"},
            {"l_k", c.l_k},
            {"schur_term", c.schur_term},
            {"oslip_lse", c.oslip_lse},
            {"kappa", c.kappa},
            {"gamma_certified", c.gamma_certified},
            {"gamma_target", c.gamma_target},
            {"pass", c.pass}};
}

Json to_json(const RobustnessCheck& r) {
    return {{"pass", r.pass}, {"slack", r.slack}, {"oslip", r.oslip}, {"rhs", r.rhs}, {"l_k", r.l_k}, {"schur_term", r.schur}};
}

Json to_json(const ConstraintReport& r) {
    Json cs = Json::array();
    for (const auto& c : r.constraints) {
        cs.push_back({{"name", c.name},
                      {"min_residual", c.min_residual},
                      {"argmin", vector_to_json(c.argmin)},
                      {"points", c.points}});
    }
    return {{"constraints", cs},
            {"dense_resolution", r.dense_resolution},
            {"random_points", r.random_points},
            {"gamma_recomputed", r.gamma_recomputed},
            {"gamma_mismatch", r.gamma_mismatch},
            {"verified", r.verified}};
}

Json to_json(const SynthesisProblem& p) {
    return {{"P", matrix_to_json(p.P.matrix())},
            {"K", to_json(p.K)},
            {"B", matrix_to_json(p.B)},
            {"phi_lse", to_json(p.phi_lse)},
            {"N", to_json(p.N)},
            {"basis", to_json(p.basis)},
            {"gamma_target", p.gamma_target ? Json(*p.gamma_target) : Json(nullptr)},
            {"p_poly", to_json(p.p_poly)},
            {"alpha", p.alpha},
            {"M", p.M},
            {"grid", p.grid},
            {"seed", p.seed}};
}

SynthesisProblem problem_from_json(const Json& j) {
    std::optional<double> target;
    if (j.contains("gamma_target") && !j.at("gamma_target").is_null()) target = j.at("gamma_target").get<double>();
    return SynthesisProblem{Metric(matrix_from_json(j.at("P"))),
                            compact_set_from_json(j.at("K")),
                            matrix_from_json(j.at("B")),
                            polyvec_from_json(j.at("phi_lse")),
                            partitioned_from_json(j.at("N")),
                            polyvec_from_json(j.at("basis")),
                            target,
                            poly_from_json(j.at("p_poly")),
                            j.at("alpha").get<double>(),
                            j.at("M").get<double>(),
                            j.at("grid").get<int>(),
                            j.at("seed").get<std::uint64_t>()};
}

Json to_json(const SynthesisResult& r) {
    Json j = {{"status", to_string(r.status)}, {"verified", r.verified}};
    if (r.status == SynthesisStatus::Infeasible) return j;
    j["Gamma"] = matrix_to_json(r.Gamma);
    j["a"] = r.a;
    j["mu"] = r.mu;
    j["G"] = matrix_to_json(r.G);
    j["beta"] = r.beta;
    j["varsigma"] = r.varsigma;
    j["gamma_achieved"] = r.gamma_achieved;
    j["restart"] = r.restart;
    j["iterations"] = r.iterations;
    j["cuts"] = r.cuts;
    j["constraint_report"] = to_json(r.constraint_report);
    return j;
}

SynthesisResult result_from_json(const Json& j) {
    SynthesisResult r;
    const std::string status = j.at("status").get<std::string>();
    if (status == "ok") {
        r.status = SynthesisStatus::Ok;
    } else if (status == "unverified") {
        r.status = SynthesisStatus::Unverified;
    } else if (status == "infeasible") {
        r.status = SynthesisStatus::Infeasible;
        return r;
    } else {
        throw std::invalid_argument("synthesis result: unknown status " + status);
    }
    r.verified = j.at("verified").get<bool>();
    r.Gamma = matrix_from_json(j.at("Gamma"));
    r.a = j.at("a").get<double>();
    r.mu = j.at("mu").get<double>();
    r.G = matrix_from_json(j.at("G"));
    r.beta = j.at("beta").get<double>();
    r.varsigma = j.at("varsigma").get<double>();
    r.gamma_achieved = j.at("gamma_achieved").get<double>();
    r.restart = j.value("restart", -1);
    r.iterations = j.value("iterations", 0);
    r.cuts = j.value("cuts", 0);
    return r;
}

Json to_json(const DeviationReport& r, const StabilityCheck& s) {
    Json violations = Json::array();
    for (const auto& v : r.violations) {
        violations.push_back({{"realization", v.realization}, {"time", v.time}, {"excess", v.excess}});
    }
    Json reals = Json::array();
    for (const auto& real : r.realizations) {
        reals.push_back({{"x0", vector_to_json(real.x0)},
                         {"wind", real.wind},
                         {"d0", real.d0},
                         {"left_k", real.left_k},
                         {"checked_until", real.checked_until},
                         {"violation_samples", real.violation_samples},
                         {"diverged", real.trajectory.diverged},
                         {"final_deviation", real.deviation.empty() ? 0.0 : real.deviation.back()}});
    }
    Json stab = {{"conclusive", s.conclusive},
                 {"all_pass", s.all_pass},
                 {"alpha_stab", s.fit.alpha},
                 {"alpha_regression", s.fit.regression},
                 {"alpha_cap", s.fit.cap},
                 {"rate", s.rate},
                 {"reason", s.fit.reason},
                 {"pass", s.pass},
                 {"worst_excess", s.worst_excess}};
    return {{"gamma", r.gamma},
            {"realization_count", r.realizations.size()},
            {"violation_count", r.violations.size()},
            {"inconclusive", r.inconclusive},
            {"nominal_diverged", r.nominal.diverged},
            {"violations", violations},
            {"realizations", reals},
            {"robust_stability", stab}};
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace ddc
