#pragma once

// JSON forms of the pipeline objects. Polynomials are
// {"dim": n, "terms": [{"exp": [...], "coef": c}, ...]}; matrices are
// row-major nested arrays.

#include "ddc/contraction.hpp"
#include "ddc/informativity.hpp"
#include "ddc/simkit.hpp"
#include "ddc/synthesis.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace ddc {

using Json = nlohmann::json;

Json to_json(const Poly& p);
Poly poly_from_json(const Json& j);
Json to_json(const PolyVecd& v);
PolyVecd polyvec_from_json(const Json& j);

Json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

Json to_json(const PartitionedSym& A);
PartitionedSym partitioned_from_json(const Json& j);
Json to_json(const CompactSet& K);
CompactSet compact_set_from_json(const Json& j);

Json to_json(const GridBound& b);
Json to_json(const RateCertificate& c);
Json to_json(const RobustnessCheck& r);
Json to_json(const ConstraintReport& r);

Json to_json(const SynthesisProblem& p);
SynthesisProblem problem_from_json(const Json& j);
Json to_json(const SynthesisResult& r);
SynthesisResult result_from_json(const Json& j);

Json to_json(const DeviationReport& r, const StabilityCheck& stability);

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

}  // namespace ddc
