#pragma once

#include <json.hpp>

#include "nrev/metrics.hpp"
#include "nrev/pipeline.hpp"
#include "nrev/polynomial.hpp"
#include "nrev/solver.hpp"

namespace nrev {

using json = nlohmann::json;

// Polynomial document:
// {num_vars, sum_budget, constant, linear:[...],
//  quadratic:[[i,j,w],...], cubic:[[i,j,k,w],...]}
json to_json(const SumConstrainedPolynomial& poly);
SumConstrainedPolynomial polynomial_from_json(const json& j);

json to_json(const SolverConfig& config);
// Applies known keys onto defaults; rejects unknown keys.
SolverConfig solver_config_from_json(const json& j);

json to_json(const RestartStats& stats);
json to_json(const SolveReport& report);

json to_json(const RecoveryMetrics& metrics);

json to_json(const UnitDiagnostics& diag);

}  // namespace nrev
