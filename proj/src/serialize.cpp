#include "nrev/serialize.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace nrev {

json to_json(const SumConstrainedPolynomial& poly) {
  json j;
  j["num_vars"] = poly.num_vars;
  j["sum_budget"] = poly.sum_budget;
  j["constant"] = poly.constant;
  j["linear"] = poly.linear;
  json quad = json::array();
  for (const auto& q : poly.quadratic) quad.push_back({q.i, q.j, q.weight});
  j["quadratic"] = quad;
  json cub = json::array();
  for (const auto& t : poly.cubic) cub.push_back({t.i, t.j, t.k, t.weight});
  j["cubic"] = cub;
  return j;
}

SumConstrainedPolynomial polynomial_from_json(const json& j) {
  SumConstrainedPolynomial poly;
  poly.num_vars = j.at("num_vars").get<int>();
  poly.sum_budget = j.at("sum_budget").get<std::int64_t>();
  poly.constant = j.at("constant").get<double>();
  poly.linear = j.at("linear").get<RealVec>();
  for (const auto& entry : j.at("quadratic")) {
    if (entry.size() != 3) throw std::invalid_argument("quadratic entry needs [i, j, w]");
    poly.quadratic.push_back(
        {entry[0].get<int>(), entry[1].get<int>(), entry[2].get<double>()});
  }
  for (const auto& entry : j.at("cubic")) {
    if (entry.size() != 4) throw std::invalid_argument("cubic entry needs [i, j, k, w]");
    poly.cubic.push_back({entry[0].get<int>(), entry[1].get<int>(), entry[2].get<int>(),
                          entry[3].get<double>()});
  }
  const auto violations = validate(poly);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "polynomial document invalid:";
    for (const auto& v : violations) os << " [" << v << "]";
    throw std::invalid_argument(os.str());
  }
  return poly;
}

json to_json(const SolverConfig& config) {
  json j;
  j["restarts"] = config.restarts;
  j["max_iterations"] = config.max_iterations;
  j["step_size"] = config.step_size;
  j["noise_sigma0"] = config.noise_sigma0;
  j["noise_decay"] = config.noise_decay;
  j["convergence_tol"] = config.convergence_tol;
  j["convergence_window"] = config.convergence_window;
  j["seed"] = config.seed;
  j["local_search_moves"] = config.local_search_moves;
  j["dirichlet_concentration"] = config.dirichlet_concentration;
  j["threads"] = config.threads;
  return j;
}

SolverConfig solver_config_from_json(const json& j) {
  static const std::set<std::string> known = {
      "restarts",           "max_iterations",     "step_size",
      "noise_sigma0",       "noise_decay",        "convergence_tol",
      "convergence_window", "seed",               "local_search_moves",
      "dirichlet_concentration", "threads"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown solver config key: " + key);
  }
  SolverConfig config;
  if (j.contains("restarts")) config.restarts = j["restarts"].get<int>();
  if (j.contains("max_iterations")) config.max_iterations = j["max_iterations"].get<int>();
  if (j.contains("step_size")) config.step_size = j["step_size"].get<double>();
  if (j.contains("noise_sigma0")) config.noise_sigma0 = j["noise_sigma0"].get<double>();
  if (j.contains("noise_decay")) config.noise_decay = j["noise_decay"].get<double>();
  if (j.contains("convergence_tol")) config.convergence_tol = j["convergence_tol"].get<double>();
  if (j.contains("convergence_window"))
    config.convergence_window = j["convergence_window"].get<int>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("local_search_moves"))
    config.local_search_moves = j["local_search_moves"].get<std::int64_t>();
  if (j.contains("dirichlet_concentration"))
    config.dirichlet_concentration = j["dirichlet_concentration"].get<double>();
  if (j.contains("threads")) config.threads = j["threads"].get<int>();
  return config;
}

json to_json(const RestartStats& stats) {
  json j;
  j["final_energy"] = stats.aborted ? json() : json(stats.final_energy);
  j["iterations_used"] = stats.iterations_used;
  j["converged"] = stats.converged;
  j["aborted"] = stats.aborted;
  return j;
}

json to_json(const SolveReport& report) {
  json j;
  j["best"] = report.best;
  j["best_energy"] = report.best_energy;
  json restarts = json::array();
  for (const auto& r : report.per_restart) restarts.push_back(to_json(r));
  j["per_restart"] = restarts;
  j["energy_trace"] = report.energy_trace;
  j["wall_time"] = report.wall_time;
  j["seed"] = report.seed;
  j["best_restart"] = report.best_restart;
  return j;
}

json to_json(const RecoveryMetrics& metrics) {
  json j;
  j["rmse_noisy"] = metrics.rmse_noisy;
  j["rmse_recovered"] = metrics.rmse_recovered;
  if (std::isinf(metrics.improvement_factor)) {
    j["improvement_factor"] = "inf";
  } else {
    j["improvement_factor"] = metrics.improvement_factor;
  }
  j["residual_cost"] = metrics.residual_cost;
  j["budget_used"] = metrics.budget_used;
  j["edge_trim"] = metrics.edge_trim;
  return j;
}

json to_json(const UnitDiagnostics& diag) {
  json j;
  j["pass"] = diag.pass;
  j["unit"] = diag.unit;
  j["budget"] = diag.budget;
  j["energy"] = diag.energy;
  j["iterations"] = diag.iterations;
  return j;
}

}  // namespace nrev
