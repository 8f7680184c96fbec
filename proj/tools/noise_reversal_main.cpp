// Command-line driver: generate ground truths, corrupt them with Poisson
// background, run noise reversal, evaluate recoveries, and sweep noise
// levels. Every command is deterministic given its arguments; seeds are
// recorded in the metadata sidecars so runs are reproducible.
//
// Exit codes: 0 success, 1 partial sweep failure, 2 usage/validation,
// 3 I/O failure, 4 solver failure.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "nrev/datagen.hpp"
#include "nrev/io.hpp"
#include "nrev/metrics.hpp"
#include "nrev/pipeline.hpp"
#include "nrev/serialize.hpp"

namespace fs = std::filesystem;
using nrev::json;

namespace {

constexpr const char* kVersion = "1";

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int resolved_threads(int requested) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  int threads = requested == 0 ? static_cast<int>(hw) : requested;
  if (const char* env = std::getenv("NR_THREADS")) {
    const int cap = std::atoi(env);
    const int cap_resolved = cap <= 0 ? static_cast<int>(hw) : cap;
    threads = std::min(threads, cap_resolved);
  }
  return threads;
}

void write_json_file(const fs::path& path, const json& j) {
  nrev::write_text_file(path, j.dump(2) + "\n");
}

json read_json_file(const fs::path& path) {
  return json::parse(nrev::read_text_file(path));
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::string kind;
  int len = 0;
  int rows = 0;
  int cols = 0;
  double amplitude = 100.0;
  double omega = 0.4;
  double omega_row = 0.4;
  double omega_col = 0.2;
  double gamma = 0.02;
  double gamma_row = 0.02;
  double gamma_col = 0.01;
  double floor_value = 0.0;
  std::uint64_t seed = 0;
  std::string output;
};

json generate_meta(const GenerateOptions& opt, std::span<const std::int64_t> counts,
                   std::size_t rows, std::size_t cols) {
  json meta;
  meta["version"] = kVersion;
  meta["command"] = "generate";
  meta["generator"] = opt.kind;
  json params;
  if (opt.kind == "sin1d") {
    params["len"] = opt.len;
    params["amplitude"] = opt.amplitude;
    params["omega"] = opt.omega;
    params["gamma"] = opt.gamma;
  } else {
    params["rows"] = opt.rows;
    params["cols"] = opt.cols;
    params["amplitude"] = opt.amplitude;
    params["omega_row"] = opt.omega_row;
    params["omega_col"] = opt.omega_col;
    params["gamma_row"] = opt.gamma_row;
    params["gamma_col"] = opt.gamma_col;
  }
  params["floor"] = opt.floor_value;
  meta["parameters"] = params;
  meta["seed"] = opt.seed;  // recorded for provenance; the generator is deterministic
  meta["shape"] = {{"rows", rows}, {"cols", cols}};
  meta["peak"] = nrev::peak_value(counts);
  meta["mean"] = nrev::mean_value(counts);
  return meta;
}

int run_generate(const GenerateOptions& opt) {
  if (opt.kind == "sin1d") {
    const auto frame =
        nrev::decaying_sinusoid_1d(opt.len, opt.amplitude, opt.omega, opt.gamma, opt.floor_value);
    nrev::write_csv_1d(opt.output, frame.counts);
    write_json_file(opt.output + ".meta.json",
                    generate_meta(opt, frame.counts, 1, frame.counts.size()));
  } else if (opt.kind == "sin2d") {
    const auto image =
        nrev::decaying_sinusoid_2d(opt.rows, opt.cols, opt.amplitude, opt.omega_row,
                                   opt.omega_col, opt.gamma_row, opt.gamma_col, opt.floor_value);
    nrev::write_csv_2d(opt.output, image.rows, image.cols, image.counts);
    write_json_file(opt.output + ".meta.json",
                    generate_meta(opt, image.counts, image.rows, image.cols));
  } else {
    throw std::invalid_argument("unknown generator kind: " + opt.kind);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// corrupt

struct CorruptOptions {
  std::string input;
  std::string output;
  double noise_frac = 0.0;
  std::string relative_to = "peak";
  std::uint64_t seed = 0;
};

nrev::NoiseReference parse_reference(const std::string& s) {
  if (s == "peak") return nrev::NoiseReference::peak;
  if (s == "mean") return nrev::NoiseReference::mean;
  throw std::invalid_argument("relative-to must be 'peak' or 'mean'");
}

int run_corrupt(const CorruptOptions& opt) {
  nrev::CorruptionSpec spec{opt.noise_frac, parse_reference(opt.relative_to), opt.seed};
  json meta;
  meta["version"] = kVersion;
  meta["command"] = "corrupt";
  meta["source"] = opt.input;
  meta["noise_frac"] = opt.noise_frac;
  meta["relative_to"] = opt.relative_to;
  meta["seed"] = opt.seed;
  if (nrev::csv_is_2d(opt.input)) {
    const auto truth = nrev::read_csv_2d(opt.input);
    const auto record = nrev::poisson_corrupt(truth, spec);
    nrev::write_csv_2d(opt.output, record.measured.rows, record.measured.cols,
                       record.measured.counts);
    meta["shape"] = {{"rows", truth.rows}, {"cols", truth.cols}};
    meta["lambda"] = record.lambda_used;
    meta["true_total"] = record.true_total;
  } else {
    nrev::MeasuredFrame truth{nrev::read_csv_1d(opt.input)};
    const auto record = nrev::poisson_corrupt(truth, spec);
    nrev::write_csv_1d(opt.output, record.measured.counts);
    meta["shape"] = {{"rows", 1}, {"cols", truth.counts.size()}};
    meta["lambda"] = record.lambda_used;
    meta["true_total"] = record.true_total;
  }
  write_json_file(opt.output + ".meta.json", meta);
  return 0;
}

// ---------------------------------------------------------------------------
// denoise

struct DenoiseOptions {
  std::string input;
  std::string outdir;
  std::optional<std::int64_t> noise_total;
  std::optional<std::string> meta_path;
  std::string budget_mode = "exact";  // exact | off_period
  int estimate_samples = 0;
  std::string boundary = "interior";
  int block_size = 0;  // 0 = unblocked
  int passes = 1;
  int sweeps = 3;
  std::string budget_policy = "proportional";
  double cross_column_weight = 1.0;
  bool hardware_check = false;
  std::string dump_energy;
  std::string trace_csv;
  std::string pgm;
  nrev::SolverConfig solver;
};

nrev::BoundaryPolicy parse_boundary(const std::string& s) {
  if (s == "periodic") return nrev::BoundaryPolicy::periodic;
  if (s == "interior") return nrev::BoundaryPolicy::interior;
  throw std::invalid_argument("boundary must be 'periodic' or 'interior'");
}

nrev::BudgetPolicy parse_policy(const std::string& s) {
  if (s == "uniform") return nrev::BudgetPolicy::uniform;
  if (s == "proportional") return nrev::BudgetPolicy::proportional;
  throw std::invalid_argument("budget-policy must be 'uniform' or 'proportional'");
}

void apply_experiment_config(DenoiseOptions& opt, const json& j) {
  static const std::set<std::string> solver_keys = {
      "restarts",           "max_iterations", "step_size",
      "noise_sigma0",       "noise_decay",    "convergence_tol",
      "convergence_window", "seed",           "local_search_moves",
      "dirichlet_concentration", "threads"};
  static const std::set<std::string> pipeline_keys = {
      "boundary",     "block_size", "passes",      "sweeps",
      "budget_policy", "cross_column_weight", "budget_mode",
      "estimate_samples", "hardware_profile_check", "noise_total",
      "input", "output"};
  json solver_json = json::object();
  for (const auto& [key, value] : j.items()) {
    if (solver_keys.count(key)) {
      solver_json[key] = value;
    } else if (!pipeline_keys.count(key)) {
      throw std::invalid_argument("unknown experiment config key: " + key);
    }
  }
  opt.solver = nrev::solver_config_from_json(solver_json);
  if (j.contains("boundary")) opt.boundary = j["boundary"].get<std::string>();
  if (j.contains("block_size")) opt.block_size = j["block_size"].get<int>();
  if (j.contains("passes")) opt.passes = j["passes"].get<int>();
  if (j.contains("sweeps")) opt.sweeps = j["sweeps"].get<int>();
  if (j.contains("budget_policy")) opt.budget_policy = j["budget_policy"].get<std::string>();
  if (j.contains("cross_column_weight"))
    opt.cross_column_weight = j["cross_column_weight"].get<double>();
  if (j.contains("budget_mode")) opt.budget_mode = j["budget_mode"].get<std::string>();
  if (j.contains("estimate_samples")) opt.estimate_samples = j["estimate_samples"].get<int>();
  if (j.contains("hardware_profile_check"))
    opt.hardware_check = j["hardware_profile_check"].get<bool>();
  if (j.contains("noise_total")) opt.noise_total = j["noise_total"].get<std::int64_t>();
  if (j.contains("input")) opt.input = j["input"].get<std::string>();
  if (j.contains("output")) opt.outdir = j["output"].get<std::string>();
}

struct BudgetResolution {
  std::int64_t value = 0;
  std::string source;  // total | meta | off_period
  int estimate_samples = 0;
};

BudgetResolution resolve_budget(const DenoiseOptions& opt, std::size_t pixels) {
  if (opt.noise_total && opt.budget_mode == "off_period")
    throw std::invalid_argument("choose one of --noise-total and --estimate");
  if (opt.noise_total) return {*opt.noise_total, "total", 0};

  const fs::path meta_path = opt.meta_path ? fs::path(*opt.meta_path)
                                           : fs::path(opt.input + ".meta.json");
  const json meta = read_json_file(meta_path);
  if (opt.budget_mode == "off_period") {
    if (opt.estimate_samples < 1)
      throw std::invalid_argument("off-period estimation needs at least 1 sample");
    const double lambda = meta.at("lambda").get<double>();
    const std::int64_t value = nrev::estimate_noise_total_off_period(
        lambda, pixels, opt.estimate_samples, opt.solver.seed);
    return {value, "off_period", opt.estimate_samples};
  }
  if (opt.budget_mode != "exact")
    throw std::invalid_argument("budget_mode must be 'exact' or 'off_period'");
  return {meta.at("true_total").get<std::int64_t>(), "meta", 0};
}

int run_denoise(DenoiseOptions opt) {
  const auto t0 = std::chrono::steady_clock::now();
  opt.solver.threads = resolved_threads(opt.solver.threads);
  const bool is_2d = nrev::csv_is_2d(opt.input);
  if (is_2d && opt.block_size > 0)
    throw std::invalid_argument("--block-size applies to 1D input only");
  if (!is_2d && !opt.pgm.empty())
    throw std::invalid_argument("--pgm applies to 2D input only");
  if (is_2d && !opt.dump_energy.empty())
    throw std::invalid_argument("--dump-energy applies to 1D input only");
  if (is_2d && !opt.trace_csv.empty())
    throw std::invalid_argument("--trace-csv applies to unblocked 1D input only");
  if (!is_2d && opt.block_size > 0 && !opt.trace_csv.empty())
    throw std::invalid_argument("--trace-csv applies to unblocked 1D input only");

  fs::create_directories(opt.outdir);
  const fs::path outdir(opt.outdir);

  json report;
  report["version"] = kVersion;
  report["command"] = "denoise";
  report["input"] = opt.input;

  nrev::DenoiseResult result;
  BudgetResolution budget;
  std::string mode;
  if (is_2d) {
    const auto image = nrev::read_csv_2d(opt.input);
    budget = resolve_budget(opt, image.counts.size());
    mode = "2d";
    result = nrev::denoise_2d(image, budget.value, opt.sweeps, parse_policy(opt.budget_policy),
                              opt.cross_column_weight, opt.solver);
  } else {
    nrev::MeasuredFrame frame{nrev::read_csv_1d(opt.input)};
    budget = resolve_budget(opt, frame.counts.size());
    if (opt.block_size > 0) {
      mode = "1d_blocked";
      result = nrev::denoise_1d_blocked(frame, budget.value, opt.block_size, opt.passes,
                                        parse_policy(opt.budget_policy), opt.solver);
    } else {
      mode = "1d";
      result = nrev::denoise_1d(frame, budget.value, parse_boundary(opt.boundary), opt.solver);
    }
    if (!opt.dump_energy.empty()) {
      const auto poly =
          nrev::build_cost_form(frame, parse_boundary(opt.boundary), budget.value);
      write_json_file(opt.dump_energy, nrev::to_json(poly));
    }
  }

  std::int64_t noise_sum = 0;
  for (std::int64_t v : result.noise_field) noise_sum += v;
  if (noise_sum != budget.value)
    throw std::runtime_error("conservation violated: noise field does not sum to the budget");

  if (is_2d) {
    nrev::write_csv_2d(outdir / "noise.csv", result.rows, result.cols, result.noise_field);
    nrev::write_csv_2d(outdir / "recovered.csv", result.rows, result.cols, result.recovered);
  } else {
    nrev::write_csv_1d(outdir / "noise.csv", result.noise_field);
    nrev::write_csv_1d(outdir / "recovered.csv", result.recovered);
  }

  if (!opt.trace_csv.empty() && result.solve) {
    std::ostringstream os;
    const auto& trace = result.solve->energy_trace;
    for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << fmt_g(trace[i]) << '\n';
    nrev::write_text_file(opt.trace_csv, os.str());
  }
  if (!opt.pgm.empty()) {
    const auto stats = nrev::write_pgm(opt.pgm, result.rows, result.cols, result.recovered);
    report["pgm"] = {{"clamped_negatives", stats.clamped_negatives},
                     {"rescaled", stats.rescaled}};
  }

  report["mode"] = mode;
  report["boundary"] = opt.boundary;
  report["budget"] = {{"source", budget.source}, {"value", budget.value}};
  if (budget.estimate_samples > 0)
    report["budget"]["estimate_samples"] = budget.estimate_samples;
  report["solver_config"] = nrev::to_json(opt.solver);
  report["pipeline"] = {{"block_size", opt.block_size},
                        {"passes", opt.passes},
                        {"sweeps", opt.sweeps},
                        {"budget_policy", opt.budget_policy},
                        {"cross_column_weight", opt.cross_column_weight}};
  report["passes_completed"] = result.passes_completed;
  report["final_cost"] = result.final_cost;
  report["noise_sum"] = noise_sum;
  json diags = json::array();
  for (const auto& d : result.diagnostics) diags.push_back(nrev::to_json(d));
  report["diagnostics"] = diags;
  if (result.solve) report["solve"] = nrev::to_json(*result.solve);
  if (opt.hardware_check) {
    const auto warnings = nrev::check_hardware_profile(result);
    report["hardware_warnings"] = warnings;
    for (const auto& w : warnings) std::cerr << "hardware: " << w << '\n';
  }
  report["timings"] = {
      {"wall_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  write_json_file(outdir / "report.json", report);
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string truth;
  std::string measured;
  std::string recovered;
  int trim = 0;
  std::string boundary = "interior";
  double cross_column_weight = 1.0;
  std::string output;
};

int run_evaluate(const EvaluateOptions& opt) {
  const bool is_2d = nrev::csv_is_2d(opt.truth);
  if (nrev::csv_is_2d(opt.measured) != is_2d || nrev::csv_is_2d(opt.recovered) != is_2d)
    throw std::invalid_argument("evaluate: inputs mix 1D and 2D shapes");

  nrev::DenoiseResult result;
  nrev::IntVec truth;
  nrev::IntVec measured;
  if (is_2d) {
    const auto t = nrev::read_csv_2d(opt.truth);
    const auto m = nrev::read_csv_2d(opt.measured);
    const auto r = nrev::read_csv_2d(opt.recovered);
    if (t.rows != m.rows || t.cols != m.cols || t.rows != r.rows || t.cols != r.cols)
      throw std::invalid_argument("evaluate: shape mismatch");
    truth = t.counts;
    measured = m.counts;
    result.rows = t.rows;
    result.cols = t.cols;
    result.recovered = r.counts;
    result.noise_field.resize(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i)
      result.noise_field[i] = measured[i] - result.recovered[i];
    result.final_cost = nrev::objective_2d(m, result.noise_field, opt.cross_column_weight);
  } else {
    truth = nrev::read_csv_1d(opt.truth);
    measured = nrev::read_csv_1d(opt.measured);
    result.recovered = nrev::read_csv_1d(opt.recovered);
    if (truth.size() != measured.size() || truth.size() != result.recovered.size())
      throw std::invalid_argument("evaluate: shape mismatch");
    result.rows = 1;
    result.cols = truth.size();
    result.noise_field.resize(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i)
      result.noise_field[i] = measured[i] - result.recovered[i];
    result.final_cost = nrev::residual_cost(
        nrev::MeasuredFrame{measured}, parse_boundary(opt.boundary),
        std::span<const std::int64_t>(result.noise_field));
  }

  const auto metrics = nrev::compute_metrics(truth, measured, result, opt.trim);
  json out;
  out["version"] = kVersion;
  out["command"] = "evaluate";
  out["truth"] = opt.truth;
  out["measured"] = opt.measured;
  out["recovered"] = opt.recovered;
  out["shape"] = {{"rows", result.rows}, {"cols", result.cols}};
  out["metrics"] = nrev::to_json(metrics);
  std::cout << out.dump(2) << std::endl;
  if (!opt.output.empty()) write_json_file(opt.output, out);
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepOptions {
  GenerateOptions generate;
  std::vector<double> fractions;
  int num_seeds = 1;
  std::uint64_t seed_base = 1;
  std::string relative_to = "peak";
  int trim = 0;
  DenoiseOptions denoise;  // input/outdir ignored; solver seed set per run
  std::string outdir;
};

int run_sweep(const SweepOptions& opt) {
  if (opt.fractions.empty()) throw std::invalid_argument("sweep: empty fraction list");
  if (opt.num_seeds < 1) throw std::invalid_argument("sweep: need at least one seed");

  fs::create_directories(opt.outdir);
  const fs::path outdir(opt.outdir);

  GenerateOptions gen = opt.generate;
  gen.output = (outdir / "truth.csv").string();
  run_generate(gen);
  const bool is_2d = gen.kind == "sin2d";

  std::ostringstream aggregate;
  aggregate << "fraction,seed,status,rmse_noisy,rmse_recovered,improvement_factor,wall_time_s\n";
  bool any_failed = false;

  for (double fraction : opt.fractions) {
    for (int s = 0; s < opt.num_seeds; ++s) {
      const std::uint64_t seed = opt.seed_base + static_cast<std::uint64_t>(s);
      std::ostringstream dir_name;
      dir_name << "f" << fmt_g(fraction) << "_s" << seed;
      const fs::path run_dir = outdir / dir_name.str();
      const auto run_t0 = std::chrono::steady_clock::now();
      std::string status = "ok";
      nrev::RecoveryMetrics metrics;
      nrev::SolverConfig run_solver = opt.denoise.solver;
      run_solver.seed = seed;
      try {
        fs::create_directories(run_dir);
        CorruptOptions corrupt;
        corrupt.input = gen.output;
        corrupt.output = (run_dir / "noisy.csv").string();
        corrupt.noise_frac = fraction;
        corrupt.relative_to = opt.relative_to;
        corrupt.seed = seed;
        run_corrupt(corrupt);

        DenoiseOptions dn = opt.denoise;
        dn.input = corrupt.output;
        dn.outdir = (run_dir / "out").string();
        dn.solver.seed = seed;
        run_denoise(dn);

        const auto truth = is_2d ? nrev::read_csv_2d(gen.output).counts
                                 : nrev::read_csv_1d(gen.output);
        const auto measured = is_2d ? nrev::read_csv_2d(corrupt.output).counts
                                    : nrev::read_csv_1d(corrupt.output);
        nrev::DenoiseResult result;
        if (is_2d) {
          const auto r = nrev::read_csv_2d(run_dir / "out" / "recovered.csv");
          result.rows = r.rows;
          result.cols = r.cols;
          result.recovered = r.counts;
        } else {
          result.recovered = nrev::read_csv_1d(run_dir / "out" / "recovered.csv");
          result.rows = 1;
          result.cols = result.recovered.size();
        }
        result.noise_field.resize(measured.size());
        for (std::size_t i = 0; i < measured.size(); ++i)
          result.noise_field[i] = measured[i] - result.recovered[i];
        const json report = read_json_file(run_dir / "out" / "report.json");
        result.final_cost = report.at("final_cost").get<double>();
        metrics = nrev::compute_metrics(truth, measured, result, opt.trim);
        json mj;
        mj["version"] = kVersion;
        mj["experiment"] = dir_name.str();
        mj["seed"] = seed;
        mj["generator_meta"] = read_json_file(gen.output + ".meta.json");
        mj["corruption_meta"] = read_json_file(corrupt.output + ".meta.json");
        mj["solver_config"] = nrev::to_json(run_solver);
        mj["metrics"] = nrev::to_json(metrics);
        mj["timings"] = {
            {"wall_seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - run_t0).count()}};
        write_json_file(run_dir / "metrics.json", mj);
      } catch (const std::exception& e) {
        status = "failed";
        any_failed = true;
        std::cerr << "sweep run f=" << fraction << " seed=" << seed << " failed: " << e.what()
                  << '\n';
      }
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - run_t0).count();
      aggregate << fmt_g(fraction) << ',' << seed << ',' << status << ',';
      if (status == "ok") {
        aggregate << fmt_g(metrics.rmse_noisy) << ',' << fmt_g(metrics.rmse_recovered) << ','
                  << (std::isinf(metrics.improvement_factor)
                          ? std::string("inf")
                          : fmt_g(metrics.improvement_factor));
      } else {
        aggregate << ",,";
      }
      aggregate << ',' << fmt_g(wall) << '\n';
    }
  }

  nrev::write_text_file(outdir / "aggregate.csv", aggregate.str());
  json cfg;
  cfg["version"] = kVersion;
  cfg["fractions"] = opt.fractions;
  cfg["num_seeds"] = opt.num_seeds;
  cfg["seed_base"] = opt.seed_base;
  cfg["relative_to"] = opt.relative_to;
  cfg["trim"] = opt.trim;
  cfg["kind"] = gen.kind;
  write_json_file(outdir / "sweep_config.json", cfg);
  return any_failed ? 1 : 0;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const nrev::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 4;
  } catch (const nrev::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

void add_generator_flags(CLI::App* cmd, GenerateOptions& opt, bool require_kind) {
  auto* kind = cmd->add_option("--kind", opt.kind, "Generator: sin1d or sin2d")
                   ->check(CLI::IsMember({"sin1d", "sin2d"}));
  if (require_kind) kind->required();
  cmd->add_option("--len", opt.len, "1D length");
  cmd->add_option("--rows", opt.rows, "2D rows");
  cmd->add_option("--cols", opt.cols, "2D columns");
  cmd->add_option("--amp", opt.amplitude, "Amplitude (default 100)");
  cmd->add_option("--omega", opt.omega, "1D angular frequency");
  cmd->add_option("--omega-r", opt.omega_row, "2D row angular frequency");
  cmd->add_option("--omega-c", opt.omega_col, "2D column angular frequency");
  cmd->add_option("--gamma", opt.gamma, "1D decay rate");
  cmd->add_option("--gamma-r", opt.gamma_row, "2D row decay rate");
  cmd->add_option("--gamma-c", opt.gamma_col, "2D column decay rate");
  cmd->add_option("--floor", opt.floor_value, "Additive floor (default 0)");
}

void add_solver_flags(CLI::App* cmd, nrev::SolverConfig& solver) {
  cmd->add_option("--restarts", solver.restarts, "Solver restarts (default 32)");
  cmd->add_option("--max-iter", solver.max_iterations, "Iterations per restart (default 2000)");
  cmd->add_option("--step", solver.step_size, "Mirror-descent step size (default 0.05)");
  cmd->add_option("--sigma0", solver.noise_sigma0, "Initial annealing noise (default 0.2)");
  cmd->add_option("--sigma-decay", solver.noise_decay, "Noise decay per iteration (default 0.995)");
  cmd->add_option("--tol", solver.convergence_tol, "Convergence tolerance (default 1e-9)");
  cmd->add_option("--window", solver.convergence_window, "Convergence window (default 50)");
  cmd->add_option("--local-moves", solver.local_search_moves,
                  "Local-search move cap (-1 = 10 * pixels)");
  cmd->add_option("--alpha", solver.dirichlet_concentration,
                  "Dirichlet init concentration (default 1)");
}

void validate_generator(const GenerateOptions& opt) {
  if (opt.kind == "sin1d" && opt.len < 5)
    throw std::invalid_argument("sin1d needs --len >= 5");
  if (opt.kind == "sin2d" && (opt.rows < 5 || opt.cols < 1))
    throw std::invalid_argument("sin2d needs --rows >= 5 and --cols >= 1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise reversal for photon-counting data: map a measured frame "
               "and a known background total onto a sum-constrained smoothness "
               "energy, minimize it with a mean-field emulation, and subtract "
               "the retrieved noise field."};
  app.require_subcommand(1);

  GenerateOptions gen_opt;
  auto* gen_cmd = app.add_subcommand("generate", "Write a ground-truth CSV and metadata");
  add_generator_flags(gen_cmd, gen_opt, true);
  gen_cmd->add_option("--seed", gen_opt.seed, "Recorded in metadata");
  gen_cmd->add_option("-o,--output", gen_opt.output, "Output CSV path")->required();

  CorruptOptions cor_opt;
  auto* cor_cmd = app.add_subcommand("corrupt", "Add Poisson background noise to a CSV");
  cor_cmd->add_option("-i,--input", cor_opt.input, "Truth CSV")->required();
  cor_cmd->add_option("--noise-frac", cor_opt.noise_frac,
                      "Poisson mean as a fraction of the reference value")
      ->required();
  cor_cmd->add_option("--relative-to", cor_opt.relative_to, "peak or mean (default peak)")
      ->check(CLI::IsMember({"peak", "mean"}));
  cor_cmd->add_option("--seed", cor_opt.seed, "Corruption seed");
  cor_cmd->add_option("-o,--output", cor_opt.output, "Noisy CSV path")->required();

  DenoiseOptions dn_opt;
  std::string dn_config_path;
  std::string dn_estimate;
  std::int64_t dn_noise_total = -1;
  std::string dn_meta_path;
  auto* dn_cmd = app.add_subcommand("denoise", "Retrieve and subtract the noise field");
  auto* dn_in = dn_cmd->add_option("-i,--input", dn_opt.input, "Measured CSV");
  auto* dn_total = dn_cmd->add_option("--noise-total", dn_noise_total, "Known noise budget");
  auto* dn_meta = dn_cmd->add_option("--from-meta", dn_meta_path,
                                     "Metadata JSON with true_total/lambda "
                                     "(default: <input>.meta.json)");
  auto* dn_est = dn_cmd->add_option("--estimate", dn_estimate,
                                    "off-period:K — estimate the budget from K simulated "
                                    "off-period samples");
  dn_cmd->add_option("--boundary", dn_opt.boundary, "periodic or interior (default interior)")
      ->check(CLI::IsMember({"periodic", "interior"}));
  dn_cmd->add_option("--block-size", dn_opt.block_size, "Block length for blocked 1D (0 = off)");
  dn_cmd->add_option("--passes", dn_opt.passes, "Shifted-block passes (default 1)");
  dn_cmd->add_option("--sweeps", dn_opt.sweeps, "2D column sweeps (default 3)");
  dn_cmd->add_option("--budget-policy", dn_opt.budget_policy,
                     "uniform or proportional (default proportional)")
      ->check(CLI::IsMember({"uniform", "proportional"}));
  dn_cmd->add_option("--cross-weight", dn_opt.cross_column_weight,
                     "Cross-column variance weight (default 1)");
  dn_cmd->add_flag("--check-hardware", dn_opt.hardware_check,
                   "Warn when the instance exceeds the machine profile");
  dn_cmd->add_option("--dump-energy", dn_opt.dump_energy, "Write the mapped polynomial JSON");
  dn_cmd->add_option("--trace-csv", dn_opt.trace_csv, "Write the winning energy trace CSV");
  dn_cmd->add_option("--pgm", dn_opt.pgm, "Write a PGM preview of the recovered 2D grid");
  dn_cmd->add_option("--config", dn_config_path, "Experiment config JSON (flags override)");
  add_solver_flags(dn_cmd, dn_opt.solver);
  dn_cmd->add_option("--seed", dn_opt.solver.seed, "Solver seed");
  auto* dn_out = dn_cmd->add_option("-o,--output", dn_opt.outdir, "Output directory");

  EvaluateOptions ev_opt;
  auto* ev_cmd = app.add_subcommand("evaluate", "Recovery metrics against the ground truth");
  ev_cmd->add_option("--truth", ev_opt.truth, "Truth CSV")->required();
  ev_cmd->add_option("--measured", ev_opt.measured, "Measured CSV")->required();
  ev_cmd->add_option("--recovered", ev_opt.recovered, "Recovered CSV")->required();
  ev_cmd->add_option("--trim", ev_opt.trim, "Edge trim in pixels (default 0)");
  ev_cmd->add_option("--boundary", ev_opt.boundary, "Residual boundary (default interior)")
      ->check(CLI::IsMember({"periodic", "interior"}));
  ev_cmd->add_option("--cross-weight", ev_opt.cross_column_weight,
                     "Cross-column weight for the 2D residual (default 1)");
  ev_cmd->add_option("-o,--output", ev_opt.output, "Also write the report JSON here");

  SweepOptions sw_opt;
  auto* sw_cmd = app.add_subcommand(
      "sweep", "generate -> corrupt -> denoise -> evaluate over fractions and seeds");
  add_generator_flags(sw_cmd, sw_opt.generate, true);
  sw_cmd->add_option("--fractions", sw_opt.fractions, "Noise fractions, comma separated")
      ->delimiter(',');
  sw_cmd->add_option("--num-seeds", sw_opt.num_seeds, "Seeds per fraction (default 1)");
  sw_cmd->add_option("--seed-base", sw_opt.seed_base, "First seed (default 1)");
  sw_cmd->add_option("--relative-to", sw_opt.relative_to, "peak or mean (default peak)")
      ->check(CLI::IsMember({"peak", "mean"}));
  sw_cmd->add_option("--trim", sw_opt.trim, "Edge trim for metrics (default 0)");
  sw_cmd->add_option("--boundary", sw_opt.denoise.boundary, "1D boundary (default interior)")
      ->check(CLI::IsMember({"periodic", "interior"}));
  sw_cmd->add_option("--block-size", sw_opt.denoise.block_size, "Block length (0 = off)");
  sw_cmd->add_option("--passes", sw_opt.denoise.passes, "Shifted-block passes (default 1)");
  sw_cmd->add_option("--sweeps", sw_opt.denoise.sweeps, "2D column sweeps (default 3)");
  sw_cmd->add_option("--budget-policy", sw_opt.denoise.budget_policy,
                     "uniform or proportional (default proportional)")
      ->check(CLI::IsMember({"uniform", "proportional"}));
  sw_cmd->add_option("--cross-weight", sw_opt.denoise.cross_column_weight,
                     "Cross-column variance weight (default 1)");
  add_solver_flags(sw_cmd, sw_opt.denoise.solver);
  sw_cmd->add_option("-o,--output", sw_opt.outdir, "Sweep output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return 2;
  }

  if (*gen_cmd) {
    return guarded([&]() {
      validate_generator(gen_opt);
      return run_generate(gen_opt);
    });
  }
  if (*cor_cmd) {
    return guarded([&]() { return run_corrupt(cor_opt); });
  }
  if (*dn_cmd) {
    return guarded([&]() {
      if (!dn_config_path.empty()) {
        DenoiseOptions from_config;
        apply_experiment_config(from_config, read_json_file(dn_config_path));
        // Flags given on the command line override the config file.
        from_config.hardware_check = dn_opt.hardware_check || from_config.hardware_check;
        from_config.dump_energy = dn_opt.dump_energy.empty() ? from_config.dump_energy
                                                             : dn_opt.dump_energy;
        from_config.trace_csv = dn_opt.trace_csv.empty() ? from_config.trace_csv
                                                         : dn_opt.trace_csv;
        from_config.pgm = dn_opt.pgm.empty() ? from_config.pgm : dn_opt.pgm;
        // Scalar overrides: any flag the user passed wins.
        if (dn_cmd->count("--boundary")) from_config.boundary = dn_opt.boundary;
        if (dn_cmd->count("--block-size")) from_config.block_size = dn_opt.block_size;
        if (dn_cmd->count("--passes")) from_config.passes = dn_opt.passes;
        if (dn_cmd->count("--sweeps")) from_config.sweeps = dn_opt.sweeps;
        if (dn_cmd->count("--budget-policy")) from_config.budget_policy = dn_opt.budget_policy;
        if (dn_cmd->count("--cross-weight"))
          from_config.cross_column_weight = dn_opt.cross_column_weight;
        if (dn_cmd->count("--restarts")) from_config.solver.restarts = dn_opt.solver.restarts;
        if (dn_cmd->count("--max-iter"))
          from_config.solver.max_iterations = dn_opt.solver.max_iterations;
        if (dn_cmd->count("--step")) from_config.solver.step_size = dn_opt.solver.step_size;
        if (dn_cmd->count("--sigma0"))
          from_config.solver.noise_sigma0 = dn_opt.solver.noise_sigma0;
        if (dn_cmd->count("--sigma-decay"))
          from_config.solver.noise_decay = dn_opt.solver.noise_decay;
        if (dn_cmd->count("--tol"))
          from_config.solver.convergence_tol = dn_opt.solver.convergence_tol;
        if (dn_cmd->count("--window"))
          from_config.solver.convergence_window = dn_opt.solver.convergence_window;
        if (dn_cmd->count("--local-moves"))
          from_config.solver.local_search_moves = dn_opt.solver.local_search_moves;
        if (dn_cmd->count("--alpha"))
          from_config.solver.dirichlet_concentration = dn_opt.solver.dirichlet_concentration;
        if (dn_cmd->count("--seed")) from_config.solver.seed = dn_opt.solver.seed;
        if (dn_in->count()) from_config.input = dn_opt.input;
        if (dn_out->count()) from_config.outdir = dn_opt.outdir;
        if (dn_total->count()) from_config.noise_total = dn_noise_total;
        if (dn_meta->count()) from_config.meta_path = dn_meta_path;
        dn_opt = from_config;
      } else {
        if (dn_total->count()) dn_opt.noise_total = dn_noise_total;
        if (dn_meta->count()) dn_opt.meta_path = dn_meta_path;
      }
      if (dn_est->count()) {
        const std::string prefix = "off-period:";
        if (dn_estimate.rfind(prefix, 0) != 0)
          throw std::invalid_argument("--estimate expects off-period:K");
        dn_opt.budget_mode = "off_period";
        dn_opt.estimate_samples = std::stoi(dn_estimate.substr(prefix.size()));
      }
      if (dn_opt.input.empty()) throw std::invalid_argument("denoise: missing input");
      if (dn_opt.outdir.empty()) throw std::invalid_argument("denoise: missing output directory");
      if (!dn_opt.noise_total && !dn_opt.meta_path && dn_opt.budget_mode == "exact" &&
          !fs::exists(dn_opt.input + ".meta.json"))
        throw std::invalid_argument(
            "denoise: supply --noise-total, --from-meta, or --estimate off-period:K");
      return run_denoise(dn_opt);
    });
  }
  if (*ev_cmd) {
    return guarded([&]() { return run_evaluate(ev_opt); });
  }
  if (*sw_cmd) {
    return guarded([&]() {
      validate_generator(sw_opt.generate);
      return run_sweep(sw_opt);
    });
  }
  return 2;
}
