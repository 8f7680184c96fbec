// End-to-end tests of the command-line binary (path injected as NR_CLI_PATH).
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nrev/datagen.hpp"
#include "nrev/io.hpp"
#include "nrev/serialize.hpp"

namespace fs = std::filesystem;
using nrev::json;

namespace {

struct CliRun {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nrev_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliRun run_cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd =
      std::string(NR_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  CliRun result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = nrev::read_text_file(out);
  result.err = nrev::read_text_file(err);
  return result;
}

json normalized_report(const fs::path& path) {
  json j = json::parse(nrev::read_text_file(path));
  std::function<void(json&)> scrub = [&scrub](json& node) {
    if (node.is_object()) {
      node.erase("timings");
      node.erase("wall_time");
      node.erase("wall_seconds");
      for (auto& [key, value] : node.items()) scrub(value);
    } else if (node.is_array()) {
      for (auto& value : node) scrub(value);
    }
  };
  scrub(j);
  return j;
}

std::string drop_wall_time_column(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto cut = line.rfind(',');
    out << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("cli: generate writes the CSV and metadata and is reproducible") {
  const auto dir = scratch_dir("generate");
  const std::string truth = (dir / "truth.csv").string();
  const std::string args =
      "generate --kind sin1d --len 200 --amp 100 --omega 0.4 --gamma 0.02 --seed 7 -o " + truth;
  CHECK(run_cli(args, dir).exit_code == 0);
  const auto counts = nrev::read_csv_1d(truth);
  CHECK(counts.size() == 200);
  const json meta = json::parse(nrev::read_text_file(truth + ".meta.json"));
  CHECK(meta.at("generator") == "sin1d");
  CHECK(meta.at("parameters").at("len") == 200);
  CHECK(meta.at("seed") == 7);

  const std::string first = nrev::read_text_file(truth);
  CHECK(run_cli(args, dir).exit_code == 0);
  CHECK(nrev::read_text_file(truth) == first);
}

TEST_CASE("cli: missing required flag exits 2 with usage on stderr") {
  const auto dir = scratch_dir("usage");
  const auto run = run_cli("generate --kind sin1d", dir);
  CHECK(run.exit_code == 2);
  CHECK(run.err.find("Usage") != std::string::npos);
}

TEST_CASE("cli: corrupt records a true total that matches the file difference") {
  const auto dir = scratch_dir("corrupt");
  const std::string truth = (dir / "truth.csv").string();
  const std::string noisy = (dir / "noisy.csv").string();
  REQUIRE(run_cli("generate --kind sin1d --len 64 --amp 50 --omega 0.4 --gamma 0.02 -o " + truth,
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("corrupt -i " + truth +
                      " --noise-frac 0.2 --relative-to peak --seed 11 -o " + noisy,
                  dir)
              .exit_code == 0);
  const auto t = nrev::read_csv_1d(truth);
  const auto m = nrev::read_csv_1d(noisy);
  std::int64_t diff = 0;
  for (std::size_t i = 0; i < t.size(); ++i) diff += m[i] - t[i];
  const json meta = json::parse(nrev::read_text_file(noisy + ".meta.json"));
  CHECK(meta.at("true_total").get<std::int64_t>() == diff);
  CHECK(meta.at("lambda").get<double>() == doctest::Approx(0.2 * 50.0).epsilon(0.1));

  SUBCASE("zero fraction leaves the data untouched") {
    const std::string clean = (dir / "clean.csv").string();
    REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 0 -o " + clean, dir).exit_code == 0);
    CHECK(nrev::read_text_file(clean) == nrev::read_text_file(truth));
  }

  SUBCASE("mean-relative interpretation") {
    const std::string heavy = (dir / "heavy.csv").string();
    REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 20 --relative-to mean --seed 1 -o " +
                        heavy,
                    dir)
                .exit_code == 0);
    const json hmeta = json::parse(nrev::read_text_file(heavy + ".meta.json"));
    const double mean = nrev::mean_value(t);
    CHECK(hmeta.at("lambda").get<double>() == doctest::Approx(20.0 * mean).epsilon(1e-12));
  }
}

TEST_CASE("cli: denoise with a zero budget is the identity") {
  const auto dir = scratch_dir("denoise_zero");
  const std::string truth = (dir / "truth.csv").string();
  REQUIRE(run_cli("generate --kind sin1d --len 32 --amp 40 --omega 0.5 --gamma 0.03 -o " + truth,
                  dir)
              .exit_code == 0);
  const std::string out = (dir / "out").string();
  REQUIRE(run_cli("denoise -i " + truth + " --noise-total 0 --restarts 2 --max-iter 50 -o " + out,
                  dir)
              .exit_code == 0);
  CHECK(nrev::read_text_file(out + "/recovered.csv") == nrev::read_text_file(truth));
}

TEST_CASE("cli: denoise outputs exist, conserve the budget, and replay byte-identically") {
  const auto dir = scratch_dir("denoise");
  const std::string truth = (dir / "truth.csv").string();
  const std::string noisy = (dir / "noisy.csv").string();
  REQUIRE(run_cli("generate --kind sin1d --len 48 --amp 60 --omega 0.4 --gamma 0.02 -o " + truth,
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 0.2 --seed 5 -o " + noisy, dir)
              .exit_code == 0);

  const std::string energy = (dir / "energy.json").string();
  const std::string args = "denoise -i " + noisy + " --from-meta " + noisy +
                           ".meta.json --restarts 4 --max-iter 150 --seed 5 --dump-energy " +
                           energy + " -o " + (dir / "out").string();
  REQUIRE(run_cli(args, dir).exit_code == 0);

  const auto noise = nrev::read_csv_1d(dir / "out" / "noise.csv");
  const auto recovered = nrev::read_csv_1d(dir / "out" / "recovered.csv");
  const auto measured = nrev::read_csv_1d(noisy);
  const json meta = json::parse(nrev::read_text_file(noisy + ".meta.json"));
  std::int64_t noise_sum = 0;
  for (std::size_t i = 0; i < noise.size(); ++i) {
    noise_sum += noise[i];
    CHECK(noise[i] + recovered[i] == measured[i]);
  }
  CHECK(noise_sum == meta.at("true_total").get<std::int64_t>());

  // The dumped polynomial parses, validates, and matches the instance.
  const auto poly = nrev::polynomial_from_json(json::parse(nrev::read_text_file(energy)));
  CHECK(poly.num_vars == 48);
  CHECK(poly.sum_budget == meta.at("true_total").get<std::int64_t>());

  const std::string noise_bytes = nrev::read_text_file(dir / "out" / "noise.csv");
  const std::string recovered_bytes = nrev::read_text_file(dir / "out" / "recovered.csv");
  const json report = normalized_report(dir / "out" / "report.json");
  REQUIRE(run_cli(args, dir).exit_code == 0);
  CHECK(nrev::read_text_file(dir / "out" / "noise.csv") == noise_bytes);
  CHECK(nrev::read_text_file(dir / "out" / "recovered.csv") == recovered_bytes);
  CHECK(normalized_report(dir / "out" / "report.json") == report);
}

TEST_CASE("cli: off-period estimation uses the metadata lambda") {
  const auto dir = scratch_dir("estimate");
  const std::string truth = (dir / "truth.csv").string();
  const std::string noisy = (dir / "noisy.csv").string();
  REQUIRE(run_cli("generate --kind sin1d --len 40 --amp 50 --omega 0.4 --gamma 0.02 -o " + truth,
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 0.3 --seed 6 -o " + noisy, dir)
              .exit_code == 0);
  REQUIRE(run_cli("denoise -i " + noisy +
                      " --estimate off-period:500 --restarts 2 --max-iter 80 --seed 9 -o " +
                      (dir / "out").string(),
                  dir)
              .exit_code == 0);
  const json report = json::parse(nrev::read_text_file(dir / "out" / "report.json"));
  CHECK(report.at("budget").at("source") == "off_period");
  const json meta = json::parse(nrev::read_text_file(noisy + ".meta.json"));
  const auto expected = nrev::estimate_noise_total_off_period(
      meta.at("lambda").get<double>(), 40, 500, 9);
  CHECK(report.at("budget").at("value").get<std::int64_t>() == expected);
}

TEST_CASE("cli: evaluate emits the sentinel and the unit factor") {
  const auto dir = scratch_dir("evaluate");
  const std::string truth = (dir / "truth.csv").string();
  const std::string noisy = (dir / "noisy.csv").string();
  REQUIRE(run_cli("generate --kind sin1d --len 30 --amp 40 --omega 0.5 --gamma 0.02 -o " + truth,
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 0.2 --seed 2 -o " + noisy, dir)
              .exit_code == 0);

  auto run = run_cli("evaluate --truth " + truth + " --measured " + noisy + " --recovered " +
                         truth,
                     dir);
  CHECK(run.exit_code == 0);
  CHECK(json::parse(run.out).at("metrics").at("improvement_factor") == "inf");

  run = run_cli("evaluate --truth " + truth + " --measured " + noisy + " --recovered " + noisy,
                dir);
  CHECK(run.exit_code == 0);
  CHECK(json::parse(run.out).at("metrics").at("improvement_factor").get<double>() == 1.0);

  const std::string shorter = (dir / "short.csv").string();
  nrev::write_csv_1d(shorter, nrev::IntVec{1, 2, 3});
  CHECK(run_cli("evaluate --truth " + truth + " --measured " + noisy + " --recovered " + shorter,
                dir)
            .exit_code == 2);
}

TEST_CASE("cli: 2D denoise writes grids and an optional PGM preview") {
  const auto dir = scratch_dir("denoise2d");
  const std::string truth = (dir / "truth.csv").string();
  const std::string noisy = (dir / "noisy.csv").string();
  REQUIRE(run_cli("generate --kind sin2d --rows 8 --cols 6 --amp 30 --omega-r 0.7 --omega-c 0.5 "
                  "--gamma-r 0.05 --gamma-c 0.04 -o " +
                      truth,
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 0.4 --seed 3 -o " + noisy, dir)
              .exit_code == 0);
  const std::string pgm = (dir / "view.pgm").string();
  REQUIRE(run_cli("denoise -i " + noisy +
                      " --from-meta " + noisy + ".meta.json --sweeps 2 --restarts 2 "
                      "--max-iter 60 --seed 4 --pgm " + pgm + " -o " +
                      (dir / "out").string(),
                  dir)
              .exit_code == 0);
  const auto recovered = nrev::read_csv_2d(dir / "out" / "recovered.csv");
  CHECK(recovered.rows == 8);
  CHECK(recovered.cols == 6);
  CHECK(nrev::read_text_file(pgm).substr(0, 2) == "P2");

  // Blocked flags are a 1D feature.
  CHECK(run_cli("denoise -i " + noisy + " --from-meta " + noisy +
                    ".meta.json --block-size 5 -o " + (dir / "bad").string(),
                dir)
            .exit_code == 2);
}

TEST_CASE("cli: sweep writes a deterministic aggregate and fails cleanly when empty") {
  const auto dir = scratch_dir("sweep");
  const std::string out = (dir / "runs").string();
  const std::string args =
      "sweep --kind sin1d --len 40 --amp 40 --omega 0.5 --gamma 0.03 --fractions 0.1,0.3 "
      "--num-seeds 2 --seed-base 1 --restarts 2 --max-iter 80 -o " + out;
  REQUIRE(run_cli(args, dir).exit_code == 0);
  const std::string aggregate = nrev::read_text_file(fs::path(out) / "aggregate.csv");
  std::istringstream lines(aggregate);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 5);  // header + 2 fractions * 2 seeds
  CHECK(aggregate.rfind("fraction,seed,status", 0) == 0);

  REQUIRE(run_cli(args, dir).exit_code == 0);
  const std::string again = nrev::read_text_file(fs::path(out) / "aggregate.csv");
  CHECK(drop_wall_time_column(again) == drop_wall_time_column(aggregate));

  CHECK(run_cli("sweep --kind sin1d --len 40 -o " + (dir / "none").string(), dir).exit_code == 2);
}

TEST_CASE("cli: config file drives denoise and rejects unknown keys") {
  const auto dir = scratch_dir("config");
  const std::string truth = (dir / "truth.csv").string();
  const std::string noisy = (dir / "noisy.csv").string();
  REQUIRE(run_cli("generate --kind sin1d --len 36 --amp 40 --omega 0.4 --gamma 0.02 -o " + truth,
                  dir)
              .exit_code == 0);
  REQUIRE(run_cli("corrupt -i " + truth + " --noise-frac 0.2 --seed 8 -o " + noisy, dir)
              .exit_code == 0);

  json config;
  config["restarts"] = 2;
  config["max_iterations"] = 80;
  config["seed"] = 8;
  config["boundary"] = "interior";
  config["input"] = noisy;
  config["output"] = (dir / "out").string();
  nrev::write_text_file((dir / "config.json").string(), config.dump(2));
  REQUIRE(run_cli("denoise --config " + (dir / "config.json").string(), dir).exit_code == 0);
  const json report = json::parse(nrev::read_text_file(dir / "out" / "report.json"));
  CHECK(report.at("solver_config").at("restarts") == 2);

  config["no_such_knob"] = true;
  nrev::write_text_file((dir / "bad.json").string(), config.dump(2));
  const auto run = run_cli("denoise --config " + (dir / "bad.json").string(), dir);
  CHECK(run.exit_code == 2);
  CHECK(run.err.find("no_such_knob") != std::string::npos);
}

TEST_CASE("cli: missing input file exits 3") {
  const auto dir = scratch_dir("missing");
  CHECK(run_cli("corrupt -i " + (dir / "nope.csv").string() + " --noise-frac 0.1 -o " +
                    (dir / "x.csv").string(),
                dir)
            .exit_code == 3);
}
