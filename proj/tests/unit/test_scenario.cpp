#include "apnet/scenario.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "apnet/errors.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("apnet_" + tag + "_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const char* kMinimal = R"({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 4.0, "targets": [1]}]})";

}  // namespace

TEST_CASE("minimal scenario gets defaults") {
  const auto s = apnet::parse_scenario(kMinimal, "mini");
  CHECK(s.name == "mini");
  CHECK(s.graph.n() == 2);
  CHECK(s.inputs.m() == 1);
  CHECK(s.params.alpha == 1.0);
  CHECK(s.params.gamma == 1.0);
  CHECK(s.params.dt > 0.0);
  CHECK(s.params.dt <= s.params.t_final);
  CHECK(s.params.t_final ==
        doctest::Approx(apnet::default_horizon(s.graph, s.inputs)).epsilon(1e-12));
  CHECK(s.x0.size() == 2);
  CHECK(s.x0.cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.xi0.cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(s.seed.has_value());
}

TEST_CASE("parse failures name the offending field") {
  CHECK_THROWS_AS(apnet::parse_scenario("{not json", "x"), apnet::ParseError);
  CHECK_THROWS_AS(apnet::parse_scenario("[1, 2]", "x"), apnet::ParseError);
  CHECK_THROWS_AS(apnet::parse_scenario(R"({"edges": [], "inputs": []})", "x"),
                  apnet::ParseError);

  try {
    apnet::parse_scenario(R"({"n": 2, "edges": [[1, 3]], "inputs": [{"value": 1, "targets": [1]}]})",
                          "x");
    FAIL("expected ValidationError");
  } catch (const apnet::ValidationError& e) {
    CHECK(std::string(e.what()).find("edges[0]") != std::string::npos);
  }

  try {
    apnet::parse_scenario(R"({"n": 3, "edges": [[1, 2]], "inputs": [{"value": 1, "targets": [1]}]})",
                          "x");
    FAIL("expected ValidationError");
  } catch (const apnet::ValidationError& e) {
    CHECK(std::string(e.what()).find("not connected") != std::string::npos);
  }

  try {
    apnet::parse_scenario(
        R"({"n": 1, "edges": [], "inputs": [{"value": 1, "targets": [1]}, {"value": 2, "targets": [1]}]})",
        "x");
    FAIL("expected ValidationError");
  } catch (const apnet::ValidationError& e) {
    CHECK(std::string(e.what()).find("inputs") != std::string::npos);
  }

  try {
    apnet::parse_scenario(
        R"({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1, "targets": [1]}], "x0": [0.0]})",
        "x");
    FAIL("expected ValidationError");
  } catch (const apnet::ValidationError& e) {
    CHECK(std::string(e.what()).find("x0") != std::string::npos);
  }

  CHECK_THROWS_AS(
      apnet::parse_scenario(
          R"({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1, "targets": [1]}], "typo": 1})",
          "x"),
      apnet::ParseError);

  CHECK_THROWS_AS(
      apnet::parse_scenario(
          R"({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 1, "targets": [1]}], "dt": 9.0, "t_final": 2.0})",
          "x"),
      apnet::ValidationError);
}

TEST_CASE("serialization round-trips exactly") {
  const auto s = apnet::parse_scenario(
      R"({"name": "rt", "n": 3, "edges": [[2, 1], [2, 3]],
          "inputs": [{"value": -3.25, "targets": [3, 1]}],
          "alpha": 1.5, "gamma": 0.25, "dt": 0.004375, "t_final": 2.125,
          "x0": [0.1, -0.2, 0.3], "xi0": [0, 0, 0], "seed": 99})",
      "x");
  const std::string text = apnet::scenario_to_json(s);
  const auto back = apnet::parse_scenario(text, "y");
  CHECK(back.name == "rt");
  CHECK(back.graph.edges() == s.graph.edges());
  CHECK(back.params.dt == s.params.dt);
  CHECK(back.params.t_final == s.params.t_final);
  CHECK(back.seed == s.seed);
  CHECK(apnet::scenario_to_json(back) == text);
}

TEST_CASE("exit codes by failure family") {
  CHECK(apnet::exit_code_for(apnet::ValidationError("f", "m")) == apnet::kExitValidation);
  CHECK(apnet::exit_code_for(apnet::ParseError("m")) == apnet::kExitValidation);
  CHECK(apnet::exit_code_for(apnet::GraphNotConnected("m")) == apnet::kExitValidation);
  CHECK(apnet::exit_code_for(apnet::NumericalBlowup("m")) == apnet::kExitNumerical);
  CHECK(apnet::exit_code_for(apnet::NoConvergence("m")) == apnet::kExitNumerical);
  CHECK(apnet::exit_code_for(apnet::IoError("m")) == apnet::kExitIo);
  CHECK(apnet::exit_code_for(std::runtime_error("m")) == apnet::kExitNumerical);
}

TEST_CASE("missing scenario file raises IoError") {
  CHECK_THROWS_AS(apnet::load_scenario("/nonexistent/apnet/scenario.json"), apnet::IoError);
}

TEST_CASE("atomic write replaces the target in one step") {
  const TempDir dir("atomic");
  const fs::path target = dir.path / "out.txt";
  apnet::write_file_atomic(target, "first\n");
  apnet::write_file_atomic(target, "second\n");
  CHECK(slurp(target) == "second\n");
  for (const auto& entry : fs::directory_iterator(dir.path)) {
    CHECK(entry.path() == target);
  }
}

TEST_CASE("trajectory CSV shape and round-trip precision") {
  const auto s = apnet::parse_scenario(
      R"({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 4.0, "targets": [1]}],
          "dt": 0.3, "t_final": 1.0})",
      "csv");
  const auto traj = apnet::integrate(s.graph, s.inputs, s.params, s.x0, s.xi0);
  const auto ctx = apnet::make_analysis_context(s.graph, s.inputs);
  const std::string csv = apnet::trajectory_to_csv(traj, ctx);

  std::stringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "t,x_1,x_2,xi_1,xi_2,norm_delta_inf,V,sum_xi");

  std::size_t rows = 0;
  std::string row;
  std::string second_row;
  while (std::getline(lines, row)) {
    if (++rows == 2) second_row = row;
    CHECK(std::count(row.begin(), row.end(), ',') == 7);
  }
  // floor(1.0/0.3) = 3 whole steps, one residual step, plus the t = 0 row.
  CHECK(rows == 5);
  CHECK(rows == traj.samples.size());

  // 17 significant digits reproduce the stored double exactly.
  const std::string first_field = second_row.substr(0, second_row.find(','));
  CHECK(std::strtod(first_field.c_str(), nullptr) == traj.samples[1].t);
}

TEST_CASE("run writes report and trajectory deterministically") {
  const TempDir dir("run");
  const fs::path scenario_path = dir.path / "mini.json";
  apnet::write_file_atomic(scenario_path, std::string(kMinimal) + "\n");

  auto s = apnet::load_scenario(scenario_path);
  s.params.t_final = 5.0;
  std::ostringstream out;
  std::ostringstream err;
  const int code = apnet::run_scenario(s, dir.path / "out", out, err);
  CHECK(code == apnet::kExitOk);
  CHECK(err.str().empty());
  CHECK(out.str().find("epsilon") != std::string::npos);

  const fs::path csv_path = dir.path / "out" / "mini_trajectory.csv";
  const fs::path report_path = dir.path / "out" / "mini_report.json";
  REQUIRE(fs::exists(csv_path));
  REQUIRE(fs::exists(report_path));
  const std::string first_csv = slurp(csv_path);

  std::ostringstream out2;
  CHECK(apnet::run_scenario(s, dir.path / "out", out2, err) == apnet::kExitOk);
  CHECK(slurp(csv_path) == first_csv);

  const auto report = nlohmann::json::parse(slurp(report_path));
  CHECK(report["epsilon"].get<double>() == 4.0);
  CHECK(report["lambda2"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(report["closed_loop_spectrum"].size() == 4);
  CHECK(report["closed_loop_spectrum"][0].contains("re"));
  CHECK(report["closed_loop_spectrum"][0].contains("im"));
  CHECK(report["settled"].is_boolean());
  CHECK(report["V_samples"].size() == 501);
}

TEST_CASE("run into an unusable output path fails with the I/O code") {
  const TempDir dir("badout");
  const fs::path blocker = dir.path / "blocked";
  apnet::write_file_atomic(blocker, "not a directory\n");
  const auto s = apnet::parse_scenario(kMinimal, "mini");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(apnet::run_scenario(s, blocker, out, err) == apnet::kExitIo);
  CHECK_FALSE(err.str().empty());
}

TEST_CASE("cli surface") {
  const TempDir dir("cli");
  const fs::path scenario_path = dir.path / "mini.json";
  apnet::write_file_atomic(
      scenario_path,
      R"({"n": 2, "edges": [[1, 2]], "inputs": [{"value": 4.0, "targets": [1]}], "t_final": 5.0})");
  const std::string scenario = scenario_path.string();
  const std::string out_dir = (dir.path / "out").string();

  {
    const char* argv[] = {"apnet", "run", scenario.c_str(), "--out", out_dir.c_str()};
    CHECK(apnet::cli_main(5, argv) == apnet::kExitOk);
  }
  {
    const char* argv[] = {"apnet", "run", scenario.c_str(), "--out", out_dir.c_str(),
                          "--t-final", "2.0", "--dt", "0.02"};
    CHECK(apnet::cli_main(9, argv) == apnet::kExitOk);
  }
  {
    const char* argv[] = {"apnet", "spectrum", scenario.c_str()};
    CHECK(apnet::cli_main(3, argv) == apnet::kExitOk);
  }
  {
    const char* argv[] = {"apnet", "run", "/nonexistent.json", "--out", out_dir.c_str()};
    CHECK(apnet::cli_main(5, argv) == apnet::kExitIo);
  }
  {
    const char* argv[] = {"apnet", "run", scenario.c_str(), "--out", out_dir.c_str(),
                          "--alpha", "-1.0"};
    CHECK(apnet::cli_main(7, argv) == apnet::kExitValidation);
  }
  {
    const char* argv[] = {"apnet"};
    CHECK(apnet::cli_main(1, argv) == apnet::kExitValidation);
  }
  {
    const char* argv[] = {"apnet", "--help"};
    CHECK(apnet::cli_main(2, argv) == apnet::kExitOk);
  }
}
