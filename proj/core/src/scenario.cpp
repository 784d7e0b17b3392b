#include "apnet/scenario.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <system_error>

#include "CLI11.hpp"
#include "apnet/errors.hpp"
#include "apnet/spectral.hpp"
#include "apnet/verify.hpp"
#include "json.hpp"

namespace apnet {

namespace {

using nlohmann::json;

std::string format17(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

const json& require_field(const json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(key + ": required field is missing");
  }
  return *it;
}

int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw ParseError(field + ": expected an integer");
  }
  return j.get<int>();
}

double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) {
    throw ParseError(field + ": expected a number");
  }
  return j.get<double>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& field, int n) {
  if (!j.is_array()) {
    throw ParseError(field + ": expected an array of numbers");
  }
  if (static_cast<int>(j.size()) != n) {
    throw ValidationError(field, "expected " + std::to_string(n) + " entries, got " +
                                     std::to_string(j.size()));
  }
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) {
    v(k) = as_number(j[k], field + "[" + std::to_string(k) + "]");
  }
  return v;
}

double positive_number(const json& j, const std::string& field) {
  const double v = as_number(j, field);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(field, "must be a positive finite number");
  }
  return v;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& fallback_name) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("scenario: top level must be a JSON object");
  }
  static const std::set<std::string> known_fields = {"name", "n",  "edges",   "inputs", "alpha",
                                                     "gamma", "dt", "t_final", "x0",     "xi0",
                                                     "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!known_fields.count(key)) {
      throw ParseError(key + ": unknown field");
    }
  }

  const int n = as_int(require_field(j, "n"), "n");
  if (n < 1) {
    throw ValidationError("n", "must be at least 1");
  }

  const json& edges_json = require_field(j, "edges");
  if (!edges_json.is_array()) {
    throw ParseError("edges: expected an array of [i, j] pairs");
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(edges_json.size());
  for (std::size_t k = 0; k < edges_json.size(); ++k) {
    const std::string field = "edges[" + std::to_string(k) + "]";
    const json& pair = edges_json[k];
    if (!pair.is_array() || pair.size() != 2) {
      throw ParseError(field + ": expected a pair [i, j]");
    }
    const int a = as_int(pair[0], field);
    const int b = as_int(pair[1], field);
    if (a == b) {
      throw ValidationError(field, "self-loop at node " + std::to_string(a));
    }
    if (a < 1 || a > n || b < 1 || b > n) {
      throw ValidationError(field, "node id outside [1, " + std::to_string(n) + "]");
    }
    edges.emplace_back(a, b);
  }
  const Graph graph(n, edges);
  if (!is_connected(graph)) {
    throw ValidationError("edges", "graph is not connected");
  }

  const json& inputs_json = require_field(j, "inputs");
  if (!inputs_json.is_array()) {
    throw ParseError("inputs: expected an array of {value, targets} records");
  }
  if (inputs_json.empty()) {
    throw ValidationError("inputs", "at least one exogenous input is required");
  }
  if (static_cast<int>(inputs_json.size()) > n) {
    throw ValidationError("inputs", "more inputs than agents (m > n)");
  }
  std::vector<ExogenousInput> inputs;
  inputs.reserve(inputs_json.size());
  for (std::size_t h = 0; h < inputs_json.size(); ++h) {
    const std::string field = "inputs[" + std::to_string(h) + "]";
    const json& record = inputs_json[h];
    if (!record.is_object()) {
      throw ParseError(field + ": expected an object {value, targets}");
    }
    for (const auto& [key, value] : record.items()) {
      if (key != "value" && key != "targets") {
        throw ParseError(field + "." + key + ": unknown field");
      }
    }
    ExogenousInput input;
    input.value = as_number(require_field(record, "value"), field + ".value");
    const json& targets = require_field(record, "targets");
    if (!targets.is_array() || targets.empty()) {
      throw ParseError(field + ".targets: expected a non-empty array of agent ids");
    }
    for (std::size_t k = 0; k < targets.size(); ++k) {
      input.targets.push_back(as_int(targets[k], field + ".targets[" + std::to_string(k) + "]"));
    }
    inputs.push_back(std::move(input));
  }
  const InputLayout layout(n, std::move(inputs));

  ProtocolParams params;
  params.alpha = j.contains("alpha") ? positive_number(j["alpha"], "alpha") : 1.0;
  params.gamma = j.contains("gamma") ? positive_number(j["gamma"], "gamma") : 1.0;
  params.t_final =
      j.contains("t_final") ? positive_number(j["t_final"], "t_final") : default_horizon(graph, layout);
  if (j.contains("dt")) {
    params.dt = positive_number(j["dt"], "dt");
  } else {
    params.dt = std::min(default_step_size(graph, layout, params.alpha, params.gamma),
                         params.t_final);
  }
  if (params.dt > params.t_final) {
    throw ValidationError("dt", "step size exceeds the horizon t_final");
  }

  const Eigen::VectorXd x0 =
      j.contains("x0") ? as_vector(j["x0"], "x0", n) : Eigen::VectorXd::Zero(n).eval();
  const Eigen::VectorXd xi0 =
      j.contains("xi0") ? as_vector(j["xi0"], "xi0", n) : Eigen::VectorXd::Zero(n).eval();

  std::optional<std::int64_t> seed;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) {
      throw ParseError("seed: expected an integer");
    }
    seed = j["seed"].get<std::int64_t>();
  }

  std::string name = fallback_name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) {
      throw ParseError("name: expected a string");
    }
    name = j["name"].get<std::string>();
  }
  if (name.empty()) {
    throw ValidationError("name", "must not be empty");
  }

  return Scenario{std::move(name), graph, layout, params, x0, xi0, seed};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw IoError("failed while reading " + path.string());
  }
  return parse_scenario(buffer.str(), path.stem().string());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["n"] = s.graph.n();
  json edges = json::array();
  for (const auto& [a, b] : s.graph.edges()) {
    edges.push_back(json::array({a, b}));
  }
  j["edges"] = std::move(edges);
  json inputs = json::array();
  for (const auto& input : s.inputs.inputs()) {
    json record;
    record["value"] = input.value;
    record["targets"] = input.targets;
    inputs.push_back(std::move(record));
  }
  j["inputs"] = std::move(inputs);
  j["alpha"] = s.params.alpha;
  j["gamma"] = s.params.gamma;
  j["dt"] = s.params.dt;
  j["t_final"] = s.params.t_final;
  j["x0"] = std::vector<double>(s.x0.data(), s.x0.data() + s.x0.size());
  j["xi0"] = std::vector<double>(s.xi0.data(), s.xi0.data() + s.xi0.size());
  if (s.seed) {
    j["seed"] = *s.seed;
  }
  return j.dump(2) + "\n";
}

double default_horizon(const Graph& g, const InputLayout& layout) {
  const AnalysisContext ctx = make_analysis_context(g, layout);
  const double lambda_min_F = symmetric_eigendecomposition(ctx.F).eigenvalues(0);
  const double rate = slow_mode_rate(closed_loop_spectrum(ctx.L, ctx.F));
  return std::max(50.0 / lambda_min_F, 50.0 / rate);
}

std::string trajectory_to_csv(const Trajectory& traj, const AnalysisContext& ctx) {
  const Eigen::Index n = ctx.L.rows();
  std::string out;
  out.reserve(64 * (traj.samples.size() + 1));
  out += "t";
  for (Eigen::Index i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) out += ",xi_" + std::to_string(i);
  out += ",norm_delta_inf,V,sum_xi\n";
  for (const NetworkState& s : traj.samples) {
    const ErrorCoordinates ec = to_error_coordinates(s, ctx);
    out += format17(s.t);
    for (Eigen::Index i = 0; i < n; ++i) {
      out += ',';
      out += format17(s.x(i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      out += ',';
      out += format17(s.xi(i));
    }
    out += ',';
    out += format17(ec.delta.cwiseAbs().maxCoeff());
    out += ',';
    out += format17(lyapunov(ec));
    out += ',';
    out += format17(s.xi.sum());
    out += '\n';
  }
  return out;
}

std::string report_to_json(const CertificateReport& report) {
  json j;
  j["lambda2"] = report.lambda2;
  j["lambda_min_F"] = report.lambda_min_F;
  j["epsilon"] = report.epsilon;
  j["settled"] = report.settled;
  if (report.settling_time) {
    j["settling_time"] = *report.settling_time;
  } else {
    j["settling_time"] = nullptr;
  }
  j["tol_settle"] = report.tol_settle;
  j["final_delta_inf"] = report.final_delta_inf;
  j["final_e_norm"] = report.final_e_norm;
  if (report.tail_slope) {
    j["tail_slope"] = *report.tail_slope;
  } else {
    j["tail_slope"] = nullptr;
  }
  json spectrum = json::array();
  for (const auto& lambda : report.closed_loop_spectrum) {
    spectrum.push_back(json{{"re", lambda.real()}, {"im", lambda.imag()}});
  }
  j["closed_loop_spectrum"] = std::move(spectrum);
  j["V_samples"] = report.V_samples;
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

int exit_code_for(const std::exception& err) noexcept {
  if (dynamic_cast<const NumericalBlowup*>(&err) || dynamic_cast<const NoConvergence*>(&err)) {
    return kExitNumerical;
  }
  if (dynamic_cast<const IoError*>(&err)) {
    return kExitIo;
  }
  if (dynamic_cast<const Error*>(&err)) {
    return kExitValidation;
  }
  return kExitNumerical;
}

int run_scenario(const Scenario& s, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err) {
  try {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
      throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
    }
    if (!std::filesystem::is_directory(out_dir)) {
      throw IoError("output path " + out_dir.string() + " is not a directory");
    }

    const Trajectory traj = integrate(s.graph, s.inputs, s.params, s.x0, s.xi0);
    const AnalysisContext ctx = make_analysis_context(s.graph, s.inputs);
    const CertificateReport report = certify(s.graph, s.inputs, traj);

    const std::filesystem::path csv_path = out_dir / (s.name + "_trajectory.csv");
    const std::filesystem::path report_path = out_dir / (s.name + "_report.json");
    write_file_atomic(csv_path, trajectory_to_csv(traj, ctx));
    write_file_atomic(report_path, report_to_json(report));

    out << "scenario       " << s.name << " (n=" << s.graph.n() << ", "
        << s.graph.edges().size() << " edges, " << s.inputs.m() << " inputs)\n";
    out << "epsilon        " << format17(report.epsilon) << "\n";
    out << "settled        " << (report.settled ? "yes" : "no") << " (tol "
        << format17(report.tol_settle) << ")\n";
    out << "settling_time  "
        << (report.settling_time ? format17(*report.settling_time) : std::string("n/a")) << "\n";
    out << "lambda2        " << format17(report.lambda2) << "\n";
    out << "lambda_min_F   " << format17(report.lambda_min_F) << "\n";
    out << "wrote          " << csv_path.string() << "\n";
    out << "wrote          " << report_path.string() << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"active-passive networked multiagent consensus simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  double dt_override = 0.0;
  double t_final_override = 0.0;
  double alpha_override = 0.0;
  double gamma_override = 0.0;

  CLI::App* run_cmd = app.add_subcommand("run", "simulate a scenario, write trajectory and report");
  run_cmd->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* dt_opt = run_cmd->add_option("--dt", dt_override, "override integrator step");
  CLI::Option* t_final_opt = run_cmd->add_option("--t-final", t_final_override, "override horizon");
  CLI::Option* alpha_opt = run_cmd->add_option("--alpha", alpha_override, "override state gain");
  CLI::Option* gamma_opt = run_cmd->add_option("--gamma", gamma_override, "override integral gain");

  std::string suite = "quick";
  CLI::App* verify_cmd = app.add_subcommand("verify", "run the randomized property suites");
  verify_cmd->add_option("--suite", suite, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));

  std::string spectrum_path;
  CLI::App* spectrum_cmd =
      app.add_subcommand("spectrum", "print connectivity and closed-loop eigenvalues");
  spectrum_cmd->add_option("scenario", spectrum_path, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run_cmd->parsed()) {
      Scenario s = load_scenario(scenario_path);
      if (dt_opt->count() > 0) s.params.dt = dt_override;
      if (t_final_opt->count() > 0) s.params.t_final = t_final_override;
      if (alpha_opt->count() > 0) s.params.alpha = alpha_override;
      if (gamma_opt->count() > 0) s.params.gamma = gamma_override;
      validate(s.params);
      return run_scenario(s, out_dir, std::cout, std::cerr);
    }
    if (verify_cmd->parsed()) {
      return run_verify(suite == "full" ? VerifySuite::full : VerifySuite::quick, std::cout) == 0
                 ? kExitOk
                 : 1;
    }
    const Scenario s = load_scenario(spectrum_path);
    const AnalysisContext ctx = make_analysis_context(s.graph, s.inputs);
    std::cout << "lambda2        " << format17(algebraic_connectivity(s.graph)) << "\n";
    std::cout << "lambda_min_F   "
              << format17(symmetric_eigendecomposition(ctx.F).eigenvalues(0)) << "\n";
    std::cout << "closed-loop eigenvalues:\n";
    for (const auto& lambda : closed_loop_spectrum(ctx.L, ctx.F)) {
      const double im = lambda.imag();
      std::cout << "  " << format17(lambda.real()) << (im < 0 ? " - " : " + ")
                << format17(std::abs(im)) << "i\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace apnet
