#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "apnet/analysis.hpp"
#include "apnet/graph.hpp"
#include "apnet/input_layout.hpp"
#include "apnet/protocol.hpp"

namespace apnet {

struct Scenario {
  std::string name;
  Graph graph;
  InputLayout inputs;
  ProtocolParams params;
  Eigen::VectorXd x0;
  Eigen::VectorXd xi0;
  std::optional<std::int64_t> seed;  // reserved for randomized generators
};

// Scenario files are JSON objects with fields {name, n, edges, inputs, alpha,
// gamma, dt, t_final, x0, xi0, seed}. n, edges and inputs are required;
// everything else defaults (unit gains, stability-bounded dt, spectral
// horizon, zero initial conditions). Malformed syntax or types raise
// ParseError; semantic violations (ids out of range, disconnected graph,
// m > n, length mismatches) raise ValidationError. Both name the offending
// field, e.g. "edges[0]".
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text, const std::string& fallback_name);

// Serialization with all defaults materialized; load(serialize(s)) == s.
std::string scenario_to_json(const Scenario& s);

// Default horizon: 50 time constants of the slowest closed-loop mode or of
// lambda_min(F), whichever is longer. The F-based rule alone under-integrates
// graphs whose slow mode decays much slower than lambda_min(F).
double default_horizon(const Graph& g, const InputLayout& layout);

// Columns: t, x_1..x_n, xi_1..xi_n, norm_delta_inf, V, sum_xi. Floats carry 17
// significant digits so values round-trip exactly.
std::string trajectory_to_csv(const Trajectory& traj, const AnalysisContext& ctx);

std::string report_to_json(const CertificateReport& report);

// Write-then-rename so readers never observe a partial file. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(const std::exception& err) noexcept;

// Simulate, certify, and write <name>_trajectory.csv plus <name>_report.json
// into out_dir, printing a one-screen summary to `out`. Returns an exit code
// instead of throwing; diagnostics go to `err`.
int run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                 std::ostream& out, std::ostream& err);

// Full command-line surface: run, verify, spectrum.
int cli_main(int argc, const char* const* argv);

}  // namespace apnet
