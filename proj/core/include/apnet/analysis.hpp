#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "apnet/graph.hpp"
#include "apnet/input_layout.hpp"
#include "apnet/protocol.hpp"

namespace apnet {

struct ErrorCoordinates {
  Eigen::VectorXd delta;  // x - epsilon * ones
  Eigen::VectorXd e;      // xi - pinv(L) Lc K2 c
};

struct ErrorDerivative {
  Eigen::VectorXd ddelta;
  Eigen::VectorXd de;
};

// Per-scenario matrices shared by the analysis routines. The integral shift
// pinv(L) Lc K2 c is computed once and cached here.
struct AnalysisContext {
  DerivedLayout derived;
  Eigen::MatrixXd L;
  Eigen::MatrixXd F;  // L + K1, positive definite for connected graphs with inputs
  Eigen::MatrixXd L_pinv;
  Eigen::VectorXd xi_shift;
};

AnalysisContext make_analysis_context(const Graph& g, const InputLayout& layout);

ErrorCoordinates to_error_coordinates(const NetworkState& s, const DerivedLayout& derived,
                                      const Eigen::MatrixXd& L_pinv);
// Same transform against the cached shift; bitwise identical to the above.
ErrorCoordinates to_error_coordinates(const NetworkState& s, const AnalysisContext& ctx);

// V = 0.5 |delta|^2 + 0.5 |e|^2.
double lyapunov(const ErrorCoordinates& ec);

// Unit-gain error dynamics: ddelta = -F delta + L e, de = -L delta.
ErrorDerivative error_rhs(const ErrorCoordinates& ec, const Eigen::MatrixXd& L,
                          const Eigen::MatrixXd& F);

// | delta . ddelta + e . de - (-delta^T F delta) | with compensated dot
// products. The cross terms cancel analytically because L is symmetric, so
// this measures rounding plus any drift between the two evaluations.
double dissipation_defect(const ErrorCoordinates& ec, const Eigen::MatrixXd& L,
                          const Eigen::MatrixXd& F);

// Entrywise defect between the original compact RHS pushed into error
// coordinates and error_rhs, at one state.
double error_consistency_defect(const NetworkState& s, const AnalysisContext& ctx);

// Max defect over all samples. Requires a unit-gain trajectory; throws
// ValidationError otherwise.
double error_consistency_check(const Trajectory& traj, const Graph& g, const InputLayout& layout);

// Eigenvalues of the 2n x 2n block matrix [[-F, L], [-L, 0]] via a dense
// nonsymmetric eigensolve, sorted by real then imaginary part. For a connected
// graph with at least one input, exactly one eigenvalue is zero (the all-ones
// direction in e) and every other has negative real part. Throws NoConvergence
// if the QR iteration fails.
std::vector<std::complex<double>> closed_loop_spectrum(const Eigen::MatrixXd& L,
                                                       const Eigen::MatrixXd& F);

// Decay rate of the slowest stable closed-loop mode: min |Re(lambda)| over
// eigenvalues with |lambda| >= 1e-8. This, not lambda_min(F)/2, is the true
// asymptotic rate of the error dynamics; on unfavourable graphs it sits far
// below lambda_min(F).
double slow_mode_rate(const std::vector<std::complex<double>>& spectrum);

struct CertificateReport {
  double lambda2 = 0.0;      // algebraic connectivity; +inf for a single node
  double lambda_min_F = 0.0;
  std::vector<std::complex<double>> closed_loop_spectrum;
  std::vector<double> V_samples;
  bool settled = false;      // |delta(t_final)|_inf < tol_settle
  std::optional<double> settling_time;  // first t with |delta|_inf < tol thereafter
  double tol_settle = 1e-6;
  double epsilon = 0.0;
  double final_delta_inf = 0.0;
  double final_e_norm = 0.0;  // reported, not asserted; e need not vanish
  // Log-linear fit of |delta| over the tail half of the run. Diagnostic only;
  // see slow_mode_rate for why this can sit below lambda_min(F)/2.
  std::optional<double> tail_slope;
};

CertificateReport certify(const Graph& g, const InputLayout& layout, const Trajectory& traj,
                          double tol_settle = 1e-6);

std::optional<double> tail_decay_slope(const Trajectory& traj, const AnalysisContext& ctx);

}  // namespace apnet
