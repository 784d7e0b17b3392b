#include "apnet/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "apnet/errors.hpp"
#include "apnet/numerics.hpp"
#include "apnet/spectral.hpp"

namespace apnet {

namespace {

void check_error_dims(const ErrorCoordinates& ec, const Eigen::MatrixXd& L,
                      const Eigen::MatrixXd& F) {
  const Eigen::Index n = L.rows();
  if (L.cols() != n || F.rows() != n || F.cols() != n || ec.delta.size() != n ||
      ec.e.size() != n) {
    throw DimensionMismatch("error coordinates and matrices must share one order");
  }
}

}  // namespace

AnalysisContext make_analysis_context(const Graph& g, const InputLayout& layout) {
  if (layout.n() != g.n()) {
    throw DimensionMismatch("layout is over " + std::to_string(layout.n()) +
                            " agents but the graph has " + std::to_string(g.n()));
  }
  AnalysisContext ctx;
  ctx.derived = build_derived(layout);
  ctx.L = laplacian_matrix(g);
  ctx.F = ctx.L + ctx.derived.K1;
  ctx.L_pinv = laplacian_pseudoinverse(ctx.L);
  ctx.xi_shift = ctx.L_pinv * (ctx.derived.Lc * (ctx.derived.K2 * ctx.derived.c_padded));
  return ctx;
}

ErrorCoordinates to_error_coordinates(const NetworkState& s, const DerivedLayout& derived,
                                      const Eigen::MatrixXd& L_pinv) {
  const Eigen::Index n = L_pinv.rows();
  if (L_pinv.cols() != n || s.x.size() != n || s.xi.size() != n || derived.K2.rows() != n) {
    throw DimensionMismatch("state, derived layout and pseudoinverse must share one order");
  }
  ErrorCoordinates ec;
  ec.delta = s.x.array() - derived.epsilon;
  ec.e = s.xi - L_pinv * (derived.Lc * (derived.K2 * derived.c_padded));
  return ec;
}

ErrorCoordinates to_error_coordinates(const NetworkState& s, const AnalysisContext& ctx) {
  ErrorCoordinates ec;
  ec.delta = s.x.array() - ctx.derived.epsilon;
  ec.e = s.xi - ctx.xi_shift;
  return ec;
}

double lyapunov(const ErrorCoordinates& ec) {
  return 0.5 * ec.delta.squaredNorm() + 0.5 * ec.e.squaredNorm();
}

ErrorDerivative error_rhs(const ErrorCoordinates& ec, const Eigen::MatrixXd& L,
                          const Eigen::MatrixXd& F) {
  check_error_dims(ec, L, F);
  ErrorDerivative d;
  d.ddelta = -(F * ec.delta) + L * ec.e;
  d.de = -(L * ec.delta);
  return d;
}

double dissipation_defect(const ErrorCoordinates& ec, const Eigen::MatrixXd& L,
                          const Eigen::MatrixXd& F) {
  const ErrorDerivative d = error_rhs(ec, L, F);
  const double vdot_chain = compensated_dot(ec.delta, d.ddelta) + compensated_dot(ec.e, d.de);
  const Eigen::VectorXd F_delta = F * ec.delta;
  const double vdot_direct = -compensated_dot(ec.delta, F_delta);
  return std::abs(vdot_chain - vdot_direct);
}

double error_consistency_defect(const NetworkState& s, const AnalysisContext& ctx) {
  const ProtocolParams unit_gains{1.0, 1.0, 1.0, 1.0};
  const StateDerivative original = rhs_compact(ctx.L, ctx.derived, unit_gains, s);
  const ErrorCoordinates ec = to_error_coordinates(s, ctx);
  const ErrorDerivative shifted = error_rhs(ec, ctx.L, ctx.F);
  const double dx_defect = (original.dx - shifted.ddelta).cwiseAbs().maxCoeff();
  const double dxi_defect = (original.dxi - shifted.de).cwiseAbs().maxCoeff();
  return std::max(dx_defect, dxi_defect);
}

double error_consistency_check(const Trajectory& traj, const Graph& g, const InputLayout& layout) {
  if (traj.params.alpha != 1.0 || traj.params.gamma != 1.0) {
    throw ValidationError("params", "error coordinates are defined for unit gains");
  }
  const AnalysisContext ctx = make_analysis_context(g, layout);
  double worst = 0.0;
  for (const NetworkState& s : traj.samples) {
    worst = std::max(worst, error_consistency_defect(s, ctx));
  }
  return worst;
}

std::vector<std::complex<double>> closed_loop_spectrum(const Eigen::MatrixXd& L,
                                                       const Eigen::MatrixXd& F) {
  const Eigen::Index n = L.rows();
  if (L.cols() != n || F.rows() != n || F.cols() != n || n == 0) {
    throw DimensionMismatch("L and F must be square of one order");
  }
  Eigen::MatrixXd M(2 * n, 2 * n);
  M << -F, L, -L, Eigen::MatrixXd::Zero(n, n);
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(M, false);
  if (solver.info() != Eigen::Success) {
    throw NoConvergence("closed-loop eigensolve did not converge");
  }
  std::vector<std::complex<double>> values(solver.eigenvalues().data(),
                                           solver.eigenvalues().data() + 2 * n);
  std::sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return values;
}

double slow_mode_rate(const std::vector<std::complex<double>>& spectrum) {
  double rate = std::numeric_limits<double>::infinity();
  for (const auto& lambda : spectrum) {
    if (std::abs(lambda) >= 1e-8) {
      rate = std::min(rate, std::abs(lambda.real()));
    }
  }
  return rate;
}

std::optional<double> tail_decay_slope(const Trajectory& traj, const AnalysisContext& ctx) {
  const std::size_t count = traj.samples.size();
  if (count < 4) {
    return std::nullopt;
  }
  // Once |delta| falls to the rounding floor of the run it stops decaying and
  // the log plot flattens into noise; fitting through that region would report
  // a spurious near-zero slope, so those samples are excluded.
  double peak = 0.0;
  for (const NetworkState& s : traj.samples) {
    peak = std::max(peak, to_error_coordinates(s, ctx).delta.norm());
  }
  const double floor = 1e-13 * peak;
  std::vector<double> ts;
  std::vector<double> logs;
  for (std::size_t k = count / 2; k < count; ++k) {
    const ErrorCoordinates ec = to_error_coordinates(traj.samples[k], ctx);
    const double norm = ec.delta.norm();
    if (norm > floor) {
      ts.push_back(traj.samples[k].t);
      logs.push_back(std::log(norm));
    }
  }
  if (ts.size() < 2) {
    return std::nullopt;
  }
  double t_mean = 0.0;
  double log_mean = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    t_mean += ts[k];
    log_mean += logs[k];
  }
  t_mean /= static_cast<double>(ts.size());
  log_mean /= static_cast<double>(ts.size());
  double cov = 0.0;
  double var = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    cov += (ts[k] - t_mean) * (logs[k] - log_mean);
    var += (ts[k] - t_mean) * (ts[k] - t_mean);
  }
  if (var == 0.0) {
    return std::nullopt;
  }
  return cov / var;
}

CertificateReport certify(const Graph& g, const InputLayout& layout, const Trajectory& traj,
                          double tol_settle) {
  if (traj.samples.empty()) {
    throw ValidationError("trajectory", "cannot certify an empty trajectory");
  }
  const AnalysisContext ctx = make_analysis_context(g, layout);

  CertificateReport report;
  report.tol_settle = tol_settle;
  report.epsilon = ctx.derived.epsilon;
  report.lambda2 = algebraic_connectivity(g);
  report.lambda_min_F = symmetric_eigendecomposition(ctx.F).eigenvalues(0);
  report.closed_loop_spectrum = closed_loop_spectrum(ctx.L, ctx.F);

  report.V_samples.reserve(traj.samples.size());
  std::optional<double> settle_candidate;
  double last_delta_inf = 0.0;
  for (const NetworkState& s : traj.samples) {
    const ErrorCoordinates ec = to_error_coordinates(s, ctx);
    report.V_samples.push_back(lyapunov(ec));
    last_delta_inf = ec.delta.cwiseAbs().maxCoeff();
    if (last_delta_inf < tol_settle) {
      if (!settle_candidate) {
        settle_candidate = s.t;
      }
    } else {
      settle_candidate.reset();
    }
  }
  report.settled = settle_candidate.has_value();
  report.settling_time = settle_candidate;
  report.final_delta_inf = last_delta_inf;
  report.final_e_norm = to_error_coordinates(traj.samples.back(), ctx).e.norm();
  report.tail_slope = tail_decay_slope(traj, ctx);
  return report;
}

}  // namespace apnet
