#include "apnet/protocol.hpp"

#include <cmath>
#include <string>

#include "apnet/errors.hpp"

namespace apnet {

namespace {

void validate_gains(double alpha, double gamma) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ValidationError("alpha", "must be a positive finite real, got " + std::to_string(alpha));
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("gamma", "must be a positive finite real, got " + std::to_string(gamma));
  }
}

void check_state_dims(int n, const NetworkState& s) {
  if (s.x.size() != n || s.xi.size() != n) {
    throw DimensionMismatch("state vectors must have length " + std::to_string(n) + ", got x: " +
                            std::to_string(s.x.size()) + ", xi: " + std::to_string(s.xi.size()));
  }
}

// The unit-gain body below repeats this loop on purpose: a unit gain
// multiplies exactly in IEEE arithmetic, so keeping both paths in the same
// expression order makes the alpha = gamma = 1 reduction bit-identical, and
// the tests assert exactly that.
void rhs_agent_level_into(const Graph& g, const InputLayout& layout, double alpha, double gamma,
                          const NetworkState& s, StateDerivative& out) {
  for (int id = 1; id <= g.n(); ++id) {
    const int r = id - 1;
    double state_gap = 0.0;
    double integral_gap = 0.0;
    for (int j : g.neighbors_of(id)) {
      state_gap += s.x(r) - s.x(j - 1);
      integral_gap += s.xi(r) - s.xi(j - 1);
    }
    double input_gap = 0.0;
    for (int h : layout.attachments_of(id)) {
      input_gap += s.x(r) - layout.inputs()[h - 1].value;
    }
    out.dx(r) = -(alpha * state_gap) + integral_gap - alpha * input_gap;
    out.dxi(r) = -(gamma * state_gap);
  }
}

void rhs_agent_level_base_into(const Graph& g, const InputLayout& layout, const NetworkState& s,
                               StateDerivative& out) {
  for (int id = 1; id <= g.n(); ++id) {
    const int r = id - 1;
    double state_gap = 0.0;
    double integral_gap = 0.0;
    for (int j : g.neighbors_of(id)) {
      state_gap += s.x(r) - s.x(j - 1);
      integral_gap += s.xi(r) - s.xi(j - 1);
    }
    double input_gap = 0.0;
    for (int h : layout.attachments_of(id)) {
      input_gap += s.x(r) - layout.inputs()[h - 1].value;
    }
    out.dx(r) = -state_gap + integral_gap - input_gap;
    out.dxi(r) = -state_gap;
  }
}

void rhs_compact_into(const Eigen::MatrixXd& L, const DerivedLayout& derived, double alpha,
                      double gamma, const Eigen::VectorXd& forcing, const NetworkState& s,
                      Eigen::VectorXd& scratch_Lx, StateDerivative& out) {
  scratch_Lx.noalias() = L * s.x;
  out.dx.noalias() = L * s.xi;
  out.dx -= alpha * scratch_Lx;
  out.dx -= alpha * derived.K1.diagonal().cwiseProduct(s.x);
  out.dx += alpha * forcing;
  out.dxi = -(gamma * scratch_Lx);
}

void require_consistent(const Graph& g, const InputLayout& layout) {
  if (layout.n() != g.n()) {
    throw DimensionMismatch("layout is over " + std::to_string(layout.n()) +
                            " agents but the graph has " + std::to_string(g.n()));
  }
}

void require_connected(const Graph& g) {
  if (!is_connected(g)) {
    throw GraphNotConnected("the protocol requires a connected communication graph");
  }
}

}  // namespace

void validate(const ProtocolParams& params) {
  validate_gains(params.alpha, params.gamma);
  if (!(params.dt > 0.0) || !std::isfinite(params.dt)) {
    throw ValidationError("dt", "must be a positive finite real, got " + std::to_string(params.dt));
  }
  if (!(params.t_final > 0.0) || !std::isfinite(params.t_final)) {
    throw ValidationError("t_final",
                          "must be a positive finite real, got " + std::to_string(params.t_final));
  }
  if (params.dt > params.t_final) {
    throw ValidationError("dt", "step size exceeds the horizon t_final");
  }
}

StateDerivative rhs_agent_level(const Graph& g, const InputLayout& layout,
                                const ProtocolParams& params, const NetworkState& s) {
  validate_gains(params.alpha, params.gamma);
  require_consistent(g, layout);
  check_state_dims(g.n(), s);
  require_connected(g);
  StateDerivative out{Eigen::VectorXd(g.n()), Eigen::VectorXd(g.n())};
  rhs_agent_level_into(g, layout, params.alpha, params.gamma, s, out);
  return out;
}

StateDerivative rhs_agent_level_base(const Graph& g, const InputLayout& layout,
                                     const NetworkState& s) {
  require_consistent(g, layout);
  check_state_dims(g.n(), s);
  require_connected(g);
  StateDerivative out{Eigen::VectorXd(g.n()), Eigen::VectorXd(g.n())};
  rhs_agent_level_base_into(g, layout, s, out);
  return out;
}

StateDerivative rhs_compact(const Eigen::MatrixXd& L, const DerivedLayout& derived,
                            const ProtocolParams& params, const NetworkState& s) {
  validate_gains(params.alpha, params.gamma);
  const Eigen::Index n = L.rows();
  if (L.cols() != n || derived.K1.rows() != n || derived.K1.cols() != n ||
      derived.K2.rows() != n || derived.K2.cols() != n || derived.c_padded.size() != n ||
      s.x.size() != n || s.xi.size() != n) {
    throw DimensionMismatch("compact form needs L, K1, K2 square of one order and vectors to match");
  }
  const Eigen::VectorXd forcing = derived.K2 * derived.c_padded;
  Eigen::VectorXd scratch(n);
  StateDerivative out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  rhs_compact_into(L, derived, params.alpha, params.gamma, forcing, s, scratch, out);
  return out;
}

double agent_compact_equivalence(const Graph& g, const InputLayout& layout,
                                 const ProtocolParams& params, const NetworkState& s) {
  const StateDerivative agent = rhs_agent_level(g, layout, params, s);
  const StateDerivative compact = rhs_compact(laplacian_matrix(g), build_derived(layout), params, s);
  const double dx_diff = (agent.dx - compact.dx).cwiseAbs().maxCoeff();
  const double dxi_diff = (agent.dxi - compact.dxi).cwiseAbs().maxCoeff();
  return std::max(dx_diff, dxi_diff);
}

double default_step_size(const Graph& g, const InputLayout& layout, double alpha, double gamma) {
  validate_gains(alpha, gamma);
  require_consistent(g, layout);
  int max_degree = 0;
  int max_attachments = 0;
  for (int id = 1; id <= g.n(); ++id) {
    max_degree = std::max(max_degree, g.degree_of(id));
    max_attachments = std::max(max_attachments, static_cast<int>(layout.attachments_of(id).size()));
  }
  const double rho = alpha * (2.0 * max_degree + max_attachments) +
                     std::max(1.0, gamma) * 2.0 * max_degree;
  return std::min(0.01, 0.1 / rho);
}

void integrate_custom(const RhsFunction& rhs, const ProtocolParams& params,
                      const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0,
                      const SampleObserver& observer) {
  validate(params);
  const Eigen::Index n = x0.size();
  if (xi0.size() != n || n == 0) {
    throw DimensionMismatch("x0 and xi0 must be non-empty and of equal length");
  }

  NetworkState s{0.0, x0, xi0};
  const auto check_finite = [](const NetworkState& state) {
    if (!state.x.allFinite() || !state.xi.allFinite() ||
        state.x.cwiseAbs().maxCoeff() > 1e12 || state.xi.cwiseAbs().maxCoeff() > 1e12) {
      throw NumericalBlowup("state magnitude exceeded 1e12 at t = " + std::to_string(state.t) +
                            "; dt is likely above the stability bound");
    }
  };
  check_finite(s);
  observer(s);

  const double dt = params.dt;
  // The nudge keeps near-integral ratios like 1/0.01 from losing their last
  // full step to representation error.
  const auto full_steps = static_cast<long long>(std::floor(params.t_final / dt + 1e-9));
  const double residual = params.t_final - static_cast<double>(full_steps) * dt;
  const bool has_residual = residual > 1e-9 * dt;
  const long long total_steps = full_steps + (has_residual ? 1 : 0);

  StateDerivative k1{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  StateDerivative k2{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  StateDerivative k3{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  StateDerivative k4{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  NetworkState stage{0.0, Eigen::VectorXd(n), Eigen::VectorXd(n)};

  for (long long step = 0; step < total_steps; ++step) {
    const bool residual_step = step == full_steps;
    const double h = residual_step ? residual : dt;

    rhs(s, k1);
    stage.t = s.t + 0.5 * h;
    stage.x = s.x + (0.5 * h) * k1.dx;
    stage.xi = s.xi + (0.5 * h) * k1.dxi;
    rhs(stage, k2);
    stage.x = s.x + (0.5 * h) * k2.dx;
    stage.xi = s.xi + (0.5 * h) * k2.dxi;
    rhs(stage, k3);
    stage.t = s.t + h;
    stage.x = s.x + h * k3.dx;
    stage.xi = s.xi + h * k3.dxi;
    rhs(stage, k4);

    s.x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    s.xi += (h / 6.0) * (k1.dxi + 2.0 * k2.dxi + 2.0 * k3.dxi + k4.dxi);
    const bool last = step + 1 == total_steps;
    s.t = last ? params.t_final : static_cast<double>(step + 1) * dt;

    check_finite(s);
    observer(s);
  }
}

void integrate_observe(const Graph& g, const InputLayout& layout, const ProtocolParams& params,
                       const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0, RhsForm form,
                       const SampleObserver& observer) {
  require_consistent(g, layout);
  if (x0.size() != g.n() || xi0.size() != g.n()) {
    throw DimensionMismatch("initial conditions must have length " + std::to_string(g.n()));
  }
  require_connected(g);

  if (form == RhsForm::agent_level) {
    const RhsFunction rhs = [&](const NetworkState& s, StateDerivative& out) {
      rhs_agent_level_into(g, layout, params.alpha, params.gamma, s, out);
    };
    integrate_custom(rhs, params, x0, xi0, observer);
    return;
  }

  const Eigen::MatrixXd L = laplacian_matrix(g);
  const DerivedLayout derived = build_derived(layout);
  const Eigen::VectorXd forcing = derived.K2 * derived.c_padded;
  Eigen::VectorXd scratch(g.n());
  const RhsFunction rhs = [&](const NetworkState& s, StateDerivative& out) {
    rhs_compact_into(L, derived, params.alpha, params.gamma, forcing, s, scratch, out);
  };
  integrate_custom(rhs, params, x0, xi0, observer);
}

Trajectory integrate(const Graph& g, const InputLayout& layout, const ProtocolParams& params,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0, RhsForm form) {
  Trajectory traj;
  traj.params = params;
  integrate_observe(g, layout, params, x0, xi0, form,
                    [&](const NetworkState& s) { traj.samples.push_back(s); });
  return traj;
}

Trajectory integrate_base(const Graph& g, const InputLayout& layout, double dt, double t_final,
                          const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0) {
  require_consistent(g, layout);
  if (x0.size() != g.n() || xi0.size() != g.n()) {
    throw DimensionMismatch("initial conditions must have length " + std::to_string(g.n()));
  }
  require_connected(g);

  const ProtocolParams params{1.0, 1.0, dt, t_final};
  const RhsFunction rhs = [&](const NetworkState& s, StateDerivative& out) {
    rhs_agent_level_base_into(g, layout, s, out);
  };
  Trajectory traj;
  traj.params = params;
  integrate_custom(rhs, params, x0, xi0,
                   [&](const NetworkState& s) { traj.samples.push_back(s); });
  return traj;
}

}  // namespace apnet
