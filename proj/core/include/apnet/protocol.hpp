#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "apnet/graph.hpp"
#include "apnet/input_layout.hpp"

namespace apnet {

struct ProtocolParams {
  double alpha = 1.0;  // state-coupling gain
  double gamma = 1.0;  // integral gain
  double dt = 0.01;
  double t_final = 1.0;
};

// Throws ValidationError when a gain or time field is out of range
// (alpha, gamma, dt, t_final positive; dt <= t_final).
void validate(const ProtocolParams& params);

struct NetworkState {
  double t = 0.0;
  Eigen::VectorXd x;   // agent states
  Eigen::VectorXd xi;  // integral actions
};

struct StateDerivative {
  Eigen::VectorXd dx;
  Eigen::VectorXd dxi;
};

struct Trajectory {
  ProtocolParams params;
  std::vector<NetworkState> samples;  // t = 0, dt, 2dt, ..., t_final
};

// Generalized protocol, evaluated per agent from its neighbor and attachment
// lists only:
//   dx_i  = -alpha * sum_{j~i} (x_i - x_j) + sum_{j~i} (xi_i - xi_j)
//           - alpha * sum_{h~i} (x_i - c_h)
//   dxi_i = -gamma * sum_{j~i} (x_i - x_j)
// Throws GraphNotConnected when the topology assumption fails.
StateDerivative rhs_agent_level(const Graph& g, const InputLayout& layout,
                                const ProtocolParams& params, const NetworkState& s);

// The unit-gain protocol as its own code path, kept in the same expression
// order as rhs_agent_level. Multiplying by a unit gain is exact in IEEE
// arithmetic, so alpha = gamma = 1 reduces to this bit for bit.
StateDerivative rhs_agent_level_base(const Graph& g, const InputLayout& layout,
                                     const NetworkState& s);

// Matrix form: dx = -alpha L x + L xi - alpha K1 x + alpha K2 c,
// dxi = -gamma L x. Throws DimensionMismatch on inconsistent shapes.
StateDerivative rhs_compact(const Eigen::MatrixXd& L, const DerivedLayout& derived,
                            const ProtocolParams& params, const NetworkState& s);

// Max entrywise absolute difference between the two RHS forms on one state.
double agent_compact_equivalence(const Graph& g, const InputLayout& layout,
                                 const ProtocolParams& params, const NetworkState& s);

// Default integrator step min(0.01, 0.1/rho), with rho a Gershgorin-style
// bound on the closed-loop spectral radius:
//   rho = alpha * (2 max_deg + max_i k1_i) + max(1, gamma) * 2 max_deg.
// Keeps runs stable without an eigensolve per run.
double default_step_size(const Graph& g, const InputLayout& layout,
                         double alpha, double gamma);

enum class RhsForm { agent_level, compact };

using RhsFunction = std::function<void(const NetworkState& s, StateDerivative& out)>;
using SampleObserver = std::function<void(const NetworkState& s)>;

// Classical fixed-step fourth-order Runge-Kutta over [0, t_final]. When
// t_final/dt is not integral the last step is shortened so the final sample
// lands exactly on t_final. Every protocol variant funnels through this one
// stepper, which is what makes bit-identity claims between them meaningful.
// Throws NumericalBlowup when any state magnitude exceeds 1e12 or turns
// non-finite (the usual cause is a dt above the stability bound).
void integrate_custom(const RhsFunction& rhs, const ProtocolParams& params,
                      const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0,
                      const SampleObserver& observer);

// Streaming integration of the protocol; the observer sees each sample once.
// Useful for long horizons where materializing the whole trajectory is waste.
void integrate_observe(const Graph& g, const InputLayout& layout, const ProtocolParams& params,
                       const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0, RhsForm form,
                       const SampleObserver& observer);

Trajectory integrate(const Graph& g, const InputLayout& layout, const ProtocolParams& params,
                     const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0,
                     RhsForm form = RhsForm::agent_level);

// Unit-gain trajectory through the same stepper; reference for the gain
// reduction check.
Trajectory integrate_base(const Graph& g, const InputLayout& layout, double dt, double t_final,
                          const Eigen::VectorXd& x0, const Eigen::VectorXd& xi0);

}  // namespace apnet
