#include "apnet/protocol.hpp"

#include <cmath>

#include "apnet/analysis.hpp"
#include "apnet/errors.hpp"
#include "apnet/input_layout.hpp"
#include "doctest.h"

using apnet::Graph;
using apnet::InputLayout;
using apnet::NetworkState;
using apnet::ProtocolParams;

namespace {

NetworkState zero_state(int n) {
  NetworkState s;
  s.t = 0.0;
  s.x = Eigen::VectorXd::Zero(n);
  s.xi = Eigen::VectorXd::Zero(n);
  return s;
}

}  // namespace

TEST_CASE("parameter validation") {
  ProtocolParams p;
  p.alpha = -1.0;
  CHECK_THROWS_AS(apnet::validate(p), apnet::ValidationError);
  p = ProtocolParams{};
  p.gamma = 0.0;
  CHECK_THROWS_AS(apnet::validate(p), apnet::ValidationError);
  p = ProtocolParams{};
  p.dt = 2.0;
  p.t_final = 1.0;
  CHECK_THROWS_AS(apnet::validate(p), apnet::ValidationError);
  p = ProtocolParams{};
  CHECK_NOTHROW(apnet::validate(p));
}

TEST_CASE("single agent with one input") {
  const Graph g(1, {});
  const InputLayout layout(1, {{5.0, {1}}});
  const auto d = apnet::rhs_agent_level(g, layout, ProtocolParams{}, zero_state(1));
  CHECK(d.dx(0) == 5.0);
  CHECK(d.dxi(0) == 0.0);
}

TEST_CASE("compact form on the 2-node path at the origin") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{4.0, {1}}});
  const Eigen::MatrixXd L = apnet::laplacian_matrix(g);
  const auto derived = apnet::build_derived(layout);
  const auto d = apnet::rhs_compact(L, derived, ProtocolParams{}, zero_state(2));
  CHECK(d.dx(0) == 4.0);
  CHECK(d.dx(1) == 0.0);
  CHECK(d.dxi(0) == 0.0);
  CHECK(d.dxi(1) == 0.0);
}

TEST_CASE("zero state with zero-valued inputs gives a zero derivative") {
  const Graph g(3, {{1, 2}, {2, 3}});
  const InputLayout layout(3, {{0.0, {2}}});
  const auto d = apnet::rhs_agent_level(g, layout, ProtocolParams{}, zero_state(3));
  CHECK(d.dx.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.dxi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("disconnected topology is rejected") {
  const Graph g(3, {{1, 2}});
  const InputLayout layout(3, {{1.0, {1}}});
  CHECK_THROWS_AS(apnet::rhs_agent_level(g, layout, ProtocolParams{}, zero_state(3)),
                  apnet::GraphNotConnected);
  CHECK_THROWS_AS(apnet::integrate(g, layout, ProtocolParams{}, Eigen::VectorXd::Zero(3),
                                   Eigen::VectorXd::Zero(3)),
                  apnet::GraphNotConnected);
}

TEST_CASE("dimension mismatches are rejected") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{4.0, {1}}});
  const Eigen::MatrixXd L = apnet::laplacian_matrix(g);
  const auto derived = apnet::build_derived(layout);
  CHECK_THROWS_AS(apnet::rhs_compact(L, derived, ProtocolParams{}, zero_state(3)),
                  apnet::DimensionMismatch);
  CHECK_THROWS_AS(apnet::integrate(g, layout, ProtocolParams{}, Eigen::VectorXd::Zero(3),
                                   Eigen::VectorXd::Zero(2)),
                  apnet::DimensionMismatch);
}

TEST_CASE("agent-level and compact forms agree") {
  const Graph g(3, {{1, 2}, {2, 3}});
  const InputLayout layout(3, {{1.0, {2}}});
  NetworkState s = zero_state(3);
  s.x << 0.3, -1.7, 2.9;
  s.xi << -0.4, 0.0, 1.1;
  ProtocolParams params;
  CHECK(apnet::agent_compact_equivalence(g, layout, params, s) <= 1e-12);
  params.alpha = 2.5;
  params.gamma = 0.7;
  CHECK(apnet::agent_compact_equivalence(g, layout, params, s) <= 1e-12);
}

TEST_CASE("unit gains reduce to the base protocol bit for bit") {
  const Graph g(4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}});
  const InputLayout layout(4, {{-13.75, {1, 3}}, {8.5, {2}}});
  NetworkState s = zero_state(4);
  s.x << 12.25, -7.5, 3.125, 99.0;
  s.xi << -1.5, 2.75, 0.0625, -64.0;
  const auto general = apnet::rhs_agent_level(g, layout, ProtocolParams{}, s);
  const auto base = apnet::rhs_agent_level_base(g, layout, s);
  CHECK((general.dx.array() == base.dx.array()).all());
  CHECK((general.dxi.array() == base.dxi.array()).all());

  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = 1.0;
  const auto traj = apnet::integrate(g, layout, params, s.x, s.xi);
  const auto traj_base = apnet::integrate_base(g, layout, params.dt, params.t_final, s.x, s.xi);
  REQUIRE(traj.samples.size() == traj_base.samples.size());
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    CHECK((traj.samples[k].x.array() == traj_base.samples[k].x.array()).all());
    CHECK((traj.samples[k].xi.array() == traj_base.samples[k].xi.array()).all());
  }
}

TEST_CASE("equilibrium stays put") {
  const Graph g(3, {{1, 2}, {2, 3}});
  const InputLayout layout(3, {{6.0, {2}}});
  const auto ctx = apnet::make_analysis_context(g, layout);
  NetworkState s;
  s.t = 0.0;
  s.x = Eigen::VectorXd::Constant(3, ctx.derived.epsilon);
  s.xi = ctx.xi_shift;
  const auto d = apnet::rhs_agent_level(g, layout, ProtocolParams{}, s);
  CHECK(d.dx.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(d.dxi.cwiseAbs().maxCoeff() <= 1e-10);

  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = 2.0;
  const auto traj = apnet::integrate(g, layout, params, s.x, s.xi);
  for (const auto& sample : traj.samples) {
    CHECK((sample.x.array() - ctx.derived.epsilon).abs().maxCoeff() <= 1e-8);
    CHECK((sample.xi - ctx.xi_shift).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("sampling grid and residual final step") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{1.0, {1}}});
  ProtocolParams params;
  params.dt = 0.1;
  params.t_final = 1.0;
  auto traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(2),
                               Eigen::VectorXd::Zero(2));
  CHECK(traj.samples.size() == 11);
  CHECK(traj.samples[3].t == 3 * 0.1);
  CHECK(traj.samples.back().t == 1.0);

  params.dt = 0.3;
  traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2));
  // floor(1/0.3) = 3 whole steps, then a residual step to land on t_final.
  CHECK(traj.samples.size() == 5);
  CHECK(traj.samples.back().t == 1.0);
}

TEST_CASE("single agent matches the closed-form relaxation") {
  const Graph g(1, {});
  const InputLayout layout(1, {{5.0, {1}}});
  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = 5.0;
  const auto traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(1),
                                     Eigen::VectorXd::Zero(1));
  for (const double t : {0.5, 1.0, 2.0, 5.0}) {
    const auto index = static_cast<std::size_t>(std::lround(t / params.dt));
    const double expected = 5.0 * (1.0 - std::exp(-t));
    CHECK(std::abs(traj.samples[index].x(0) - expected) < 1e-6);
  }
}

TEST_CASE("2-node reference run hits the pinned endpoint") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{4.0, {1}}});
  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = 20.0;
  const auto traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(2),
                                     Eigen::VectorXd::Zero(2));
  const auto& last = traj.samples.back();
  CHECK(std::abs(last.x(0) - 4.0) < 1e-4);
  CHECK(std::abs(last.x(1) - 4.0) < 1e-4);
  CHECK(last.x(0) == doctest::Approx(3.9999124043781102).epsilon(1e-9));
  CHECK(last.x(1) == doctest::Approx(3.9999273409357516).epsilon(1e-9));
  CHECK(last.xi(0) == doctest::Approx(-2.7326089047476158e-05).epsilon(1e-6));
  CHECK(last.xi(1) == doctest::Approx(2.7326089044703203e-05).epsilon(1e-6));
}

TEST_CASE("oversized steps blow up loudly") {
  const Graph g(5, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {2, 3}, {2, 4}, {2, 5}, {3, 4}, {3, 5}, {4, 5}});
  const InputLayout layout(5, {{50.0, {1, 2, 3, 4, 5}}});
  ProtocolParams params;
  params.dt = 10.0;
  params.t_final = 100.0;
  CHECK_THROWS_AS(apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(5),
                                   Eigen::VectorXd::Zero(5)),
                  apnet::NumericalBlowup);
}

TEST_CASE("default step size follows the degree bound") {
  const Graph p3(3, {{1, 2}, {2, 3}});
  const InputLayout single(3, {{1.0, {2}}});
  CHECK(apnet::default_step_size(p3, single, 1.0, 1.0) == 0.01);

  // Star with center degree 8 and one attachment: rho = (16 + 1) + 16 = 33.
  const Graph star(9, {{1, 2}, {1, 3}, {1, 4}, {1, 5}, {1, 6}, {1, 7}, {1, 8}, {1, 9}});
  const InputLayout center(9, {{1.0, {1}}});
  CHECK(apnet::default_step_size(star, center, 1.0, 1.0) ==
        doctest::Approx(0.1 / 33.0).epsilon(1e-15));
}

TEST_CASE("streaming observer sees every sample once") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{4.0, {1}}});
  ProtocolParams params;
  params.dt = 0.25;
  params.t_final = 1.0;
  int count = 0;
  double last_t = -1.0;
  apnet::integrate_observe(g, layout, params, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2),
                           apnet::RhsForm::compact, [&](const apnet::NetworkState& s) {
                             ++count;
                             CHECK(s.t > last_t);
                             last_t = s.t;
                           });
  CHECK(count == 5);
  CHECK(last_t == 1.0);
}
