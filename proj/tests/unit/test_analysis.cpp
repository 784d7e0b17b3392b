#include "apnet/analysis.hpp"

#include <cmath>
#include <complex>

#include "apnet/errors.hpp"
#include "apnet/scenario.hpp"
#include "doctest.h"

using apnet::Graph;
using apnet::InputLayout;
using apnet::NetworkState;
using apnet::ProtocolParams;

TEST_CASE("error coordinates subtract the average and the integral shift") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{2.0, {1}}, {4.0, {2}}});
  const auto ctx = apnet::make_analysis_context(g, layout);

  CHECK(ctx.derived.epsilon == 3.0);
  CHECK(ctx.xi_shift(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ctx.xi_shift(1) == doctest::Approx(-0.5).epsilon(1e-12));

  NetworkState s;
  s.t = 0.0;
  s.x = Eigen::VectorXd(2);
  s.xi = Eigen::VectorXd(2);
  s.x << 3.1, 2.8;
  s.xi << 0.8, -0.1;
  const auto ec = apnet::to_error_coordinates(s, ctx);
  CHECK(ec.delta(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(ec.delta(1) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(ec.e(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(ec.e(1) == doctest::Approx(0.4).epsilon(1e-12));

  // The two-argument overload recomputes the shift through the same chain.
  const auto ec2 = apnet::to_error_coordinates(s, ctx.derived, ctx.L_pinv);
  CHECK((ec.delta.array() == ec2.delta.array()).all());
  CHECK((ec.e.array() == ec2.e.array()).all());
}

TEST_CASE("lyapunov value") {
  apnet::ErrorCoordinates ec;
  ec.delta = Eigen::VectorXd(2);
  ec.e = Eigen::VectorXd(2);
  ec.delta << 3.0, 4.0;
  ec.e << 0.0, 0.0;
  CHECK(apnet::lyapunov(ec) == 12.5);
  ec.e << 1.0, 2.0;
  CHECK(apnet::lyapunov(ec) == 15.0);
}

TEST_CASE("error dynamics on a single agent") {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd F(1, 1);
  F << 1.0;
  apnet::ErrorCoordinates ec;
  ec.delta = Eigen::VectorXd(1);
  ec.e = Eigen::VectorXd(1);
  ec.delta << 2.0;
  ec.e << 3.0;
  const auto d = apnet::error_rhs(ec, L, F);
  CHECK(d.ddelta(0) == -2.0);
  CHECK(d.de(0) == 0.0);
  CHECK(apnet::dissipation_defect(ec, L, F) <= 1e-12);
}

TEST_CASE("dissipation identity along a trajectory") {
  const Graph g(3, {{1, 2}, {2, 3}});
  const InputLayout layout(3, {{6.0, {2}}});
  const auto ctx = apnet::make_analysis_context(g, layout);
  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = 10.0;
  const auto traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(3),
                                     Eigen::VectorXd::Zero(3));
  double worst = 0.0;
  for (const auto& s : traj.samples) {
    const auto ec = apnet::to_error_coordinates(s, ctx);
    worst = std::max(worst, apnet::dissipation_defect(ec, ctx.L, ctx.F));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("error consistency holds at unit gains and rejects others") {
  const Graph g(3, {{1, 2}, {2, 3}});
  const InputLayout layout(3, {{6.0, {2}}, {-1.5, {1, 3}}});
  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = 5.0;
  Eigen::VectorXd x0(3);
  Eigen::VectorXd xi0(3);
  x0 << 40.0, -80.0, 15.0;
  xi0 << -3.0, 97.0, 2.0;
  const auto traj = apnet::integrate(g, layout, params, x0, xi0);
  CHECK(apnet::error_consistency_check(traj, g, layout) <= 1e-10);

  auto gained = traj;
  gained.params.alpha = 2.0;
  CHECK_THROWS_AS(apnet::error_consistency_check(gained, g, layout), apnet::ValidationError);
}

TEST_CASE("closed-loop spectrum of the 2-node reference") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{4.0, {1}}});
  const auto ctx = apnet::make_analysis_context(g, layout);
  const auto spectrum = apnet::closed_loop_spectrum(ctx.L, ctx.F);
  REQUIRE(spectrum.size() == 4);
  CHECK(spectrum[0].real() == doctest::Approx(-1.2266988257582023).epsilon(1e-9));
  CHECK(spectrum[0].imag() == doctest::Approx(-1.4677115087102224).epsilon(1e-9));
  CHECK(spectrum[1].real() == doctest::Approx(-1.2266988257582023).epsilon(1e-9));
  CHECK(spectrum[1].imag() == doctest::Approx(1.4677115087102224).epsilon(1e-9));
  CHECK(spectrum[2].real() == doctest::Approx(-0.54660234848359635).epsilon(1e-9));
  CHECK(std::abs(spectrum[2].imag()) < 1e-10);
  CHECK(std::abs(spectrum[3]) < 1e-10);
}

TEST_CASE("closed-loop spectrum of the 3-node path with a middle input") {
  const Graph g(3, {{1, 2}, {2, 3}});
  const InputLayout layout(3, {{6.0, {2}}});
  const auto ctx = apnet::make_analysis_context(g, layout);
  const auto spectrum = apnet::closed_loop_spectrum(ctx.L, ctx.F);
  REQUIRE(spectrum.size() == 6);
  CHECK(spectrum[0].real() == doctest::Approx(-1.8284840716451893).epsilon(1e-9));
  CHECK(spectrum[0].imag() == doctest::Approx(-2.3242610498003424).epsilon(1e-9));
  CHECK(spectrum[1].imag() == doctest::Approx(2.3242610498003424).epsilon(1e-9));
  CHECK(spectrum[2].real() == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(spectrum[2].imag() == doctest::Approx(-0.86602540378443904).epsilon(1e-9));
  CHECK(spectrum[3].imag() == doctest::Approx(0.86602540378443904).epsilon(1e-9));
  CHECK(spectrum[4].real() == doctest::Approx(-0.34303185670961933).epsilon(1e-9));
  CHECK(std::abs(spectrum[5]) < 1e-10);

  CHECK(apnet::slow_mode_rate(spectrum) == doctest::Approx(0.34303185670961933).epsilon(1e-9));
}

TEST_CASE("certificate on the settled 2-node run") {
  const Graph g(2, {{1, 2}});
  const InputLayout layout(2, {{4.0, {1}}});
  ProtocolParams params;
  params.dt = 0.01;
  params.t_final = apnet::default_horizon(g, layout);
  const auto traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(2),
                                     Eigen::VectorXd::Zero(2));
  const auto report = apnet::certify(g, layout, traj);

  CHECK(report.epsilon == 4.0);
  CHECK(report.lambda2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(report.lambda_min_F == doctest::Approx(0.38196601125010515).epsilon(1e-12));
  CHECK(report.settled);
  REQUIRE(report.settling_time.has_value());
  CHECK(*report.settling_time > 0.0);
  CHECK(*report.settling_time < params.t_final);
  CHECK(report.final_delta_inf < 1e-6);
  CHECK(report.V_samples.size() == traj.samples.size());
  CHECK(report.V_samples.front() > report.V_samples.back());
  // At this horizon the error has long since hit the rounding floor, so the
  // tail half carries no decay information and the fit declines to report.
  CHECK_FALSE(report.tail_slope.has_value());

  // Too-short horizon: converging but not yet settled at tol 1e-6, and the
  // tail is still decaying so the slope is measurable there.
  params.t_final = 20.0;
  const auto short_traj = apnet::integrate(g, layout, params, Eigen::VectorXd::Zero(2),
                                           Eigen::VectorXd::Zero(2));
  const auto short_report = apnet::certify(g, layout, short_traj);
  CHECK_FALSE(short_report.settled);
  CHECK(short_report.final_delta_inf < 1e-4);
  REQUIRE(short_report.tail_slope.has_value());
  CHECK(*short_report.tail_slope < -0.15);
}
