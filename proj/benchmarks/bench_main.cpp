#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "apnet/analysis.hpp"
#include "apnet/graph.hpp"
#include "apnet/input_layout.hpp"
#include "apnet/protocol.hpp"
#include "apnet/spectral.hpp"
#include "apnet/verify.hpp"

namespace {

apnet::SampledScenario make_fixture(int n) {
  apnet::Rng rng(91);
  return apnet::sample_scenario(rng, n, n, 100.0);
}

apnet::NetworkState make_state(int n) {
  apnet::Rng rng(92);
  apnet::NetworkState s;
  s.t = 0.0;
  s.x.resize(n);
  s.xi.resize(n);
  for (int i = 0; i < n; ++i) {
    s.x(i) = rng.uniform_real(-100.0, 100.0);
    s.xi(i) = rng.uniform_real(-100.0, 100.0);
  }
  return s;
}

void bm_rhs_agent_level(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const apnet::SampledScenario sc = make_fixture(n);
  const apnet::NetworkState s = make_state(n);
  const apnet::ProtocolParams params;
  for (auto _ : state) {
    benchmark::DoNotOptimize(apnet::rhs_agent_level(sc.graph, sc.layout, params, s));
  }
}
BENCHMARK(bm_rhs_agent_level)->Arg(8)->Arg(32)->Arg(128);

void bm_rhs_compact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const apnet::SampledScenario sc = make_fixture(n);
  const apnet::NetworkState s = make_state(n);
  const apnet::ProtocolParams params;
  const Eigen::MatrixXd L = apnet::laplacian_matrix(sc.graph);
  const apnet::DerivedLayout derived = apnet::build_derived(sc.layout);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apnet::rhs_compact(L, derived, params, s));
  }
}
BENCHMARK(bm_rhs_compact)->Arg(8)->Arg(32)->Arg(128);

void bm_integrate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const apnet::SampledScenario sc = make_fixture(n);
  apnet::ProtocolParams params;
  params.dt = apnet::default_step_size(sc.graph, sc.layout, 1.0, 1.0);
  params.t_final = 1.0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apnet::integrate(sc.graph, sc.layout, params, zero, zero));
  }
}
BENCHMARK(bm_integrate)->Arg(8)->Arg(32);

void bm_laplacian_pseudoinverse(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const apnet::SampledScenario sc = make_fixture(n);
  const Eigen::MatrixXd L = apnet::laplacian_matrix(sc.graph);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apnet::laplacian_pseudoinverse(L));
  }
}
BENCHMARK(bm_laplacian_pseudoinverse)->Arg(16)->Arg(64);

void bm_closed_loop_spectrum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const apnet::SampledScenario sc = make_fixture(n);
  const apnet::AnalysisContext ctx = apnet::make_analysis_context(sc.graph, sc.layout);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apnet::closed_loop_spectrum(ctx.L, ctx.F));
  }
}
BENCHMARK(bm_closed_loop_spectrum)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
