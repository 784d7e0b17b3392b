#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>

#include "apnet/graph.hpp"
#include "apnet/input_layout.hpp"

namespace apnet {

// Deterministic random source. std::mt19937_64 supplies the raw stream, but
// the value mappings are hand-rolled because the standard distributions are
// implementation-defined and the sampled suites promise identical runs on any
// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi);
  double uniform_real(double lo, double hi);

 private:
  std::mt19937_64 engine_;
};

// Erdos-Renyi style graph, rejection-sampled until connected.
Graph random_connected_graph(Rng& rng, int n, double edge_probability);

// m in [1, n] inputs with values in [-value_range, value_range] and uniformly
// sized duplicate-free target sets.
InputLayout random_layout(Rng& rng, int n, double value_range);

struct SampledScenario {
  Graph graph;
  InputLayout layout;
};

SampledScenario sample_scenario(Rng& rng, int n_min, int n_max, double value_range);

enum class VerifySuite { quick, full };

// Runs every property class on freshly sampled scenarios and prints one
// PASS/FAIL line per class. quick: n <= 8, 50 scenarios; full: n <= 20, 500
// scenarios (trajectory-bound classes use a smaller documented subset to stay
// inside the time budget). Returns the number of failing classes.
int run_verify(VerifySuite suite, std::ostream& out);

}  // namespace apnet
