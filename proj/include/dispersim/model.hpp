#ifndef DISPERSIM_MODEL_HPP
#define DISPERSIM_MODEL_HPP

#include <vector>

#include "dispersim/graph.hpp"
#include "dispersim/kernels.hpp"
#include "dispersim/rates.hpp"

namespace dispersim {

// A complete stochastic graphical model: topology, arrow grouping,
// per-group step laws, and per-arrow rate functions. Immutable once
// validated; engines share it across threads.
struct Model {
  DirectedGraph graph;
  std::vector<ArrowGroup> groups;
  std::vector<KernelSpec> kernels;  // parallel to groups
  RateSpec rates;
  ParamLayout params;
  std::vector<double> param_defaults;

  // True at v when some outgoing arrow of v uses a bounded law, in
  // which case sampled outflow can never exceed the count.
  std::vector<bool> bounded_tail;
  // True at v when v feeds a SourcePoisson arrow: its count is ignored
  // by convention and inflow is governed purely by the rate.
  std::vector<bool> ignored_count;

  // Checks law/group compatibility, the one-bounded-group-per-tail
  // rule, and source-arrow conventions; fills bounded_tail.
  void validate();
};

}  // namespace dispersim

#endif
