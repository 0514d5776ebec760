#ifndef DISPERSIM_SIMULATOR_HPP
#define DISPERSIM_SIMULATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dispersim/model.hpp"

namespace dispersim {

struct SimulationPlan {
  double t0 = 0.0;
  double t1 = 1.0;
  double dt = 1e-2;
  std::vector<double> record_times;  // subset of the step grid
  std::uint64_t seed = 0;
  int replicates = 1;

  void validate() const;
  // every grid time in [t0, t1]
  std::vector<double> full_grid() const;
};

struct Trajectory {
  std::vector<double> times;
  // row-major: counts[k * n_vertices + v] at record time k
  std::vector<std::int64_t> counts;
  // cumulative arrow flows at record time k
  std::vector<std::int64_t> flows;
  int n_vertices = 0;
  int n_arrows = 0;

  std::int64_t count_at(std::size_t k, VertexId v) const {
    return counts[k * std::size_t(n_vertices) + std::size_t(v)];
  }
  std::int64_t flow_at(std::size_t k, ArrowId a) const {
    return flows[k * std::size_t(n_arrows) + std::size_t(a)];
  }
  // flow accumulated on (record k-1, record k]
  std::int64_t flow_increment(std::size_t k, ArrowId a) const {
    return k == 0 ? flow_at(0, a) : flow_at(k, a) - flow_at(k - 1, a);
  }
};

// One Euler-scheme replicate: per step, each group draws its increment
// vector from the frozen state, then all updates land simultaneously.
// Streams are keyed by (seed, replicate, step, group) so results do not
// depend on the thread count.
Trajectory simulate_one(const Model& model, const SystemState& init,
                        const SimulationPlan& plan, int replicate,
                        std::vector<double> const* param_override = nullptr,
                        KernelCounters* counters = nullptr);

std::vector<Trajectory> simulate(const Model& model, const SystemState& init,
                                 const SimulationPlan& plan, int n_threads = 1);

// Advances a state in place from state.time to t1 with Euler steps of
// size dt (the span must be a whole number of steps). Streams are keyed
// by stream_seed alone, so callers hand each particle its own key.
void advance_state(const Model& model, SystemState& state, double t1, double dt,
                   std::span<const double> params, std::uint64_t stream_seed,
                   KernelCounters* counters = nullptr);

void write_trajectory_csv(const std::string& path, const Model& model,
                          const Trajectory& traj);
void write_trajectory_binary(const std::string& path, const Model& model,
                             const Trajectory& traj);
Trajectory read_trajectory_binary(const std::string& path);

}  // namespace dispersim

#endif
