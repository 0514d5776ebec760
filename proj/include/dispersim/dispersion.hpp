#ifndef DISPERSIM_DISPERSION_HPP
#define DISPERSIM_DISPERSION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dispersim/model.hpp"
#include "dispersim/simulator.hpp"

namespace dispersim {

// Monte-Carlo estimate of an arrow's infinitesimal mean/variance rates,
// extrapolated to h = 0, with batch-mean standard errors.
struct DispersionEstimate {
  ArrowId arrow = -1;
  double mean_rate = 0.0;
  double mean_se = 0.0;
  double var_rate = 0.0;
  double var_se = 0.0;
  double index = 0.0;  // D = var rate / mean rate
  double index_se = 0.0;
};

struct CovarianceEstimate {
  ArrowId arrow_a = -1;
  ArrowId arrow_b = -1;
  double cov_rate = 0.0;
  double cov_se = 0.0;
};

struct InfinitesimalOptions {
  std::vector<double> h_grid = {1e-3, 5e-4};  // decreasing, ratio 2
  std::int64_t replicates = 200000;
  int batches = 30;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct LabResult {
  std::vector<DispersionEstimate> arrows;
  std::vector<CovarianceEstimate> pairs;
  std::uint64_t boundary_redraws = 0;
};

// Simulates M single Euler steps of each size in h_grid from the frozen
// state, divides sample moments of the increments by h, and removes the
// O(h) bias by two-point Richardson (least-squares intercept when the
// grid has more than two points).
LabResult estimate_infinitesimal(const Model& model, const SystemState& state,
                                 const std::vector<ArrowId>& arrows,
                                 const std::vector<std::pair<ArrowId, ArrowId>>& pairs,
                                 const InfinitesimalOptions& opts);

// Kendall closed forms for the time-inhomogeneous cumulative death /
// birth processes: (integrated mean, integrated variance, D).
struct IntegratedMoments {
  double mean;
  double variance;
  double index;
};
IntegratedMoments integrated_death_oracle(std::int64_t x0, double hazard_integral);
IntegratedMoments integrated_birth_oracle(std::int64_t x0, double hazard_integral);

enum class SystemicClass { Equi, Over, Under, Indeterminate };
const char* to_string(SystemicClass s);

// CI-aware application of the systemic dispersion trichotomy. `z` scales
// the standard errors into the confidence band; tol absorbs float noise.
SystemicClass classify_systemic(const std::vector<DispersionEstimate>& estimates,
                                double z = 2.576, double tol = 1e-6);

// Rate lambda(t,x) of seeing exactly one transition time in [t, t+h]
// (any pattern, any size), summed in closed form over all groups.
double single_transition_rate(const Model& model, const SystemState& state,
                              std::vector<double> const* param_override = nullptr);

}  // namespace dispersim

#endif
