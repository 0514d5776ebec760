#ifndef DISPERSIM_PFILTER_HPP
#define DISPERSIM_PFILTER_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dispersim/model.hpp"
#include "dispersim/simulator.hpp"

namespace dispersim {

// A partially observed model: latent graph dynamics observed through
// counts accumulated on one arrow between observation times.
struct FilterModel {
  const Model* model = nullptr;
  ArrowId incidence_arrow = -1;
  double t0 = 0.0;
  double dt = 1e-2;
  std::vector<double> obs_times;  // strictly increasing, first > t0
  std::vector<double> observations;

  // log p(y | C, params); C is the accumulated incidence-arrow flow
  std::function<double(double y, double C, std::span<const double> params)>
      log_dmeasure;
  // builds the latent state at t0 for a parameter vector
  std::function<SystemState(std::span<const double> params)> make_init;

  void validate() const;
};

struct FilterFailure : std::runtime_error {
  int time_index;
  explicit FilterFailure(int k)
      : std::runtime_error("particle filter: total weight 0 at observation " +
                           std::to_string(k)),
        time_index(k) {}
};

struct FilterResult {
  double loglik = 0.0;
  std::vector<double> cond_logliks;   // per observation
  std::vector<double> ess;            // effective sample sizes
  // filtering means of vertex counts at each observation time
  std::vector<std::vector<double>> filter_mean;
};

// Systematic-resampling multiplicities for normalized weights; exposed
// for property tests. offsets (i + u)/J walk the cumulative weights.
std::vector<std::int64_t> systematic_resample_counts(
    std::span<const double> weights, std::int64_t J, double u);

FilterResult particle_filter(const FilterModel& fm,
                             const std::vector<double>& params, std::int64_t J,
                             std::uint64_t seed, int threads = 1,
                             bool keep_filter_mean = false);

}  // namespace dispersim

#endif
