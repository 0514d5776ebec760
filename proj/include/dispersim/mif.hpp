#ifndef DISPERSIM_MIF_HPP
#define DISPERSIM_MIF_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dispersim/params.hpp"
#include "dispersim/pfilter.hpp"

namespace dispersim {

struct Mif2Options {
  int iterations = 50;
  double cooling = 0.95;  // geometric variance shrink per iteration
  std::int64_t J = 2000;
  std::uint64_t seed = 0;
  int threads = 1;
  // random-walk sd per coordinate on the estimation scale; 0 fixes it
  std::vector<double> rw_sd;
};

struct Mif2Result {
  std::vector<double> params;        // natural scale, swarm mean
  std::vector<double> loglik_trace;  // perturbed-filter loglik per iteration
};

// IF2: particles carry parameter vectors perturbed on the estimation
// scale at initialization and before every observation interval, with
// the perturbation sd cooled geometrically across iterations. State and
// parameters resample together. Propagation and resampling streams match
// particle_filter's, so a run with all-zero rw_sd reproduces it exactly.
Mif2Result iterated_filtering(const FilterModel& fm, const ParamSet& start,
                              const Mif2Options& opts);

struct ReplicatedLoglik {
  double logmeanexp = 0.0;
  double mean = 0.0;
  double se = 0.0;  // of the per-replicate logliks
  std::vector<double> reps;
};

ReplicatedLoglik replicated_loglik(const FilterModel& fm,
                                   const std::vector<double>& params,
                                   std::int64_t J, int reps, std::uint64_t seed,
                                   int threads = 1);

struct ProfilePoint {
  double value = 0.0;
  double loglik = 0.0;
  double se = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> params;
};

struct ProfileResult {
  std::vector<ProfilePoint> points;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  bool ci_ok = false;
};

struct ProfileOptions {
  Mif2Options mif;
  std::int64_t pf_particles = 2000;
  int pf_replicates = 3;
};

// Fixes one coordinate at each grid value, maximizes over the others by
// IF2, evaluates by replicated filters, and cuts the smoothed profile
// 1.92 below its maximum.
ProfileResult profile_likelihood(const FilterModel& fm, const ParamSet& start,
                                 int coord, const std::vector<double>& grid,
                                 const ProfileOptions& opts);

// Quadratic-smoothed drop-rule interval; falls back to piecewise-linear
// crossings when the fit is not concave. Exposed for the analytic oracle.
std::pair<double, double> profile_ci(const std::vector<double>& xs,
                                     const std::vector<double>& ys,
                                     double drop = 1.92);

}  // namespace dispersim

#endif
