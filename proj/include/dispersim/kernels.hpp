#ifndef DISPERSIM_KERNELS_HPP
#define DISPERSIM_KERNELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dispersim/rng.hpp"

namespace dispersim {

// Step laws for one arrow group. The Dirichlet/beta laws inject
// infinitesimal over-dispersion with inverse noise parameter c; the
// equi laws are the c -> infinity baselines. SourcePoisson drives
// inflow from a source vertex whose count is ignored by convention.
enum class KernelLaw {
  EquiMultinomial,
  DirichletMultinomial,
  BetaBinomialShared,
  EquiNegMultinomial,
  DirichletNegMultinomial,
  BetaNegBinomialShared,
  SourcePoisson,
};

const char* to_string(KernelLaw law);
KernelLaw kernel_law_from_string(const std::string& s);

bool law_is_bounded(KernelLaw law);   // binomial family (count ceiling)
bool law_is_noisy(KernelLaw law);     // carries an inverse noise parameter

struct KernelSpec {
  KernelLaw law = KernelLaw::EquiMultinomial;
  double c = 0.0;    // required > 0 for noisy laws
  int c_param = -1;  // when >= 0, c is read from the parameter block

  double effective_c(std::span<const double> params) const {
    return c_param >= 0 ? params[std::size_t(c_param)] : c;
  }
  void validate() const;
};

// Hazard-splitting probabilities for one group and one Euler step.
// Layout: pi[0..m-1] follow the group members, pi[m] is the retention /
// survival slot. alpha = c * pi when an inverse noise parameter applies.
struct StepProbabilities {
  std::vector<double> pi;
  std::vector<double> alpha;

  std::size_t members() const { return pi.size() - 1; }
  double pi0() const { return pi.back(); }
};

// pi_i = (1 - e^{-sum_j H_j}) H_i / sum_j H_j for integrated hazards H,
// computed with expm1; pi0 is the complement. Pass c > 0 to fill alpha.
StepProbabilities step_probs(std::span<const double> hazards, double c = 0.0);

// Counters for probability-zero boundary events handled by clamping.
struct KernelCounters {
  std::uint64_t boundary_redraws = 0;
};

// --- one-step samplers -----------------------------------------------
// All samplers return per-member increments ordered like the group; the
// bounded ones also return the retained count in the last slot.

// Outgoing star: Pi ~ Dir(c pi), increments ~ Multinomial(x_tail, Pi).
std::vector<std::int64_t> sample_bounded_star(std::int64_t x_tail,
                                              const StepProbabilities& sp,
                                              double c, RngStream& rng);

// Baseline: Multinomial(x_tail, pi) at the deterministic probabilities.
std::vector<std::int64_t> sample_equi_bounded(std::int64_t x_tail,
                                              const StepProbabilities& sp,
                                              RngStream& rng);

// Single bounded arrow: Pi ~ Beta(c pi, c(1-pi)), increment ~
// Binomial(x_tail, Pi).
std::int64_t sample_beta_binomial(std::int64_t x_tail, double hazard, double c,
                                  RngStream& rng);

// Color-matched bounded family: one shared Pi ~ Beta(c pi, c(1-pi));
// members conditionally
// independent Binomial(x_tail_i, Pi).
std::vector<std::int64_t> sample_shared_beta_bounded(
    std::span<const std::int64_t> x_tails, double hazard, double c,
    RngStream& rng);

// Incoming star: Pi ~ Dir(c pi incl. survival slot); increments follow the
// negative-multinomial law given Pi, sampled as total failures before
// x_head successes at success probability Pi0, thinned across members.
std::vector<std::int64_t> sample_unbounded_star(std::int64_t x_head,
                                                const StepProbabilities& sp,
                                                double c, RngStream& rng,
                                                KernelCounters* counters = nullptr);

// Baseline: negative multinomial at the deterministic probabilities.
std::vector<std::int64_t> sample_equi_unbounded(std::int64_t x_head,
                                                const StepProbabilities& sp,
                                                RngStream& rng,
                                                KernelCounters* counters = nullptr);

// Color-matched unbounded family: shared Pi ~ Beta(c pi, c(1-pi));
// members conditionally
// independent NegativeBinomial(x_head_i, Pi).
std::vector<std::int64_t> sample_shared_beta_unbounded(
    std::span<const std::int64_t> x_heads, double hazard, double c,
    RngStream& rng, KernelCounters* counters = nullptr);

// --- closed-form oracles ----------------------------------------------

// Leading-order transition rate q(t,x,k) for an increment pattern over
// the group members; log-gamma arithmetic throughout. `counts` are tail counts
// for bounded laws and head counts for unbounded ones; `rates` are the
// per-member rate values r(t,x) (shared laws use one common value).
// Star laws return 0 for patterns touching two or more members: those
// events are o(h).
double exact_transition_rate(KernelLaw law, std::span<const std::int64_t> counts,
                             std::span<const std::int64_t> pattern, double c,
                             std::span<const double> rates);

// Closed-form infinitesimal moments of the step laws.
double inf_mean_rate(KernelLaw law, std::int64_t count, double r, double c);
double inf_var_rate(KernelLaw law, std::int64_t count, double r, double c);
// Shared-beta cross-member covariance rate; star laws return 0.
double inf_cov_rate(KernelLaw law, std::int64_t count_i, std::int64_t count_j,
                    double r, double c);

// Moment-existence condition for the unbounded noisy laws:
// c > 2 e^{total step hazard}.
bool unbounded_moments_valid(double c, double total_hazard);

}  // namespace dispersim

#endif
