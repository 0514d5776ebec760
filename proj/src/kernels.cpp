#include "dispersim/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace dispersim {

namespace {

constexpr double kBoundaryEps = 1e-12;

double lchoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log(Gamma(a) / Gamma(a+k)) for integer k >= 0; the product form keeps
// full precision when a ~ c is huge and the lgamma difference would
// cancel catastrophically.
double log_gamma_ratio(double a, std::int64_t k) {
  if (k <= 64) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < k; ++j) acc += std::log(a + double(j));
    return -acc;
  }
  return std::lgamma(a) - std::lgamma(a + double(k));
}

}  // namespace

const char* to_string(KernelLaw law) {
  switch (law) {
    case KernelLaw::EquiMultinomial: return "equi-multinomial";
    case KernelLaw::DirichletMultinomial: return "dirichlet-multinomial";
    case KernelLaw::BetaBinomialShared: return "beta-binomial-shared";
    case KernelLaw::EquiNegMultinomial: return "equi-negmultinomial";
    case KernelLaw::DirichletNegMultinomial: return "dirichlet-negmultinomial";
    case KernelLaw::BetaNegBinomialShared: return "beta-negbinomial-shared";
    case KernelLaw::SourcePoisson: return "source-poisson";
  }
  return "?";
}

KernelLaw kernel_law_from_string(const std::string& s) {
  if (s == "equi-multinomial") return KernelLaw::EquiMultinomial;
  if (s == "dirichlet-multinomial") return KernelLaw::DirichletMultinomial;
  if (s == "beta-binomial" || s == "beta-binomial-shared")
    return KernelLaw::BetaBinomialShared;
  if (s == "equi-negmultinomial") return KernelLaw::EquiNegMultinomial;
  if (s == "dirichlet-negmultinomial") return KernelLaw::DirichletNegMultinomial;
  if (s == "beta-negbinomial" || s == "beta-negbinomial-shared")
    return KernelLaw::BetaNegBinomialShared;
  if (s == "source-poisson" || s == "poisson") return KernelLaw::SourcePoisson;
  throw std::runtime_error("unknown kernel law: " + s);
}

bool law_is_bounded(KernelLaw law) {
  switch (law) {
    case KernelLaw::EquiMultinomial:
    case KernelLaw::DirichletMultinomial:
    case KernelLaw::BetaBinomialShared:
      return true;
    default:
      return false;
  }
}

bool law_is_noisy(KernelLaw law) {
  switch (law) {
    case KernelLaw::DirichletMultinomial:
    case KernelLaw::BetaBinomialShared:
    case KernelLaw::DirichletNegMultinomial:
    case KernelLaw::BetaNegBinomialShared:
      return true;
    default:
      return false;
  }
}

void KernelSpec::validate() const {
  if (law_is_noisy(law) && c_param < 0 && !(c > 0.0))
    throw std::invalid_argument("inverse noise parameter c must be > 0");
}

StepProbabilities step_probs(std::span<const double> hazards, double c) {
  if (hazards.empty()) throw std::invalid_argument("step_probs: no members");
  double total = 0.0;
  for (double h : hazards) {
    if (!(h >= 0.0)) throw std::invalid_argument("negative hazard");
    total += h;
  }
  StepProbabilities sp;
  std::size_t m = hazards.size();
  sp.pi.resize(m + 1);
  double jump = -std::expm1(-total);  // 1 - e^{-sum H}
  double sum_pi = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double pi = total > 0.0 ? jump * hazards[i] / total : 0.0;
    sp.pi[i] = pi;
    sum_pi += pi;
  }
  sp.pi[m] = std::max(1.0 - sum_pi, 0.0);
  if (c > 0.0) {
    sp.alpha.resize(m + 1);
    double sum_alpha = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sp.alpha[i] = c * sp.pi[i];
      sum_alpha += sp.alpha[i];
    }
    sp.alpha[m] = std::max(c - sum_alpha, 0.0);
  }
  return sp;
}

std::vector<std::int64_t> sample_bounded_star(std::int64_t x_tail,
                                              const StepProbabilities& sp,
                                              double c, RngStream& rng) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  if (sp.alpha.empty()) throw std::invalid_argument("step_probs built without c");
  std::vector<std::int64_t> out(sp.pi.size(), 0);
  if (x_tail < 0) throw std::invalid_argument("negative tail count");
  if (x_tail == 0) return out;
  std::vector<double> big_pi(sp.pi.size());
  dirichlet_draw(rng, sp.alpha, big_pi);
  multinomial_draw(rng, x_tail, big_pi, out);
  return out;
}

std::vector<std::int64_t> sample_equi_bounded(std::int64_t x_tail,
                                              const StepProbabilities& sp,
                                              RngStream& rng) {
  std::vector<std::int64_t> out(sp.pi.size(), 0);
  if (x_tail < 0) throw std::invalid_argument("negative tail count");
  if (x_tail == 0) return out;
  multinomial_draw(rng, x_tail, sp.pi, out);
  return out;
}

std::int64_t sample_beta_binomial(std::int64_t x_tail, double hazard, double c,
                                  RngStream& rng) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  if (x_tail < 0) throw std::invalid_argument("negative tail count");
  if (x_tail == 0) return 0;
  double pi = -std::expm1(-hazard);
  if (pi <= 0.0) return 0;
  double big_pi = beta_draw(rng, c * pi, c * (1.0 - pi));
  return binomial_draw(rng, x_tail, big_pi);
}

std::vector<std::int64_t> sample_shared_beta_bounded(
    std::span<const std::int64_t> x_tails, double hazard, double c,
    RngStream& rng) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  std::vector<std::int64_t> out(x_tails.size(), 0);
  double pi = -std::expm1(-hazard);
  if (pi <= 0.0) return out;
  double big_pi = beta_draw(rng, c * pi, c * (1.0 - pi));
  for (std::size_t i = 0; i < x_tails.size(); ++i) {
    if (x_tails[i] < 0) throw std::invalid_argument("negative tail count");
    out[i] = binomial_draw(rng, x_tails[i], big_pi);
  }
  return out;
}

namespace {

// Negative-multinomial step given mixing probabilities: total failures
// before x successes at success probability pi0, thinned across members.
std::vector<std::int64_t> neg_multinomial_step(std::int64_t x_head,
                                               std::span<const double> big_pi,
                                               RngStream& rng) {
  std::size_t m = big_pi.size() - 1;
  std::vector<std::int64_t> out(m, 0);
  if (x_head <= 0) return out;
  double pi0 = big_pi[m];
  std::int64_t total = neg_binomial_draw(rng, double(x_head), pi0);
  if (total == 0) return out;
  double fail = 1.0 - pi0;
  std::vector<double> split(m);
  for (std::size_t i = 0; i < m; ++i)
    split[i] = fail > 0.0 ? big_pi[i] / fail : 0.0;
  multinomial_draw(rng, total, split, out);
  return out;
}

}  // namespace

std::vector<std::int64_t> sample_unbounded_star(std::int64_t x_head,
                                                const StepProbabilities& sp,
                                                double c, RngStream& rng,
                                                KernelCounters* counters) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  if (sp.alpha.empty()) throw std::invalid_argument("step_probs built without c");
  std::size_t m = sp.members();
  if (x_head <= 0 || sp.pi0() >= 1.0) return std::vector<std::int64_t>(m, 0);
  std::vector<double> big_pi(sp.pi.size());
  dirichlet_draw(rng, sp.alpha, big_pi);
  if (big_pi[m] <= kBoundaryEps) {
    // probability-zero boundary: one clamped redraw, counted
    if (counters) ++counters->boundary_redraws;
    dirichlet_draw(rng, sp.alpha, big_pi);
    if (big_pi[m] <= kBoundaryEps) {
      double deficit = kBoundaryEps - big_pi[m];
      big_pi[m] = kBoundaryEps;
      double scale = 1.0 / (1.0 + deficit);
      for (auto& p : big_pi) p *= scale;
    }
  }
  return neg_multinomial_step(x_head, big_pi, rng);
}

std::vector<std::int64_t> sample_equi_unbounded(std::int64_t x_head,
                                                const StepProbabilities& sp,
                                                RngStream& rng,
                                                KernelCounters* counters) {
  std::size_t m = sp.members();
  if (x_head <= 0) return std::vector<std::int64_t>(m, 0);
  std::vector<double> pi(sp.pi.begin(), sp.pi.end());
  if (pi[m] <= kBoundaryEps) {
    if (counters) ++counters->boundary_redraws;
    pi[m] = kBoundaryEps;
  }
  return neg_multinomial_step(x_head, pi, rng);
}

std::vector<std::int64_t> sample_shared_beta_unbounded(
    std::span<const std::int64_t> x_heads, double hazard, double c,
    RngStream& rng, KernelCounters* counters) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be > 0");
  std::vector<std::int64_t> out(x_heads.size(), 0);
  double pi = -std::expm1(-hazard);
  if (pi <= 0.0) return out;
  double big_pi = beta_draw(rng, c * pi, c * (1.0 - pi));
  if (1.0 - big_pi <= kBoundaryEps) {
    if (counters) ++counters->boundary_redraws;
    big_pi = beta_draw(rng, c * pi, c * (1.0 - pi));
    if (1.0 - big_pi <= kBoundaryEps) big_pi = 1.0 - kBoundaryEps;
  }
  for (std::size_t i = 0; i < x_heads.size(); ++i) {
    if (x_heads[i] <= 0) continue;
    out[i] = neg_binomial_draw(rng, double(x_heads[i]), 1.0 - big_pi);
  }
  return out;
}

double exact_transition_rate(KernelLaw law, std::span<const std::int64_t> counts,
                             std::span<const std::int64_t> pattern, double c,
                             std::span<const double> rates) {
  if (pattern.size() != rates.size())
    throw std::invalid_argument("pattern/rates size mismatch");
  int active = 0;
  std::int64_t sum_k = 0;
  std::size_t idx = 0;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] < 0) throw std::invalid_argument("negative pattern entry");
    if (pattern[i] > 0) {
      ++active;
      sum_k += pattern[i];
      idx = i;
    }
  }
  if (active == 0) throw std::invalid_argument("pattern must be nonzero");

  switch (law) {
    case KernelLaw::SourcePoisson:
      return (active == 1 && pattern[idx] == 1) ? rates[idx] : 0.0;

    case KernelLaw::EquiMultinomial: {
      if (active > 1 || pattern[idx] > 1) return 0.0;
      return double(counts[0]) * rates[idx];
    }
    case KernelLaw::EquiNegMultinomial: {
      if (active > 1 || pattern[idx] > 1) return 0.0;
      return double(counts[0]) * rates[idx];
    }

    case KernelLaw::DirichletMultinomial: {
      if (active > 1) return 0.0;  // |S| >= 2 is o(h)
      double x = double(counts[0]);
      double k = double(pattern[idx]);
      if (k > x) throw std::invalid_argument("pattern exceeds tail count");
      double logq = std::log(c) + lchoose(x, k) + std::lgamma(k) +
                    log_gamma_ratio(x - k + c, pattern[idx]);
      return std::exp(logq) * rates[idx];
    }

    case KernelLaw::BetaBinomialShared: {
      if (counts.size() != pattern.size())
        throw std::invalid_argument("counts/pattern size mismatch");
      double sum_x = 0.0, lc = 0.0;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] > counts[i])
          throw std::invalid_argument("pattern exceeds tail count");
        sum_x += double(counts[i]);
        lc += lchoose(double(counts[i]), double(pattern[i]));
      }
      double sk = double(sum_k);
      double logq = std::log(c) + lc + std::lgamma(sk) +
                    log_gamma_ratio(sum_x - sk + c, sum_k);
      return std::exp(logq) * rates[0];
    }

    case KernelLaw::DirichletNegMultinomial: {
      if (active > 1) return 0.0;
      double x = double(counts[0]);
      double k = double(pattern[idx]);
      double logq = std::log(c) + std::lgamma(x + k) - std::lgamma(x) -
                    std::lgamma(k + 1.0) + std::lgamma(k) +
                    log_gamma_ratio(x + c, pattern[idx]);
      return std::exp(logq) * rates[idx];
    }

    case KernelLaw::BetaNegBinomialShared: {
      if (counts.size() != pattern.size())
        throw std::invalid_argument("counts/pattern size mismatch");
      double sum_x = 0.0, lc = 0.0;
      for (std::size_t i = 0; i < pattern.size(); ++i) {
        sum_x += double(counts[i]);
        lc += lchoose(double(counts[i]) + double(pattern[i]) - 1.0,
                      double(pattern[i]));
      }
      double sk = double(sum_k);
      double logq = std::log(c) + lc + std::lgamma(sk) +
                    log_gamma_ratio(sum_x + c, sum_k);
      return std::exp(logq) * rates[0];
    }
  }
  throw std::logic_error("unhandled kernel law");
}

double inf_mean_rate(KernelLaw law, std::int64_t count, double r, double c) {
  double x = double(count);
  switch (law) {
    case KernelLaw::SourcePoisson:
      return r;
    case KernelLaw::EquiMultinomial:
    case KernelLaw::DirichletMultinomial:
    case KernelLaw::BetaBinomialShared:
    case KernelLaw::EquiNegMultinomial:
      return x * r;
    case KernelLaw::DirichletNegMultinomial:
    case KernelLaw::BetaNegBinomialShared:
      return x * r * c / (c - 1.0);
  }
  throw std::logic_error("unhandled kernel law");
}

double inf_var_rate(KernelLaw law, std::int64_t count, double r, double c) {
  double x = double(count);
  switch (law) {
    case KernelLaw::SourcePoisson:
      return r;
    case KernelLaw::EquiMultinomial:
    case KernelLaw::EquiNegMultinomial:
      return x * r;
    case KernelLaw::DirichletMultinomial:
    case KernelLaw::BetaBinomialShared:
      return (1.0 + (x - 1.0) / (c + 1.0)) * x * r;
    case KernelLaw::DirichletNegMultinomial:
    case KernelLaw::BetaNegBinomialShared:
      return x * x * r * c / ((c - 1.0) * (c - 2.0)) + x * r * c / (c - 2.0);
  }
  throw std::logic_error("unhandled kernel law");
}

double inf_cov_rate(KernelLaw law, std::int64_t count_i, std::int64_t count_j,
                    double r, double c) {
  double xi = double(count_i), xj = double(count_j);
  switch (law) {
    case KernelLaw::BetaBinomialShared:
      return xi * xj * r / (c + 1.0);
    case KernelLaw::BetaNegBinomialShared:
      return xi * xj * r * c / ((c - 1.0) * (c - 2.0));
    default:
      return 0.0;
  }
}

bool unbounded_moments_valid(double c, double total_hazard) {
  return c > 2.0 * std::exp(total_hazard);
}

}  // namespace dispersim
