#include "dispersim/dispersion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "dispersim/parallel.hpp"

namespace dispersim {

namespace {

// Precomputed sampling setup for one group at one step size.
struct GroupStep {
  const ArrowGroup* group;
  KernelSpec spec;
  StepProbabilities sp;
  double shared_hazard = 0.0;
  std::vector<std::int64_t> counts;  // tail or head counts as the law needs
};

GroupStep prepare_group(const Model& model, const SystemState& state,
                        std::span<const double> params, std::size_t gi,
                        double h) {
  GroupStep gs;
  gs.group = &model.groups[gi];
  gs.spec = model.kernels[gi];
  gs.spec.c = gs.spec.effective_c(params);
  gs.spec.c_param = -1;
  std::size_t m = gs.group->members.size();
  std::vector<double> hazards(m);
  for (std::size_t i = 0; i < m; ++i)
    hazards[i] = model.rates.integrate(gs.group->members[i], state.time, h,
                                       state.counts, params);
  switch (gs.spec.law) {
    case KernelLaw::SourcePoisson:
      gs.shared_hazard = hazards[0];
      break;
    case KernelLaw::EquiMultinomial:
      if (gs.group->kind == GroupKind::ColorMatchedBounded) {
        // equi baseline on a color group: independent thinning per tail
        gs.shared_hazard = hazards[0];
        for (std::size_t i = 0; i < m; ++i)
          gs.counts.push_back(state.counts[std::size_t(
              model.graph.arrow(gs.group->members[i]).tail)]);
        break;
      }
      [[fallthrough]];
    case KernelLaw::DirichletMultinomial:
      gs.sp = step_probs(hazards, law_is_noisy(gs.spec.law) ? gs.spec.c : 0.0);
      gs.counts = {state.counts[std::size_t(
          model.graph.arrow(gs.group->members[0]).tail)]};
      break;
    case KernelLaw::BetaBinomialShared: {
      gs.shared_hazard = hazards[0];
      for (std::size_t i = 0; i < m; ++i)
        gs.counts.push_back(state.counts[std::size_t(
            model.graph.arrow(gs.group->members[i]).tail)]);
      break;
    }
    case KernelLaw::EquiNegMultinomial:
      if (gs.group->kind == GroupKind::ColorMatchedUnbounded) {
        gs.shared_hazard = hazards[0];
        for (std::size_t i = 0; i < m; ++i)
          gs.counts.push_back(state.counts[std::size_t(
              model.graph.arrow(gs.group->members[i]).head)]);
        break;
      }
      [[fallthrough]];
    case KernelLaw::DirichletNegMultinomial:
      gs.sp = step_probs(hazards, law_is_noisy(gs.spec.law) ? gs.spec.c : 0.0);
      gs.counts = {state.counts[std::size_t(
          model.graph.arrow(gs.group->members[0]).head)]};
      break;
    case KernelLaw::BetaNegBinomialShared: {
      gs.shared_hazard = hazards[0];
      for (std::size_t i = 0; i < m; ++i)
        gs.counts.push_back(state.counts[std::size_t(
            model.graph.arrow(gs.group->members[i]).head)]);
      break;
    }
  }
  return gs;
}

void sample_group(const GroupStep& gs, RngStream& rng,
                  std::vector<std::int64_t>& deltas, KernelCounters* counters) {
  const auto& members = gs.group->members;
  switch (gs.spec.law) {
    case KernelLaw::SourcePoisson:
      deltas[std::size_t(members[0])] = poisson_draw(rng, gs.shared_hazard);
      break;
    case KernelLaw::EquiMultinomial: {
      if (gs.group->kind == GroupKind::ColorMatchedBounded) {
        double pi = -std::expm1(-gs.shared_hazard);
        for (std::size_t i = 0; i < members.size(); ++i)
          deltas[std::size_t(members[i])] =
              (gs.counts[i] > 0 && pi > 0.0)
                  ? binomial_draw(rng, gs.counts[i], pi)
                  : 0;
        break;
      }
      auto inc = sample_equi_bounded(gs.counts[0], gs.sp, rng);
      for (std::size_t i = 0; i < members.size(); ++i)
        deltas[std::size_t(members[i])] = inc[i];
      break;
    }
    case KernelLaw::DirichletMultinomial: {
      auto inc = sample_bounded_star(gs.counts[0], gs.sp, gs.spec.c, rng);
      for (std::size_t i = 0; i < members.size(); ++i)
        deltas[std::size_t(members[i])] = inc[i];
      break;
    }
    case KernelLaw::BetaBinomialShared: {
      auto inc =
          sample_shared_beta_bounded(gs.counts, gs.shared_hazard, gs.spec.c, rng);
      for (std::size_t i = 0; i < members.size(); ++i)
        deltas[std::size_t(members[i])] = inc[i];
      break;
    }
    case KernelLaw::EquiNegMultinomial: {
      if (gs.group->kind == GroupKind::ColorMatchedUnbounded) {
        double pi = -std::expm1(-gs.shared_hazard);
        for (std::size_t i = 0; i < members.size(); ++i)
          deltas[std::size_t(members[i])] =
              (gs.counts[i] > 0 && pi > 0.0 && pi < 1.0)
                  ? neg_binomial_draw(rng, double(gs.counts[i]), 1.0 - pi)
                  : 0;
        break;
      }
      auto inc = sample_equi_unbounded(gs.counts[0], gs.sp, rng, counters);
      for (std::size_t i = 0; i < members.size(); ++i)
        deltas[std::size_t(members[i])] = inc[i];
      break;
    }
    case KernelLaw::DirichletNegMultinomial: {
      auto inc =
          sample_unbounded_star(gs.counts[0], gs.sp, gs.spec.c, rng, counters);
      for (std::size_t i = 0; i < members.size(); ++i)
        deltas[std::size_t(members[i])] = inc[i];
      break;
    }
    case KernelLaw::BetaNegBinomialShared: {
      auto inc = sample_shared_beta_unbounded(gs.counts, gs.shared_hazard,
                                              gs.spec.c, rng, counters);
      for (std::size_t i = 0; i < members.size(); ++i)
        deltas[std::size_t(members[i])] = inc[i];
      break;
    }
  }
}

// Intercept of a least-squares line through (h_i, y_i); equals two-point
// Richardson when the grid has two points.
double extrapolate_to_zero(std::span<const double> h, std::span<const double> y) {
  std::size_t n = h.size();
  if (n == 1) return y[0];
  if (n == 2) {
    // y(h) = y0 + a h  =>  y0 from the pair
    return (h[0] * y[1] - h[1] * y[0]) / (h[0] - h[1]);
  }
  double sh = 0, sy = 0, shh = 0, shy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sh += h[i];
    sy += y[i];
    shh += h[i] * h[i];
    shy += h[i] * y[i];
  }
  double dn = double(n) * shh - sh * sh;
  double slope = (double(n) * shy - sh * sy) / dn;
  return (sy - slope * sh) / double(n);
}

}  // namespace

LabResult estimate_infinitesimal(const Model& model, const SystemState& state,
                                 const std::vector<ArrowId>& arrows,
                                 const std::vector<std::pair<ArrowId, ArrowId>>& pairs,
                                 const InfinitesimalOptions& opts) {
  if (opts.h_grid.size() < 2)
    throw std::invalid_argument("h grid needs at least two step sizes");
  for (std::size_t i = 1; i < opts.h_grid.size(); ++i)
    if (!(opts.h_grid[i] < opts.h_grid[i - 1]) || !(opts.h_grid[i] > 0.0))
      throw std::invalid_argument("h grid must be positive and decreasing");
  if (opts.replicates < 1000)
    throw std::invalid_argument("need at least 1e3 replicates");
  bool degenerate = true;
  for (auto c : state.counts)
    if (c != 0) degenerate = false;
  if (degenerate) throw std::invalid_argument("degenerate state: all counts zero");

  const int B = opts.batches;
  const std::size_t H = opts.h_grid.size();
  const std::size_t A = arrows.size();
  const std::size_t P = pairs.size();

  // per (h, batch): sums of increments, squares, and cross products
  struct BatchAcc {
    std::vector<double> s1, s2;   // per arrow
    std::vector<double> s_ab;     // per pair
    std::vector<double> s_a, s_b; // per pair marginals
    std::int64_t n = 0;
  };
  std::vector<std::vector<BatchAcc>> acc(H, std::vector<BatchAcc>(std::size_t(B)));
  for (auto& per_h : acc)
    for (auto& b : per_h) {
      b.s1.assign(A, 0.0);
      b.s2.assign(A, 0.0);
      b.s_ab.assign(P, 0.0);
      b.s_a.assign(P, 0.0);
      b.s_b.assign(P, 0.0);
    }

  std::span<const double> params(model.param_defaults);
  std::atomic<std::uint64_t> redraws{0};

  for (std::size_t hi = 0; hi < H; ++hi) {
    double h = opts.h_grid[hi];
    std::vector<GroupStep> setup;
    setup.reserve(model.groups.size());
    for (std::size_t gi = 0; gi < model.groups.size(); ++gi)
      setup.push_back(prepare_group(model, state, params, gi, h));

    parallel_for(B, opts.threads, [&](std::int64_t b) {
      KernelCounters counters;
      BatchAcc& out = acc[hi][std::size_t(b)];
      std::int64_t lo = b * opts.replicates / B;
      std::int64_t hi_rep = (b + 1) * opts.replicates / B;
      std::vector<std::int64_t> deltas(std::size_t(model.graph.n_arrows()), 0);
      for (std::int64_t rep = lo; rep < hi_rep; ++rep) {
        for (std::size_t gi = 0; gi < setup.size(); ++gi) {
          RngStream rng = make_stream(
              opts.seed, std::uint64_t(StreamPurpose::Dispersion) + 16 * (hi + 1),
              std::uint64_t(rep), gi);
          sample_group(setup[gi], rng, deltas, &counters);
        }
        for (std::size_t ai = 0; ai < A; ++ai) {
          double d = double(deltas[std::size_t(arrows[ai])]);
          out.s1[ai] += d;
          out.s2[ai] += d * d;
        }
        for (std::size_t pi = 0; pi < P; ++pi) {
          double da = double(deltas[std::size_t(pairs[pi].first)]);
          double db = double(deltas[std::size_t(pairs[pi].second)]);
          out.s_ab[pi] += da * db;
          out.s_a[pi] += da;
          out.s_b[pi] += db;
        }
      }
      out.n = hi_rep - lo;
      redraws += counters.boundary_redraws;
    });
  }

  // per-batch rates at each h, then extrapolate each batch to h = 0
  LabResult res;
  res.boundary_redraws = redraws.load();
  auto summarize = [&](const std::vector<double>& batch_vals, double& est,
                       double& se) {
    double mean = 0.0;
    for (double v : batch_vals) mean += v;
    mean /= double(batch_vals.size());
    double ss = 0.0;
    for (double v : batch_vals) ss += (v - mean) * (v - mean);
    est = mean;
    se = std::sqrt(ss / double(batch_vals.size() - 1) /
                   double(batch_vals.size()));
  };

  for (std::size_t ai = 0; ai < A; ++ai) {
    std::vector<double> mean_b(static_cast<std::size_t>(B));
    std::vector<double> var_b(static_cast<std::size_t>(B));
    std::vector<double> idx_b(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      std::vector<double> mg(H), vg(H);
      for (std::size_t hi = 0; hi < H; ++hi) {
        const BatchAcc& a = acc[hi][std::size_t(b)];
        double n = double(a.n);
        double m1 = a.s1[ai] / n;
        double m2 = (a.s2[ai] - n * m1 * m1) / (n - 1.0);
        mg[hi] = m1 / opts.h_grid[hi];
        vg[hi] = m2 / opts.h_grid[hi];
      }
      mean_b[std::size_t(b)] = extrapolate_to_zero(opts.h_grid, mg);
      var_b[std::size_t(b)] = extrapolate_to_zero(opts.h_grid, vg);
      idx_b[std::size_t(b)] = mean_b[std::size_t(b)] != 0.0
                                  ? var_b[std::size_t(b)] / mean_b[std::size_t(b)]
                                  : 0.0;
    }
    DispersionEstimate de;
    de.arrow = arrows[ai];
    summarize(mean_b, de.mean_rate, de.mean_se);
    summarize(var_b, de.var_rate, de.var_se);
    summarize(idx_b, de.index, de.index_se);
    res.arrows.push_back(de);
  }

  for (std::size_t pi = 0; pi < P; ++pi) {
    std::vector<double> cov_b(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
      std::vector<double> cg(H);
      for (std::size_t hi = 0; hi < H; ++hi) {
        const BatchAcc& a = acc[hi][std::size_t(b)];
        double n = double(a.n);
        double cov = (a.s_ab[pi] - a.s_a[pi] * a.s_b[pi] / n) / (n - 1.0);
        cg[hi] = cov / opts.h_grid[hi];
      }
      cov_b[std::size_t(b)] = extrapolate_to_zero(opts.h_grid, cg);
    }
    CovarianceEstimate ce;
    ce.arrow_a = pairs[pi].first;
    ce.arrow_b = pairs[pi].second;
    summarize(cov_b, ce.cov_rate, ce.cov_se);
    res.pairs.push_back(ce);
  }
  return res;
}

IntegratedMoments integrated_death_oracle(std::int64_t x0,
                                          double hazard_integral) {
  if (x0 < 0 || hazard_integral < 0.0)
    throw std::invalid_argument("death oracle needs x0 >= 0 and integral >= 0");
  double e = std::exp(-hazard_integral);
  double z = double(x0);
  return {z * (1.0 - e), z * e * (1.0 - e), e};
}

IntegratedMoments integrated_birth_oracle(std::int64_t x0,
                                          double hazard_integral) {
  if (x0 < 0 || hazard_integral < 0.0)
    throw std::invalid_argument("birth oracle needs x0 >= 0 and integral >= 0");
  double e = std::exp(hazard_integral);
  double z = double(x0);
  return {z * (e - 1.0), z * e * (e - 1.0), e};
}

const char* to_string(SystemicClass s) {
  switch (s) {
    case SystemicClass::Equi: return "equi";
    case SystemicClass::Over: return "over";
    case SystemicClass::Under: return "under";
    case SystemicClass::Indeterminate: return "indeterminate";
  }
  return "?";
}

SystemicClass classify_systemic(const std::vector<DispersionEstimate>& estimates,
                                double z, double tol) {
  if (estimates.empty())
    throw std::invalid_argument("classify_systemic: no estimates");
  // each arrow is significantly above 1, significantly below 1, or
  // consistent with 1; the trichotomy then follows the definition with
  // CIs standing in for the exact indices
  bool any_above = false, any_below = false;
  for (const auto& e : estimates) {
    double lo = e.index - z * e.index_se;
    double hi = e.index + z * e.index_se;
    if (lo > 1.0 + tol) any_above = true;
    if (hi < 1.0 - tol) any_below = true;
  }
  if (any_above && any_below) return SystemicClass::Indeterminate;
  if (any_above) return SystemicClass::Over;
  if (any_below) return SystemicClass::Under;
  return SystemicClass::Equi;
}

namespace {

// sum_{k >= 1} q(k) for one arrow of a star law, with tail truncation
double sum_single_arrow_rates(KernelLaw law, std::int64_t count, double c,
                              double rate, std::int64_t k_max) {
  double acc = 0.0;
  int tiny_run = 0;
  std::vector<std::int64_t> counts{count};
  std::vector<std::int64_t> pattern{0};
  std::vector<double> rates{rate};
  for (std::int64_t k = 1; k <= k_max; ++k) {
    pattern[0] = k;
    double q = exact_transition_rate(law, counts, pattern, c, rates);
    acc += q;
    if (q < 1e-15 * std::max(acc, 1e-300)) {
      if (++tiny_run >= 50) break;
    } else {
      tiny_run = 0;
    }
  }
  return acc;
}

}  // namespace

double single_transition_rate(const Model& model, const SystemState& state,
                              std::vector<double> const* param_override) {
  std::span<const double> params =
      param_override ? std::span<const double>(*param_override)
                     : std::span<const double>(model.param_defaults);
  double lambda = 0.0;
  for (std::size_t gi = 0; gi < model.groups.size(); ++gi) {
    const ArrowGroup& grp = model.groups[gi];
    const KernelSpec& ks = model.kernels[gi];
    double cval = ks.effective_c(params);
    std::size_t m = grp.members.size();
    std::vector<double> rates(m);
    for (std::size_t i = 0; i < m; ++i)
      rates[i] = model.rates.eval(grp.members[i], state.time, state.counts, params);

    switch (ks.law) {
      case KernelLaw::SourcePoisson:
        lambda += rates[0];
        break;
      case KernelLaw::EquiMultinomial: {
        std::int64_t x =
            state.counts[std::size_t(model.graph.arrow(grp.members[0]).tail)];
        for (double r : rates) lambda += double(x) * r;
        break;
      }
      case KernelLaw::EquiNegMultinomial: {
        std::int64_t x =
            state.counts[std::size_t(model.graph.arrow(grp.members[0]).head)];
        for (double r : rates) lambda += double(x) * r;
        break;
      }
      case KernelLaw::DirichletMultinomial: {
        std::int64_t x =
            state.counts[std::size_t(model.graph.arrow(grp.members[0]).tail)];
        for (double r : rates)
          lambda += sum_single_arrow_rates(ks.law, x, cval, r, x);
        break;
      }
      case KernelLaw::DirichletNegMultinomial: {
        std::int64_t x =
            state.counts[std::size_t(model.graph.arrow(grp.members[0]).head)];
        for (double r : rates)
          lambda += sum_single_arrow_rates(ks.law, x, cval, r, 1000000);
        break;
      }
      case KernelLaw::BetaBinomialShared: {
        // patterns collapse over members: sum_{|k|=K} prod C(x_i,k_i)
        // = C(sum x, K), so the group behaves as one beta-binomial arrow
        std::int64_t sum_x = 0;
        for (ArrowId a : grp.members)
          sum_x += state.counts[std::size_t(model.graph.arrow(a).tail)];
        lambda += sum_single_arrow_rates(KernelLaw::DirichletMultinomial, sum_x,
                                         cval, rates[0], sum_x);
        break;
      }
      case KernelLaw::BetaNegBinomialShared: {
        std::int64_t sum_x = 0;
        for (ArrowId a : grp.members)
          sum_x += state.counts[std::size_t(model.graph.arrow(a).head)];
        lambda += sum_single_arrow_rates(KernelLaw::DirichletNegMultinomial,
                                         sum_x, cval, rates[0], 1000000);
        break;
      }
    }
  }
  return lambda;
}

}  // namespace dispersim
