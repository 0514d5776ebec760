#include "dispersim/mif.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dispersim/parallel.hpp"

namespace dispersim {

Mif2Result iterated_filtering(const FilterModel& fm, const ParamSet& start,
                              const Mif2Options& opts) {
  fm.validate();
  start.validate();
  const std::size_t P = start.values.size();
  if (opts.rw_sd.size() != P)
    throw std::invalid_argument("rw_sd size must match parameter count");
  for (double sd : opts.rw_sd)
    if (sd < 0.0) throw std::invalid_argument("rw_sd must be nonnegative");
  if (!(opts.cooling > 0.0) || opts.cooling > 1.0)
    throw std::invalid_argument("cooling must be in (0,1]");
  if (opts.iterations < 1) throw std::invalid_argument("need >= 1 iteration");
  std::int64_t J = opts.J;
  if (J < 2) throw std::invalid_argument("need J >= 2");
  const Model& model = *fm.model;
  const std::size_t K = fm.obs_times.size();

  std::vector<double> theta0 = start.to_estimation_scale(start.values);
  std::vector<std::vector<double>> theta(std::size_t(J), theta0);

  Mif2Result res;
  std::vector<SystemState> particles(static_cast<std::size_t>(J));
  std::vector<double> logw(static_cast<std::size_t>(J)), weights(static_cast<std::size_t>(J));
  std::vector<std::int64_t> flow_before(static_cast<std::size_t>(J));

  for (int m = 0; m < opts.iterations; ++m) {
    double sigma_scale = std::pow(opts.cooling, m);

    auto perturb = [&](std::size_t stage, std::int64_t j) {
      RngStream rng = make_stream(
          opts.seed, std::uint64_t(StreamPurpose::Perturb),
          std::uint64_t(m) * (K + 1) + stage, std::uint64_t(j));
      auto& th = theta[std::size_t(j)];
      for (std::size_t i = 0; i < P; ++i)
        if (opts.rw_sd[i] > 0.0)
          th[i] += sigma_scale * opts.rw_sd[i] * normal01(rng);
    };

    // initialization: perturb and rebuild particle states
    parallel_for(J, opts.threads, [&](std::int64_t j) {
      perturb(0, j);
      std::vector<double> natural =
          start.from_estimation_scale(theta[std::size_t(j)]);
      SystemState s = fm.make_init(natural);
      s.time = fm.t0;
      particles[std::size_t(j)] = std::move(s);
    });

    double loglik = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double t_next = fm.obs_times[k];
      parallel_for(J, opts.threads, [&](std::int64_t j) {
        perturb(k + 1, j);
        std::vector<double> natural =
            start.from_estimation_scale(theta[std::size_t(j)]);
        SystemState& p = particles[std::size_t(j)];
        flow_before[std::size_t(j)] = p.flows[std::size_t(fm.incidence_arrow)];
        std::uint64_t key =
            make_stream(opts.seed, std::uint64_t(StreamPurpose::Filter),
                        std::uint64_t(k), std::uint64_t(j))();
        advance_state(model, p, t_next, fm.dt, natural, key);
        double c = double(p.flows[std::size_t(fm.incidence_arrow)] -
                          flow_before[std::size_t(j)]);
        logw[std::size_t(j)] = fm.log_dmeasure(fm.observations[k], c, natural);
      });

      double max_logw = -std::numeric_limits<double>::infinity();
      for (double lw : logw) max_logw = std::max(max_logw, lw);
      if (!std::isfinite(max_logw)) throw FilterFailure(int(k));
      double sum_w = 0.0;
      for (std::size_t j = 0; j < std::size_t(J); ++j) {
        weights[j] = std::exp(logw[j] - max_logw);
        sum_w += weights[j];
      }
      if (!(sum_w > 0.0)) throw FilterFailure(int(k));
      loglik += max_logw + std::log(sum_w / double(J));

      RngStream rstream =
          make_stream(opts.seed, std::uint64_t(StreamPurpose::Resample), k);
      double u = uniform01(rstream);
      auto counts = systematic_resample_counts(weights, J, u);
      std::vector<SystemState> next_states;
      std::vector<std::vector<double>> next_theta;
      next_states.reserve(static_cast<std::size_t>(J));
      next_theta.reserve(static_cast<std::size_t>(J));
      for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::int64_t c = 0; c < counts[i]; ++c) {
          next_states.push_back(particles[i]);
          next_theta.push_back(theta[i]);
        }
      }
      particles.swap(next_states);
      theta.swap(next_theta);
    }
    res.loglik_trace.push_back(loglik);
  }

  std::vector<double> mean_est(P, 0.0);
  for (const auto& th : theta)
    for (std::size_t i = 0; i < P; ++i) mean_est[i] += th[i];
  for (auto& v : mean_est) v /= double(J);
  res.params = start.from_estimation_scale(mean_est);
  return res;
}

ReplicatedLoglik replicated_loglik(const FilterModel& fm,
                                   const std::vector<double>& params,
                                   std::int64_t J, int reps, std::uint64_t seed,
                                   int threads) {
  if (reps < 1) throw std::invalid_argument("need >= 1 replicate");
  ReplicatedLoglik out;
  out.reps.resize(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    std::uint64_t sub =
        make_stream(seed, std::uint64_t(StreamPurpose::Filter), 7777, r)();
    out.reps[std::size_t(r)] =
        particle_filter(fm, params, J, sub, threads).loglik;
  }
  double mx = *std::max_element(out.reps.begin(), out.reps.end());
  double acc = 0.0, mean = 0.0;
  for (double l : out.reps) {
    acc += std::exp(l - mx);
    mean += l;
  }
  out.logmeanexp = mx + std::log(acc / double(reps));
  mean /= double(reps);
  out.mean = mean;
  double ss = 0.0;
  for (double l : out.reps) ss += (l - mean) * (l - mean);
  out.se = reps > 1 ? std::sqrt(ss / double(reps - 1) / double(reps)) : 0.0;
  return out;
}

std::pair<double, double> profile_ci(const std::vector<double>& xs,
                                     const std::vector<double>& ys,
                                     double drop) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw std::invalid_argument("profile needs >= 3 points");
  // quadratic least squares y = a + b x + c x^2
  double n = double(xs.size());
  double sx = 0, sx2 = 0, sx3 = 0, sx4 = 0, sy = 0, sxy = 0, sx2y = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double x = xs[i], y = ys[i];
    double x2 = x * x;
    sx += x;
    sx2 += x2;
    sx3 += x2 * x;
    sx4 += x2 * x2;
    sy += y;
    sxy += x * y;
    sx2y += x2 * y;
  }
  // solve the 3x3 normal equations by Cramer
  double A[3][3] = {{n, sx, sx2}, {sx, sx2, sx3}, {sx2, sx3, sx4}};
  double rhs[3] = {sy, sxy, sx2y};
  auto det3 = [](double M[3][3]) {
    return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
           M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
           M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
  };
  double d = det3(A);
  double coef[3];
  for (int c = 0; c < 3; ++c) {
    double M[3][3];
    for (int r = 0; r < 3; ++r)
      for (int cc = 0; cc < 3; ++cc) M[r][cc] = (cc == c) ? rhs[r] : A[r][cc];
    coef[c] = det3(M) / d;
  }
  double cq = coef[2];
  if (cq < 0.0) {
    double x_star = -coef[1] / (2.0 * cq);
    double half = std::sqrt(drop / (-cq));
    return {x_star - half, x_star + half};
  }
  // not concave: linear interpolation around the raw maximum
  std::size_t imax = 0;
  for (std::size_t i = 1; i < ys.size(); ++i)
    if (ys[i] > ys[imax]) imax = i;
  double cutoff = ys[imax] - drop;
  double lo = xs.front(), hi = xs.back();
  for (std::size_t i = imax; i-- > 0;) {
    if (ys[i] < cutoff) {
      double w = (cutoff - ys[i]) / (ys[i + 1] - ys[i]);
      lo = xs[i] + w * (xs[i + 1] - xs[i]);
      break;
    }
  }
  for (std::size_t i = imax + 1; i < ys.size(); ++i) {
    if (ys[i] < cutoff) {
      double w = (ys[i - 1] - cutoff) / (ys[i - 1] - ys[i]);
      hi = xs[i - 1] + w * (xs[i] - xs[i - 1]);
      break;
    }
  }
  return {lo, hi};
}

ProfileResult profile_likelihood(const FilterModel& fm, const ParamSet& start,
                                 int coord, const std::vector<double>& grid,
                                 const ProfileOptions& opts) {
  if (grid.size() < 3) throw std::invalid_argument("profile grid needs >= 3 points");
  if (coord < 0 || std::size_t(coord) >= start.values.size())
    throw std::invalid_argument("bad profile coordinate");

  ProfileResult res;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    ProfilePoint pt;
    pt.value = grid[gi];
    try {
      ParamSet fixed = start;
      fixed.values[std::size_t(coord)] = grid[gi];
      Mif2Options mo = opts.mif;
      mo.rw_sd[std::size_t(coord)] = 0.0;
      mo.seed = make_stream(opts.mif.seed, std::uint64_t(StreamPurpose::Perturb),
                            991, gi)();
      Mif2Result mr = iterated_filtering(fm, fixed, mo);
      auto rl = replicated_loglik(fm, mr.params, opts.pf_particles,
                                  opts.pf_replicates, mo.seed, opts.mif.threads);
      pt.loglik = rl.logmeanexp;
      pt.se = rl.se;
      pt.params = mr.params;
      pt.ok = true;
    } catch (const std::exception& e) {
      pt.ok = false;
      pt.error = e.what();
    }
    res.points.push_back(std::move(pt));
  }

  std::vector<double> xs, ys;
  for (const auto& pt : res.points)
    if (pt.ok) {
      xs.push_back(pt.value);
      ys.push_back(pt.loglik);
    }
  if (xs.size() >= 3) {
    auto [lo, hi] = profile_ci(xs, ys);
    res.ci_lo = lo;
    res.ci_hi = hi;
    res.ci_ok = true;
  }
  return res;
}

}  // namespace dispersim
