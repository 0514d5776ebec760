#include "dispersim/pfilter.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "dispersim/parallel.hpp"

namespace dispersim {

void FilterModel::validate() const {
  if (!model) throw std::invalid_argument("filter model: no model");
  if (incidence_arrow < 0 || incidence_arrow >= model->graph.n_arrows())
    throw std::invalid_argument("filter model: bad incidence arrow");
  if (obs_times.size() != observations.size() || obs_times.empty())
    throw std::invalid_argument("filter model: observation size mismatch");
  double prev = t0;
  for (double t : obs_times) {
    if (!(t > prev)) throw std::invalid_argument("observation times must increase");
    prev = t;
  }
  if (!log_dmeasure || !make_init)
    throw std::invalid_argument("filter model: missing callbacks");
}

std::vector<std::int64_t> systematic_resample_counts(
    std::span<const double> weights, std::int64_t J, double u) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw std::invalid_argument("resample: zero total weight");
  std::vector<std::int64_t> counts(weights.size(), 0);
  double step = total / double(J);
  double pointer = u * step;
  double cum = 0.0;
  std::size_t i = 0;
  for (std::int64_t j = 0; j < J; ++j) {
    double target = pointer + double(j) * step;
    while (cum + weights[i] < target && i + 1 < weights.size()) {
      cum += weights[i];
      ++i;
    }
    ++counts[i];
  }
  return counts;
}

FilterResult particle_filter(const FilterModel& fm,
                             const std::vector<double>& params, std::int64_t J,
                             std::uint64_t seed, int threads,
                             bool keep_filter_mean) {
  fm.validate();
  if (J < 2) throw std::invalid_argument("particle filter needs J >= 2");
  const Model& model = *fm.model;

  std::vector<SystemState> particles(static_cast<std::size_t>(J));
  {
    SystemState init = fm.make_init(params);
    init.time = fm.t0;
    for (auto& p : particles) p = init;
  }

  FilterResult res;
  res.cond_logliks.reserve(fm.obs_times.size());
  std::vector<double> logw(static_cast<std::size_t>(J));
  std::vector<double> weights(static_cast<std::size_t>(J));
  std::vector<std::int64_t> flow_before(static_cast<std::size_t>(J));

  for (std::size_t k = 0; k < fm.obs_times.size(); ++k) {
    double t_next = fm.obs_times[k];
    parallel_for(J, threads, [&](std::int64_t j) {
      SystemState& p = particles[std::size_t(j)];
      flow_before[std::size_t(j)] = p.flows[std::size_t(fm.incidence_arrow)];
      std::uint64_t key = make_stream(seed, std::uint64_t(StreamPurpose::Filter),
                                      std::uint64_t(k), std::uint64_t(j))();
      advance_state(model, p, t_next, fm.dt, params, key);
      double c = double(p.flows[std::size_t(fm.incidence_arrow)] -
                        flow_before[std::size_t(j)]);
      logw[std::size_t(j)] = fm.log_dmeasure(fm.observations[k], c, params);
    });

    double max_logw = -std::numeric_limits<double>::infinity();
    for (double lw : logw) max_logw = std::max(max_logw, lw);
    if (!std::isfinite(max_logw)) throw FilterFailure(int(k));
    double sum_w = 0.0, sum_w2 = 0.0;
    for (std::size_t j = 0; j < std::size_t(J); ++j) {
      weights[j] = std::exp(logw[j] - max_logw);
      sum_w += weights[j];
      sum_w2 += weights[j] * weights[j];
    }
    if (!(sum_w > 0.0)) throw FilterFailure(int(k));

    res.cond_logliks.push_back(max_logw + std::log(sum_w / double(J)));
    res.ess.push_back(sum_w * sum_w / sum_w2);

    if (keep_filter_mean) {
      std::vector<double> mean(std::size_t(model.graph.n_vertices()), 0.0);
      for (std::size_t j = 0; j < std::size_t(J); ++j)
        for (std::size_t v = 0; v < mean.size(); ++v)
          mean[v] += weights[j] * double(particles[j].counts[v]);
      for (auto& m : mean) m /= sum_w;
      res.filter_mean.push_back(std::move(mean));
    }

    RngStream rstream =
        make_stream(seed, std::uint64_t(StreamPurpose::Resample), k);
    double u = uniform01(rstream);
    auto counts = systematic_resample_counts(weights, J, u);
    std::vector<SystemState> next;
    next.reserve(static_cast<std::size_t>(J));
    for (std::size_t i = 0; i < counts.size(); ++i)
      for (std::int64_t c = 0; c < counts[i]; ++c) next.push_back(particles[i]);
    particles.swap(next);
  }

  res.loglik = 0.0;
  for (double l : res.cond_logliks) res.loglik += l;
  return res;
}

}  // namespace dispersim
