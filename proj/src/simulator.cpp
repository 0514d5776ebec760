#include "dispersim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "dispersim/parallel.hpp"

namespace dispersim {

void SimulationPlan::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t0 < t1)) throw std::invalid_argument("t0 must precede t1");
  double prev = -1e300;
  for (double rt : record_times) {
    if (rt < prev) throw std::invalid_argument("record times must be sorted");
    prev = rt;
    double steps = (rt - t0) / dt;
    double snapped = std::round(steps);
    if (std::fabs(steps - snapped) > 1e-6)
      throw std::invalid_argument("record time off the step grid");
    if (rt < t0 - 1e-9 || rt > t1 + 0.5 * dt)
      throw std::invalid_argument("record time outside [t0, t1]");
  }
}

std::vector<double> SimulationPlan::full_grid() const {
  std::vector<double> g;
  long n = long(std::llround((t1 - t0) / dt));
  g.reserve(std::size_t(n) + 1);
  for (long i = 0; i <= n; ++i) g.push_back(t0 + double(i) * dt);
  return g;
}

namespace {

double shared_hazard(std::span<const double> hazards) {
  double h0 = hazards[0];
  for (double h : hazards) {
    double scale = std::max({std::fabs(h0), std::fabs(h), 1e-30});
    if (std::fabs(h - h0) > 1e-9 * scale)
      throw std::runtime_error("color-matched group members disagree on rate");
  }
  return h0;
}

struct StepScratch {
  std::vector<std::int64_t> deltas;
  std::vector<double> hazards;
  std::vector<std::int64_t> member_counts;
};

// One synchronized Euler step: every group samples from the state frozen
// at t; all updates land together through the balance identity.
template <typename StreamFn>
void euler_step(const Model& model, SystemState& state, double t, double dt,
                std::span<const double> params, StreamFn&& group_stream,
                KernelCounters* counters, StepScratch& scratch) {
  const DirectedGraph& g = model.graph;
  scratch.deltas.assign(std::size_t(g.n_arrows()), 0);
  auto& deltas = scratch.deltas;
  auto& hazards = scratch.hazards;
  auto& member_counts = scratch.member_counts;

  for (std::size_t gi = 0; gi < model.groups.size(); ++gi) {
    const ArrowGroup& grp = model.groups[gi];
    const KernelSpec& ks = model.kernels[gi];
    double cval = ks.effective_c(params);
    std::size_t m = grp.members.size();

    hazards.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      hazards[i] =
          model.rates.integrate(grp.members[i], t, dt, state.counts, params);

    RngStream rng = group_stream(gi);

    switch (ks.law) {
      case KernelLaw::SourcePoisson: {
        deltas[std::size_t(grp.members[0])] += poisson_draw(rng, hazards[0]);
        break;
      }
      case KernelLaw::EquiMultinomial:
      case KernelLaw::DirichletMultinomial: {
        if (grp.kind == GroupKind::ColorMatchedBounded) {
          // equi baseline on a color group: independent thinning
          double pi = -std::expm1(-shared_hazard(hazards));
          for (std::size_t i = 0; i < m; ++i) {
            std::int64_t x =
                state.counts[std::size_t(g.arrow(grp.members[i]).tail)];
            if (x > 0 && pi > 0.0)
              deltas[std::size_t(grp.members[i])] += binomial_draw(rng, x, pi);
          }
          break;
        }
        std::int64_t x_tail =
            state.counts[std::size_t(g.arrow(grp.members[0]).tail)];
        StepProbabilities sp = step_probs(
            hazards, ks.law == KernelLaw::DirichletMultinomial ? cval : 0.0);
        std::vector<std::int64_t> inc =
            ks.law == KernelLaw::DirichletMultinomial
                ? sample_bounded_star(x_tail, sp, cval, rng)
                : sample_equi_bounded(x_tail, sp, rng);
        for (std::size_t i = 0; i < m; ++i)
          deltas[std::size_t(grp.members[i])] += inc[i];
        break;
      }
      case KernelLaw::BetaBinomialShared: {
        member_counts.resize(m);
        for (std::size_t i = 0; i < m; ++i)
          member_counts[i] =
              state.counts[std::size_t(g.arrow(grp.members[i]).tail)];
        auto inc = sample_shared_beta_bounded(member_counts,
                                              shared_hazard(hazards), cval, rng);
        for (std::size_t i = 0; i < m; ++i)
          deltas[std::size_t(grp.members[i])] += inc[i];
        break;
      }
      case KernelLaw::EquiNegMultinomial:
      case KernelLaw::DirichletNegMultinomial: {
        if (grp.kind == GroupKind::ColorMatchedUnbounded) {
          double pi = -std::expm1(-shared_hazard(hazards));
          for (std::size_t i = 0; i < m; ++i) {
            std::int64_t x =
                state.counts[std::size_t(g.arrow(grp.members[i]).head)];
            if (x > 0 && pi > 0.0 && pi < 1.0)
              deltas[std::size_t(grp.members[i])] +=
                  neg_binomial_draw(rng, double(x), 1.0 - pi);
          }
          break;
        }
        std::int64_t x_head =
            state.counts[std::size_t(g.arrow(grp.members[0]).head)];
        StepProbabilities sp = step_probs(
            hazards,
            ks.law == KernelLaw::DirichletNegMultinomial ? cval : 0.0);
        std::vector<std::int64_t> inc =
            ks.law == KernelLaw::DirichletNegMultinomial
                ? sample_unbounded_star(x_head, sp, cval, rng, counters)
                : sample_equi_unbounded(x_head, sp, rng, counters);
        for (std::size_t i = 0; i < m; ++i)
          deltas[std::size_t(grp.members[i])] += inc[i];
        break;
      }
      case KernelLaw::BetaNegBinomialShared: {
        member_counts.resize(m);
        for (std::size_t i = 0; i < m; ++i)
          member_counts[i] =
              state.counts[std::size_t(g.arrow(grp.members[i]).head)];
        auto inc = sample_shared_beta_unbounded(
            member_counts, shared_hazard(hazards), cval, rng, counters);
        for (std::size_t i = 0; i < m; ++i)
          deltas[std::size_t(grp.members[i])] += inc[i];
        break;
      }
    }
  }

  apply_increments(g, state, deltas, model.bounded_tail, model.ignored_count);
}

}  // namespace

Trajectory simulate_one(const Model& model, const SystemState& init,
                        const SimulationPlan& plan, int replicate,
                        std::vector<double> const* param_override,
                        KernelCounters* counters) {
  plan.validate();
  const DirectedGraph& g = model.graph;
  std::span<const double> params =
      param_override ? std::span<const double>(*param_override)
                     : std::span<const double>(model.param_defaults);

  SystemState state = init;
  state.time = plan.t0;

  std::int64_t n_steps = std::llround((plan.t1 - plan.t0) / plan.dt);
  // record index -> step index (0 = initial state)
  std::vector<std::int64_t> record_steps;
  record_steps.reserve(plan.record_times.size());
  for (double rt : plan.record_times)
    record_steps.push_back(std::llround((rt - plan.t0) / plan.dt));

  Trajectory traj;
  traj.n_vertices = g.n_vertices();
  traj.n_arrows = g.n_arrows();
  auto record = [&](double t) {
    traj.times.push_back(t);
    traj.counts.insert(traj.counts.end(), state.counts.begin(),
                       state.counts.end());
    traj.flows.insert(traj.flows.end(), state.flows.begin(),
                      state.flows.end());
  };

  std::size_t next_record = 0;
  while (next_record < record_steps.size() && record_steps[next_record] == 0) {
    record(plan.t0);
    ++next_record;
  }

  StepScratch scratch;
  std::size_t n_groups = model.groups.size();

  for (std::int64_t n = 0; n < n_steps; ++n) {
    double t = plan.t0 + double(n) * plan.dt;
    euler_step(
        model, state, t, plan.dt, params,
        [&](std::size_t gi) {
          return make_stream(plan.seed, std::uint64_t(StreamPurpose::Simulate),
                             std::uint64_t(replicate),
                             std::uint64_t(n) * n_groups + gi);
        },
        counters, scratch);
    state.time = plan.t0 + double(n + 1) * plan.dt;

    while (next_record < record_steps.size() &&
           record_steps[next_record] == n + 1) {
      record(state.time);
      ++next_record;
    }
  }
  return traj;
}

void advance_state(const Model& model, SystemState& state, double t1, double dt,
                   std::span<const double> params, std::uint64_t stream_seed,
                   KernelCounters* counters) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  double span = t1 - state.time;
  if (span < -1e-12) throw std::invalid_argument("t1 precedes state time");
  std::int64_t n_steps = std::llround(span / dt);
  // observation times quantized in data files may sit slightly off the
  // grid; snap to whole steps and land exactly on t1
  if (std::fabs(span - double(n_steps) * dt) > 1e-3 * dt)
    throw std::invalid_argument("advance span must be a whole number of steps");
  double t_start = state.time;
  StepScratch scratch;
  std::size_t n_groups = model.groups.size();
  for (std::int64_t n = 0; n < n_steps; ++n) {
    double t = t_start + double(n) * dt;
    euler_step(
        model, state, t, dt, params,
        [&](std::size_t gi) {
          return make_stream(stream_seed, std::uint64_t(StreamPurpose::Simulate),
                             0, std::uint64_t(n) * n_groups + gi);
        },
        counters, scratch);
    state.time = t_start + double(n + 1) * dt;
  }
  state.time = t1;  // absorb grid quantization instead of accumulating it
}

std::vector<Trajectory> simulate(const Model& model, const SystemState& init,
                                 const SimulationPlan& plan, int n_threads) {
  plan.validate();
  std::vector<Trajectory> out(std::size_t(plan.replicates));
  parallel_for(plan.replicates, n_threads, [&](std::int64_t r) {
    out[std::size_t(r)] = simulate_one(model, init, plan, int(r));
  });
  return out;
}

void write_trajectory_csv(const std::string& path, const Model& model,
                          const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "time";
  for (VertexId v = 0; v < model.graph.n_vertices(); ++v)
    out << ',' << model.graph.vertex_name(v);
  for (ArrowId a = 0; a < model.graph.n_arrows(); ++a)
    out << ",flow:" << model.graph.arrow_name(a);
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.10g", traj.times[k]);
    out << buf;
    for (VertexId v = 0; v < traj.n_vertices; ++v)
      out << ',' << traj.count_at(k, v);
    for (ArrowId a = 0; a < traj.n_arrows; ++a)
      out << ',' << traj.flow_at(k, a);
    out << '\n';
  }
}

namespace {

constexpr char kTrajMagic[8] = {'D', 'S', 'P', 'T', 'R', 'A', 'J', '1'};

template <typename T>
void write_le(std::ofstream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));  // little-endian host assumed; documented
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in) {
  unsigned char b[sizeof(T)];
  in.read(reinterpret_cast<char*>(b), sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void write_trajectory_binary(const std::string& path, const Model& model,
                             const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kTrajMagic, 8);
  write_le<std::uint8_t>(out, 1);  // version
  write_le<std::uint32_t>(out, std::uint32_t(traj.n_vertices));
  write_le<std::uint32_t>(out, std::uint32_t(traj.n_arrows));
  write_le<std::uint64_t>(out, traj.times.size());
  for (double t : traj.times) write_le<double>(out, t);
  for (auto c : traj.counts) write_le<std::int64_t>(out, c);
  for (auto f : traj.flows) write_le<std::int64_t>(out, f);
  (void)model;
}

Trajectory read_trajectory_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kTrajMagic, 8) != 0)
    throw std::runtime_error("bad trajectory magic in " + path);
  auto version = read_le<std::uint8_t>(in);
  if (version != 1) throw std::runtime_error("unsupported trajectory version");
  Trajectory traj;
  traj.n_vertices = int(read_le<std::uint32_t>(in));
  traj.n_arrows = int(read_le<std::uint32_t>(in));
  auto n = read_le<std::uint64_t>(in);
  traj.times.resize(n);
  for (auto& t : traj.times) t = read_le<double>(in);
  traj.counts.resize(n * std::size_t(traj.n_vertices));
  for (auto& c : traj.counts) c = read_le<std::int64_t>(in);
  traj.flows.resize(n * std::size_t(traj.n_arrows));
  for (auto& f : traj.flows) f = read_le<std::int64_t>(in);
  if (!in) throw std::runtime_error("truncated trajectory file " + path);
  return traj;
}

}  // namespace dispersim
