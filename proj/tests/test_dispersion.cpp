#include <doctest.h>

#include <cmath>

#include "dispersim/dispersion.hpp"
#include "test_models.hpp"

using namespace dispersim;
using namespace test_models;

namespace {

InfinitesimalOptions quick_opts(std::uint64_t seed, std::int64_t M = 60000) {
  InfinitesimalOptions o;
  o.h_grid = {1e-3, 5e-4};
  o.replicates = M;
  o.seed = seed;
  o.threads = 2;
  return o;
}

}  // namespace

TEST_CASE("equi law: dispersion index CI brackets 1") {
  Model m = one_arrow(KernelLaw::EquiMultinomial, 1.0);
  SystemState s = state_with(m, {{"u", 50}});
  auto lab = estimate_infinitesimal(m, s, {0}, {}, quick_opts(1));
  const auto& e = lab.arrows[0];
  CHECK(std::fabs(e.index - 1.0) < 3.5 * e.index_se);
  CHECK(std::fabs(e.mean_rate - 50.0) < 4.0 * e.mean_se);
}

TEST_CASE("Dirichlet-multinomial: D matches 1 + (x-1)/(c+1)") {
  Model m = one_arrow(KernelLaw::DirichletMultinomial, 1.0, 10.0);
  SystemState s = state_with(m, {{"u", 50}});
  auto lab = estimate_infinitesimal(m, s, {0}, {}, quick_opts(2, 150000));
  const auto& e = lab.arrows[0];
  double want = 1.0 + 49.0 / 11.0;
  CHECK(std::fabs(e.index - want) < 4.0 * e.index_se);
}

TEST_CASE("x=1 gives equi-dispersion even with noise") {
  Model m = one_arrow(KernelLaw::DirichletMultinomial, 2.0, 5.0);
  SystemState s = state_with(m, {{"u", 1}});
  auto lab = estimate_infinitesimal(m, s, {0}, {}, quick_opts(3));
  const auto& e = lab.arrows[0];
  CHECK(std::fabs(e.index - 1.0) < 3.5 * e.index_se);
}

TEST_CASE("shared-beta bounded pair: covariance rate near x1 x2 r/(c+1)") {
  Model m = color_pair(KernelLaw::BetaBinomialShared, 1.0, 4.0);
  SystemState s = state_with(m, {{"s1", 2}, {"s2", 3}});
  auto lab = estimate_infinitesimal(m, s, {0, 1}, {{0, 1}}, quick_opts(4, 200000));
  const auto& cov = lab.pairs[0];
  CHECK(std::fabs(cov.cov_rate - 1.2) < 4.0 * cov.cov_se);
}

TEST_CASE("star arrows are infinitesimally uncorrelated") {
  Model m = two_arrow_star(KernelLaw::DirichletMultinomial, 1.0, 1.0, 5.0);
  SystemState s = state_with(m, {{"v", 40}});
  // co-jumps are O(h^2)-rare; a coarser grid keeps the batch SEs honest
  auto opts = quick_opts(5, 200000);
  opts.h_grid = {1e-2, 5e-3};
  auto lab = estimate_infinitesimal(m, s, {0, 1}, {{0, 1}}, opts);
  const auto& cov = lab.pairs[0];
  CHECK(std::fabs(cov.cov_rate) < 3.0 * cov.cov_se + 0.05);
}

TEST_CASE("integrated oracles reproduce the worked numbers") {
  auto d0 = integrated_death_oracle(100, 0.0);
  CHECK(d0.mean == 0.0);
  CHECK(d0.variance == 0.0);
  CHECK(d0.index == 1.0);

  auto d = integrated_death_oracle(100, std::log(2.0));
  CHECK(d.mean == doctest::Approx(50.0));
  CHECK(d.variance == doctest::Approx(25.0));
  CHECK(d.index == doctest::Approx(0.5));

  auto dinf = integrated_death_oracle(100, 50.0);
  CHECK(dinf.mean == doctest::Approx(100.0));
  CHECK(dinf.index == doctest::Approx(0.0).epsilon(1e-12));

  auto b0 = integrated_birth_oracle(10, 0.0);
  CHECK(b0.mean == 0.0);
  CHECK(b0.index == 1.0);

  auto b = integrated_birth_oracle(10, std::log(2.0));
  CHECK(b.mean == doctest::Approx(10.0));
  CHECK(b.variance == doctest::Approx(20.0));
  CHECK(b.index == doctest::Approx(2.0));
  CHECK(b.index >= 1.0);

  CHECK_THROWS(integrated_death_oracle(-1, 1.0));
}

TEST_CASE("classification follows the CI-aware trichotomy") {
  auto mk = [](double d, double se) {
    DispersionEstimate e;
    e.arrow = 0;
    e.index = d;
    e.index_se = se;
    return e;
  };
  CHECK(classify_systemic({mk(1.0, 0.01), mk(1.001, 0.01)}) == SystemicClass::Equi);
  CHECK(classify_systemic({mk(1.0, 0.01), mk(1.5, 0.02)}) == SystemicClass::Over);
  CHECK(classify_systemic({mk(0.5, 0.02), mk(1.0, 0.01)}) == SystemicClass::Under);
  CHECK(classify_systemic({mk(0.5, 0.02), mk(1.5, 0.02)}) ==
        SystemicClass::Indeterminate);
  CHECK_THROWS(classify_systemic({}));
}

TEST_CASE("single transition rate: closed forms and additivity") {
  // zero rates
  Model z = one_arrow(KernelLaw::EquiMultinomial, 0.0);
  SystemState sz = state_with(z, {{"u", 5}});
  CHECK(single_transition_rate(z, sz) == 0.0);

  // single equi arrow: lambda = x r
  Model e = one_arrow(KernelLaw::EquiMultinomial, 2.0);
  SystemState se = state_with(e, {{"u", 7}});
  CHECK(single_transition_rate(e, se) == doctest::Approx(14.0));

  // single beta-binomial arrow x=3, c=2, r=1: sum of the beta-binomial rates
  Model bb = one_arrow(KernelLaw::DirichletMultinomial, 1.0, 2.0);
  SystemState sbb = state_with(bb, {{"u", 3}});
  double want = 0.0;
  for (std::int64_t k = 1; k <= 3; ++k) {
    std::vector<std::int64_t> xs{3}, ks{k};
    std::vector<double> rs{1.0};
    want += exact_transition_rate(KernelLaw::DirichletMultinomial, xs, ks, 2.0, rs);
  }
  CHECK(single_transition_rate(bb, sbb) == doctest::Approx(want));
  // k=1 leading term is 1.5 (worked example)
  std::vector<std::int64_t> xs{3}, ks{1};
  std::vector<double> rs{1.0};
  CHECK(exact_transition_rate(KernelLaw::DirichletMultinomial, xs, ks, 2.0, rs) ==
        doctest::Approx(1.5));

  // additivity across a disjoint union: build the pair model with the
  // same two arrows as independent singletons and compare sums
  Model pair = color_pair(KernelLaw::BetaBinomialShared, 1.0, 4.0);
  SystemState sp = state_with(pair, {{"s1", 2}, {"s2", 3}});
  double lam_pair = single_transition_rate(pair, sp);
  // the shared-beta group collapses to one beta-binomial with x = 5
  Model merged = one_arrow(KernelLaw::DirichletMultinomial, 1.0, 4.0);
  SystemState sm = state_with(merged, {{"u", 5}});
  CHECK(lam_pair == doctest::Approx(single_transition_rate(merged, sm)));
}

TEST_CASE("degenerate state is rejected") {
  Model m = one_arrow(KernelLaw::EquiMultinomial, 1.0);
  SystemState s = SystemState::zero(m.graph);
  CHECK_THROWS(estimate_infinitesimal(m, s, {0}, {}, quick_opts(6)));
}

TEST_CASE("single transition rate is exactly additive over disjoint groups") {
  // one model containing two independent groups...
  DirectedGraph::Spec spec;
  spec.vertices = {{"u", "none"}, {"v", "none"}, {"p", "none"}, {"q", "none"}};
  spec.arrows = {{"u", "v"}, {"p", "q"}};
  Model both;
  both.graph = DirectedGraph::build(spec);
  GroupingPolicy policy;
  policy.groups.push_back({GroupKind::Singleton, {{"u", "v"}}});
  policy.groups.push_back({GroupKind::Singleton, {{"p", "q"}}});
  both.groups = partition_arrow_groups(both.graph, policy);
  both.kernels = {{KernelLaw::DirichletMultinomial, 2.0, -1},
                  {KernelLaw::DirichletNegMultinomial, 5.0, -1}};
  both.rates = RateSpec(both.graph, {});
  both.rates.set(0, rate_constant(Coef::lit(1.3)));
  both.rates.set(1, rate_constant(Coef::lit(0.7)));
  both.validate();
  SystemState s = state_with(both, {{"u", 6}, {"q", 4}});
  double lam_both = single_transition_rate(both, s);

  // ...equals the sum over the single-group models
  Model a = one_arrow(KernelLaw::DirichletMultinomial, 1.3, 2.0);
  SystemState sa = state_with(a, {{"u", 6}});
  Model b = one_arrow(KernelLaw::DirichletNegMultinomial, 0.7, 5.0);
  SystemState sb = state_with(b, {{"v", 4}});
  CHECK(lam_both ==
        single_transition_rate(a, sa) + single_transition_rate(b, sb));
}

TEST_CASE("equi baseline on a color-matched pair: independent, equi-dispersed") {
  Model m = color_pair(KernelLaw::EquiMultinomial, 1.0);
  SystemState s = state_with(m, {{"s1", 20}, {"s2", 30}});
  auto lab = estimate_infinitesimal(m, s, {0, 1}, {{0, 1}}, quick_opts(21, 120000));
  CHECK(std::fabs(lab.arrows[0].mean_rate - 20.0) < 4.0 * lab.arrows[0].mean_se);
  CHECK(std::fabs(lab.arrows[1].mean_rate - 30.0) < 4.0 * lab.arrows[1].mean_se);
  CHECK(std::fabs(lab.arrows[0].index - 1.0) < 3.5 * lab.arrows[0].index_se);
  CHECK(std::fabs(lab.pairs[0].cov_rate) < 3.5 * lab.pairs[0].cov_se + 0.02);
}
