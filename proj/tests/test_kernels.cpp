#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dispersim/kernels.hpp"
#include "quad_oracles.hpp"

using namespace dispersim;

TEST_CASE("step probabilities follow the hazard-splitting formula") {
  // one arrow, hazard ln 2
  auto sp1 = step_probs(std::vector<double>{std::log(2.0)});
  CHECK(sp1.pi[0] == doctest::Approx(0.5));
  CHECK(sp1.pi0() == doctest::Approx(0.5));

  // two arrows, hazards (ln2, ln2)
  auto sp2 = step_probs(std::vector<double>{std::log(2.0), std::log(2.0)});
  CHECK(sp2.pi[0] == doctest::Approx(0.375));
  CHECK(sp2.pi[1] == doctest::Approx(0.375));
  CHECK(sp2.pi0() == doctest::Approx(0.25));

  // all-zero hazards
  auto sp0 = step_probs(std::vector<double>{0.0, 0.0});
  CHECK(sp0.pi[0] == 0.0);
  CHECK(sp0.pi[1] == 0.0);
  CHECK(sp0.pi0() == 1.0);

  CHECK_THROWS(step_probs(std::vector<double>{-0.1}));

  // alpha = c * pi sums to c
  auto spc = step_probs(std::vector<double>{0.2, 0.5}, 7.0);
  double sum_alpha = std::accumulate(spc.alpha.begin(), spc.alpha.end(), 0.0);
  CHECK(sum_alpha == doctest::Approx(7.0));
}

TEST_CASE("bounded star draws sum exactly to the tail count") {
  RngStream rng = make_stream(42, 0);
  auto sp = step_probs(std::vector<double>{0.3, 0.1}, 5.0);
  for (int rep = 0; rep < 2000; ++rep) {
    auto inc = sample_bounded_star(50, sp, 5.0, rng);
    std::int64_t total = 0;
    for (auto k : inc) {
      CHECK(k >= 0);
      total += k;
    }
    CHECK(total == 50);
  }
  auto zero = sample_bounded_star(0, sp, 5.0, rng);
  for (auto k : zero) CHECK(k == 0);
}

TEST_CASE("beta-binomial sampler edge cases") {
  RngStream rng = make_stream(7, 0);
  CHECK(sample_beta_binomial(0, 0.5, 3.0, rng) == 0);
  for (int i = 0; i < 100; ++i) CHECK(sample_beta_binomial(10, 0.0, 3.0, rng) == 0);
  CHECK_THROWS(sample_beta_binomial(10, 0.5, 0.0, rng));
  for (int i = 0; i < 1000; ++i) {
    auto k = sample_beta_binomial(10, 0.2, 3.0, rng);
    CHECK(k >= 0);
    CHECK(k <= 10);
  }
}

TEST_CASE("shared-beta bounded with one member matches beta-binomial in law") {
  // same stream, same draws: the single-member shared sampler consumes
  // randomness identically to the single-arrow sampler
  RngStream a = make_stream(99, 1);
  RngStream b = make_stream(99, 1);
  std::vector<std::int64_t> tails{10};
  for (int i = 0; i < 200; ++i) {
    auto k1 = sample_shared_beta_bounded(tails, 0.3, 4.0, a);
    auto k2 = sample_beta_binomial(10, 0.3, 4.0, b);
    CHECK(k1[0] == k2);
  }
}

TEST_CASE("unbounded star: zero hazards give zero increments") {
  RngStream rng = make_stream(5, 0);
  auto sp = step_probs(std::vector<double>{0.0, 0.0}, 6.0);
  auto inc = sample_unbounded_star(5, sp, 6.0, rng);
  CHECK(inc.size() == 2);
  CHECK(inc[0] == 0);
  CHECK(inc[1] == 0);
}

TEST_CASE("negative-multinomial decomposition has the right moments") {
  // single unbounded arrow: x=5, r=1, c=3, small h: mean/h -> 7.5, var/h -> 52.5
  RngStream rng = make_stream(2024, 3);
  double h = 1e-3;
  auto sp = step_probs(std::vector<double>{h}, 3.0);
  const int M = 400000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < M; ++i) {
    auto inc = sample_unbounded_star(5, sp, 3.0, rng);
    double k = double(inc[0]);
    s1 += k;
    s2 += k * k;
  }
  double mean = s1 / M;
  double var = (s2 - M * mean * mean) / (M - 1);
  // generous tolerances: this is a smoke test, the calibrated version
  // with Richardson extrapolation lives in the acceptance suite
  CHECK(mean / h == doctest::Approx(7.5).epsilon(0.15));
  CHECK(var / h == doctest::Approx(52.5).epsilon(0.30));
}

TEST_CASE("exact transition rates: closed forms and limits") {
  std::vector<std::int64_t> x{3};
  std::vector<std::int64_t> k{1};
  std::vector<double> r{1.0};

  // beta-binomial rate: x=3, k=1, c=2 -> 2*3*Gamma(1)Gamma(4)/Gamma(5) = 1.5
  CHECK(exact_transition_rate(KernelLaw::DirichletMultinomial, x, k, 2.0, r) ==
        doctest::Approx(1.5));

  // c -> infinity recovers the simple-process rate x*r for k=1
  CHECK(exact_transition_rate(KernelLaw::DirichletMultinomial, x, k, 1e12, r) ==
        doctest::Approx(3.0).epsilon(1e-6));

  // k=2 jumps vanish in the limit
  std::vector<std::int64_t> k2{2};
  CHECK(exact_transition_rate(KernelLaw::DirichletMultinomial, x, k2, 1e12, r) ==
        doctest::Approx(0.0).epsilon(1e-6));

  // two simultaneous star-arrow jumps are o(h): leading-order rate 0
  std::vector<std::int64_t> x1{3};
  std::vector<std::int64_t> kk{1, 1};
  std::vector<double> rr{1.0, 1.0};
  CHECK(exact_transition_rate(KernelLaw::DirichletMultinomial, x1, kk, 2.0, rr) ==
        0.0);
  CHECK(exact_transition_rate(KernelLaw::DirichletNegMultinomial, x1, kk, 5.0,
                              rr) == 0.0);

  // beta-negative-binomial rate: x=5, k=1, c=3 -> 3*5*Gamma(1)Gamma(8)/Gamma(9) = 15/8
  std::vector<std::int64_t> x5{5};
  CHECK(exact_transition_rate(KernelLaw::DirichletNegMultinomial, x5, k, 3.0, r) ==
        doctest::Approx(1.875));

  // shared-beta bounded co-jump has positive leading-order rate
  std::vector<std::int64_t> xs{2, 3};
  std::vector<std::int64_t> ks{1, 1};
  std::vector<double> rs{1.0, 1.0};
  double q = exact_transition_rate(KernelLaw::BetaBinomialShared, xs, ks, 4.0, rs);
  // c * C(2,1)C(3,1) * Gamma(2)Gamma(3+4)/Gamma(5+4) = 4*6*720/40320
  CHECK(q == doctest::Approx(4.0 * 6.0 * 720.0 / 40320.0));

  // equi laws: only unit jumps at leading order
  CHECK(exact_transition_rate(KernelLaw::EquiMultinomial, x, k, 0.0, r) ==
        doctest::Approx(3.0));
  CHECK(exact_transition_rate(KernelLaw::EquiMultinomial, x, k2, 0.0, r) == 0.0);
}

TEST_CASE("moment oracles reproduce the worked examples") {
  // outgoing-star variance: x=50, r=1, c=10 -> (1+49/11)*50
  CHECK(inf_mean_rate(KernelLaw::DirichletMultinomial, 50, 1.0, 10.0) ==
        doctest::Approx(50.0));
  CHECK(inf_var_rate(KernelLaw::DirichletMultinomial, 50, 1.0, 10.0) ==
        doctest::Approx((1.0 + 49.0 / 11.0) * 50.0));

  // single bounded arrow: x=10, r=2, c=4 -> (1+9/5)*20 = 56
  CHECK(inf_var_rate(KernelLaw::BetaBinomialShared, 10, 2.0, 4.0) ==
        doctest::Approx(56.0));

  // x=1 is equi-dispersed
  CHECK(inf_var_rate(KernelLaw::DirichletMultinomial, 1, 2.0, 5.0) ==
        doctest::Approx(inf_mean_rate(KernelLaw::DirichletMultinomial, 1, 2.0, 5.0)));

  // single unbounded arrow: x=5, r=1, c=3 -> mean 7.5, var 52.5
  CHECK(inf_mean_rate(KernelLaw::DirichletNegMultinomial, 5, 1.0, 3.0) ==
        doctest::Approx(7.5));
  CHECK(inf_var_rate(KernelLaw::DirichletNegMultinomial, 5, 1.0, 3.0) ==
        doctest::Approx(52.5));

  // shared-beta bounded covariance: x=(2,3), c=4, r=1 -> 1.2; c -> inf -> 0
  CHECK(inf_cov_rate(KernelLaw::BetaBinomialShared, 2, 3, 1.0, 4.0) ==
        doctest::Approx(1.2));
  CHECK(inf_cov_rate(KernelLaw::BetaBinomialShared, 2, 3, 1.0, 1e12) ==
        doctest::Approx(0.0).epsilon(1e-9));

  // shared-beta unbounded covariance with head counts: (2,3), c=5, r=1 -> 2.5
  CHECK(inf_cov_rate(KernelLaw::BetaNegBinomialShared, 2, 3, 1.0, 5.0) ==
        doctest::Approx(2.5));

  // star laws are uncorrelated
  CHECK(inf_cov_rate(KernelLaw::DirichletMultinomial, 2, 3, 1.0, 4.0) == 0.0);
}

TEST_CASE("transition rates agree with the quadrature oracle and h-slope") {
  // beta-binomial: P(k | h)/h extrapolated to h=0 matches the closed-form rate
  double c = 2.0, r = 1.0;
  std::int64_t x = 6;
  for (std::int64_t k = 1; k <= 3; ++k) {
    auto prob = [&](double h) {
      double pi = -std::expm1(-r * h);
      return quad_oracles::beta_binomial_pmf(x, k, c, pi);
    };
    double h = 1e-3;
    double slope = 2.0 * prob(h / 2) / (h / 2) - prob(h) / h;
    std::vector<std::int64_t> xs{x}, ks{k};
    std::vector<double> rs{r};
    double q = exact_transition_rate(KernelLaw::DirichletMultinomial, xs, ks, c, rs);
    CHECK(slope == doctest::Approx(q).epsilon(0.02));
  }

  // beta-negative-binomial against its closed-form rate
  for (std::int64_t k = 1; k <= 3; ++k) {
    auto prob = [&](double h) {
      double pi = -std::expm1(-r * h);
      return quad_oracles::beta_negbinomial_pmf(4, k, c, pi);
    };
    double h = 1e-3;
    double slope = 2.0 * prob(h / 2) / (h / 2) - prob(h) / h;
    std::vector<std::int64_t> xs{4}, ks{k};
    std::vector<double> rs{r};
    double q =
        exact_transition_rate(KernelLaw::DirichletNegMultinomial, xs, ks, c, rs);
    CHECK(slope == doctest::Approx(q).epsilon(0.02));
  }
}

TEST_CASE("unbounded moment condition") {
  CHECK(unbounded_moments_valid(3.0, 0.001));
  CHECK(!unbounded_moments_valid(2.0, 0.0));
  CHECK(!unbounded_moments_valid(2.1, 1.0));
}

TEST_CASE("shared-beta unbounded with one member matches the single sampler") {
  // same stream: one shared draw then one negative binomial
  RngStream a = make_stream(55, 2);
  RngStream b = make_stream(55, 2);
  std::vector<std::int64_t> heads{7};
  for (int i = 0; i < 200; ++i) {
    auto k1 = sample_shared_beta_unbounded(heads, 0.2, 5.0, a);
    double pi = -std::expm1(-0.2);
    double big_pi = beta_draw(b, 5.0 * pi, 5.0 * (1.0 - pi));
    std::int64_t k2 = neg_binomial_draw(b, 7.0, 1.0 - big_pi);
    CHECK(k1[0] == k2);
  }
}
