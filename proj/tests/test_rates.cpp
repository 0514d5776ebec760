#include <doctest.h>

#include <cmath>
#include <functional>

#include "dispersim/covariates.hpp"
#include "dispersim/forcing.hpp"
#include "dispersim/graph.hpp"
#include "dispersim/rates.hpp"

using namespace dispersim;

namespace {

DirectedGraph two_vertex() {
  DirectedGraph::Spec spec;
  spec.vertices = {{"u", "none"}, {"v", "none"}, {"I", "none"}};
  spec.arrows = {{"u", "v"}};
  return DirectedGraph::build(spec);
}

// adaptive Simpson quadrature oracle for rate integrals
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fb, double fm, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
         simpson(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

double quad(const std::function<double(double)>& f, double a, double b,
            double eps = 1e-12) {
  double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), eps, 48);
}

}  // namespace

TEST_CASE("covariate table: linear and step interpolation with exact integrals") {
  CovariateTable tab({0.0, 1.0, 2.0}, {"lin", "stp"},
                     {{0.0, 2.0, 0.0}, {1.0, 3.0, 5.0}},
                     {Interp::Linear, Interp::Step});
  CHECK(tab.value(0, 0.5) == doctest::Approx(1.0));
  CHECK(tab.value(1, 0.5) == doctest::Approx(1.0));
  CHECK(tab.value(1, 1.5) == doctest::Approx(3.0));
  CHECK(tab.integrate(0, 0.0, 2.0) == doctest::Approx(2.0));
  CHECK(tab.integrate(1, 0.5, 1.5) == doctest::Approx(0.5 * 1.0 + 0.5 * 3.0));
  CHECK_THROWS(tab.value(0, -0.1));
  CHECK_THROWS(tab.value(0, 2.1));
}

TEST_CASE("seasonal forcing: term factor, year average, positivity guard") {
  SeasonalForcing f;
  f.calendar = TermCalendar::default_england();
  f.p = f.calendar.term_fraction();

  double theta_a = 0.3;
  // pointwise two-level structure
  double hi = 1.0 + 2.0 * (1.0 - f.p) * theta_a;
  double lo = 1.0 - 2.0 * f.p * theta_a;
  bool saw_hi = false, saw_lo = false;
  double avg = 0.0;
  int n = 36525;
  for (int i = 0; i < n; ++i) {
    double t = (i + 0.5) / double(n);
    double v = f.factor(t, theta_a);
    if (v == doctest::Approx(hi)) saw_hi = true;
    if (v == doctest::Approx(lo)) saw_lo = true;
    avg += v;
  }
  avg /= double(n);
  CHECK(saw_hi);
  CHECK(saw_lo);
  // year average of beta equals beta_bar when p matches the calendar
  CHECK(avg == doctest::Approx(1.0).epsilon(1e-3));

  // theta_a = 0 collapses to beta_bar everywhere
  for (int i = 0; i < 400; ++i)
    CHECK(f.factor(i * 0.9973 / 400.0, 0.0) == doctest::Approx(1.0));

  CHECK_THROWS(SeasonalForcing::validate_theta_a(0.9, 0.7589));
}

TEST_CASE("constant rate: eval and exact integral") {
  DirectedGraph g = two_vertex();
  RateSpec rs(g, {});
  rs.set(0, rate_constant(Coef::lit(2.0)));
  std::vector<std::int64_t> counts(3, 0);
  CHECK(rs.eval(0, 0.3, counts, {}) == doctest::Approx(2.0));
  CHECK(rs.integrate(0, 0.0, 0.5, counts, {}) == doctest::Approx(1.0));
  CHECK(rs.integrate(0, 0.0, 0.0, counts, {}) == 0.0);
}

TEST_CASE("force of infection matches the closed formula") {
  DirectedGraph g = two_vertex();
  auto cov = CovariateTable({0.0, 10.0}, {"pop"}, {{1000.0, 1000.0}},
                            {Interp::Linear});
  RateSpec rs(g, {&cov, nullptr});
  // beta_bar = 5, theta_a = 0 (no forcing attached), iota = 0, alpha = 1
  rs.set(0, rate_force_of_infection({Coef::lit(5.0)}, Coef::lit(0.0),
                                    Coef::lit(0.0), Coef::lit(1.0),
                                    g.vertex_index("I"), 0));
  std::vector<std::int64_t> counts(3, 0);
  counts[std::size_t(g.vertex_index("I"))] = 100;
  CHECK(rs.eval(0, 1.0, counts, {}) == doctest::Approx(5.0 * 0.1));

  // Table-1-style values, still the plain formula
  double R0 = 34.09, r_IR = 22.88, alpha = 1.017, iota = 55.08;
  RateSpec rs2(g, {&cov, nullptr});
  rs2.set(0, rate_force_of_infection({Coef::lit(R0), Coef::lit(r_IR)},
                                     Coef::lit(0.0), Coef::lit(iota),
                                     Coef::lit(alpha), g.vertex_index("I"), 0));
  double expect = R0 * r_IR * std::pow(100.0 + iota, alpha) / 1000.0;
  CHECK(rs2.eval(0, 1.0, counts, {}) == doctest::Approx(expect));

  // monotone nondecreasing in x_I
  double prev = 0.0;
  for (std::int64_t x : {0, 1, 5, 50, 500}) {
    counts[std::size_t(g.vertex_index("I"))] = x;
    double r = rs2.eval(0, 1.0, counts, {});
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("forcing integral crossing a term edge matches quadrature") {
  DirectedGraph g = two_vertex();
  auto cov = CovariateTable({-1.0, 10.0}, {"pop"}, {{1.0, 1.0}}, {Interp::Linear});
  SeasonalForcing forcing;
  forcing.calendar = TermCalendar::default_england();
  forcing.p = 0.7589;
  RateSpec rs(g, {&cov, &forcing});
  double theta_a = 0.4;
  rs.set(0, rate_force_of_infection({Coef::lit(3.0)}, Coef::lit(theta_a),
                                    Coef::lit(1.0), Coef::lit(1.0),
                                    g.vertex_index("I"), 0));
  std::vector<std::int64_t> counts(3, 0);
  counts[std::size_t(g.vertex_index("I"))] = 9;

  // the first term interval opens at day 7: integrate across that edge
  double edge = 7.0 / kDaysPerYear;
  double a = edge - 0.01, b = edge + 0.01;
  double got = rs.integrate(0, a, b - a, counts, {});
  double want =
      quad([&](double t) { return rs.eval(0, t, counts, {}); }, a, b, 1e-13);
  CHECK(got == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("rate integral is additive over adjacent subintervals") {
  DirectedGraph g = two_vertex();
  auto cov = CovariateTable({-1.0, 0.4, 0.81, 10.0}, {"pop", "births"},
                            {{900.0, 1100.0, 950.0, 1000.0},
                             {50.0, 60.0, 55.0, 52.0}},
                            {Interp::Linear, Interp::Linear});
  SeasonalForcing forcing;
  forcing.calendar = TermCalendar::default_england();
  forcing.p = 0.7589;
  RateSpec rs(g, {&cov, &forcing});
  rs.set(0, rate_force_of_infection({Coef::lit(3.0)}, Coef::lit(0.25),
                                    Coef::lit(2.0), Coef::lit(1.1),
                                    g.vertex_index("I"), 0));
  std::vector<std::int64_t> counts(3, 0);
  counts[std::size_t(g.vertex_index("I"))] = 4;

  double t0 = 0.1, h = 1.3;
  double whole = rs.integrate(0, t0, h, counts, {});
  for (double split : {0.3, 0.5, 0.99}) {
    double part = rs.integrate(0, t0, split * h, counts, {}) +
                  rs.integrate(0, t0 + split * h, (1.0 - split) * h, counts, {});
    CHECK(part == doctest::Approx(whole).epsilon(1e-12));
  }
}

TEST_CASE("recruitment pulse delivers the cohort fraction") {
  DirectedGraph g = two_vertex();
  auto cov = CovariateTable({-6.0, 10.0}, {"births"}, {{73.05, 73.05}},
                            {Interp::Linear});
  RateSpec rs(g, {&cov, nullptr});
  double theta_c = 0.4;
  rs.set(0, rate_recruitment(0, 4.0, Coef::lit(theta_c), 251.0, 1.0));
  std::vector<std::int64_t> counts(3, 0);

  // over one whole year the pulse and the continuous stream add to the
  // annual (delayed) birth input
  double year_total = rs.integrate(0, 0.0, 1.0, counts, {});
  CHECK(year_total == doctest::Approx(73.05).epsilon(1e-9));

  // the pulse day carries theta_c of the annual input
  double pulse_start = 251.0 / kDaysPerYear;
  double pulse = rs.integrate(0, pulse_start, 1.0 / kDaysPerYear, counts, {});
  double base = 73.05 / kDaysPerYear;  // continuous share inside the window
  CHECK(pulse - (1 - theta_c) * base ==
        doctest::Approx(theta_c * 73.05).epsilon(1e-9));

  // no pulse elsewhere
  double quiet = rs.eval(0, 100.0 / kDaysPerYear, counts, {});
  CHECK(quiet == doctest::Approx((1 - theta_c) * 73.05));
}

TEST_CASE("rate evaluation errors") {
  DirectedGraph g = two_vertex();
  RateSpec rs(g, {});
  rs.set(0, rate_constant(Coef::lit(-1.0)));
  std::vector<std::int64_t> counts(3, 0);
  CHECK_THROWS_AS(rs.eval(0, 0.0, counts, {}), RateEvalError);

  auto cov = CovariateTable({0.0, 1.0}, {"x"}, {{1.0, 1.0}}, {Interp::Linear});
  RateSpec rs2(g, {&cov, nullptr});
  rs2.set(0, rate_covariate(0));
  CHECK_THROWS(rs2.eval(0, 5.0, counts, {}));  // outside the grid
}

TEST_CASE("parameter-driven coefficients read the param block") {
  DirectedGraph g = two_vertex();
  RateSpec rs(g, {});
  ParamLayout layout;
  int idx = layout.add("r");
  rs.set(0, rate_constant(Coef::ref(idx)));
  std::vector<std::int64_t> counts(3, 0);
  std::vector<double> params{3.5};
  CHECK(rs.eval(0, 0.0, counts, params) == doctest::Approx(3.5));
  CHECK(rs.integrate(0, 0.0, 2.0, counts, params) == doctest::Approx(7.0));
}

TEST_CASE("term calendar file round-trips the built-in default") {
  TermCalendar file = TermCalendar::from_json_file(
      DISPERSIM_SOURCE_DIR "/data/term_calendar.json");
  TermCalendar def = TermCalendar::default_england();
  REQUIRE(file.intervals.size() == def.intervals.size());
  for (std::size_t i = 0; i < file.intervals.size(); ++i) {
    CHECK(file.intervals[i].start_doy == def.intervals[i].start_doy);
    CHECK(file.intervals[i].end_doy == def.intervals[i].end_doy);
  }
  CHECK(file.term_fraction() == doctest::Approx(277.0 / 365.25));
}
