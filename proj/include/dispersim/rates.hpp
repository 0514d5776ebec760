#ifndef DISPERSIM_RATES_HPP
#define DISPERSIM_RATES_HPP

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dispersim/covariates.hpp"
#include "dispersim/forcing.hpp"
#include "dispersim/graph.hpp"

namespace dispersim {

// Flat named parameter block shared by rate expressions and engines.
struct ParamLayout {
  std::vector<std::string> names;
  int index(const std::string& name) const;        // throws if unknown
  int find(const std::string& name) const;         // -1 if unknown
  int add(const std::string& name);                // idempotent
};

// A numeric field of a rate expression: either a literal or a slot in
// the parameter block (so inference can move it without rebuilding).
struct Coef {
  double value = 0.0;
  int param = -1;
  double get(std::span<const double> p) const {
    return param >= 0 ? p[std::size_t(param)] : value;
  }
  static Coef lit(double v) { return {v, -1}; }
  static Coef ref(int idx) { return {0.0, idx}; }
};

struct RateEvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shared immutable context for time-varying pieces.
struct RateContext {
  const CovariateTable* covariates = nullptr;
  const SeasonalForcing* forcing = nullptr;
};

// Per-capita rate expression r(t, x; params). Integration over a step is
// exact on each smooth piece; pieces are delimited by global breakpoints
// (covariate grid times, term-calendar edges, pulse edges), which makes
// the integral additive across adjacent subintervals.
class RateExpr {
 public:
  virtual ~RateExpr() = default;
  virtual double eval(double t, std::span<const std::int64_t> counts,
                      std::span<const double> params,
                      const RateContext& ctx) const = 0;
  virtual void add_breakpoints(double t0, double t1, const RateContext& ctx,
                               std::vector<double>& out) const = 0;
  // Closed-form integral over [a,b] assuming no breakpoint inside.
  virtual double integrate_piece(double a, double b,
                                 std::span<const std::int64_t> counts,
                                 std::span<const double> params,
                                 const RateContext& ctx) const = 0;
};

using RateExprPtr = std::shared_ptr<const RateExpr>;

// Builtin forms.
RateExprPtr rate_constant(Coef value);
RateExprPtr rate_covariate(int column);
// product of factors; at most one factor may be time-varying
RateExprPtr rate_product(std::vector<RateExprPtr> factors);
// base^exponent; base must be time-constant within a step
RateExprPtr rate_power(RateExprPtr base, Coef exponent);
// count of a vertex, read from the frozen state
RateExprPtr rate_count(VertexId v);
// beta(t) * (x_I + iota)^alpha / N(t) with beta(t) the seasonal factor
// times the product of beta_factors (e.g. {R0, r_IR} when beta_bar is
// reparameterized as R0 * r_IR).
RateExprPtr rate_force_of_infection(std::vector<Coef> beta_factors, Coef theta_a,
                                    Coef iota, Coef alpha, VertexId infectious,
                                    int population_column);
// Susceptible recruitment with cohort entry: fraction theta_c of the
// (delayed) birth stream enters as a pulse of `pulse_days` starting on
// the admission day; the remainder enters continuously.
RateExprPtr rate_recruitment(int births_column, double delay_years,
                             Coef cohort_fraction, double admission_doy,
                             double pulse_days);

// Per-arrow rate functions for one model.
class RateSpec {
 public:
  RateSpec() = default;
  RateSpec(const DirectedGraph& g, RateContext ctx) : ctx_(ctx) {
    exprs_.resize(std::size_t(g.n_arrows()));
  }

  void set(ArrowId a, RateExprPtr e) { exprs_[std::size_t(a)] = std::move(e); }
  bool has(ArrowId a) const { return bool(exprs_[std::size_t(a)]); }
  const RateContext& context() const { return ctx_; }

  // r_{vv'}(t, x); throws on negative or non-finite values.
  double eval(ArrowId a, double t, std::span<const std::int64_t> counts,
              std::span<const double> params) const;

  // Integral of r over [t, t+h] with the state frozen at t.
  double integrate(ArrowId a, double t, double h,
                   std::span<const std::int64_t> counts,
                   std::span<const double> params) const;

 private:
  std::vector<RateExprPtr> exprs_;
  RateContext ctx_;
};

}  // namespace dispersim

#endif
