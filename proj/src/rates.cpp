#include "dispersim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dispersim {

int ParamLayout::index(const std::string& name) const {
  int i = find(name);
  if (i < 0) throw std::runtime_error("unknown parameter: " + name);
  return i;
}

int ParamLayout::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return int(i);
  return -1;
}

int ParamLayout::add(const std::string& name) {
  int i = find(name);
  if (i >= 0) return i;
  names.push_back(name);
  return int(names.size()) - 1;
}

namespace {

class TimeConstantExpr : public RateExpr {
 public:
  void add_breakpoints(double, double, const RateContext&,
                       std::vector<double>&) const override {}
  double integrate_piece(double a, double b,
                         std::span<const std::int64_t> counts,
                         std::span<const double> params,
                         const RateContext& ctx) const override {
    return eval(a, counts, params, ctx) * (b - a);
  }
  virtual bool time_varying() const { return false; }
};

bool expr_time_varying(const RateExpr& e) {
  auto* tc = dynamic_cast<const TimeConstantExpr*>(&e);
  return tc == nullptr;
}

class ConstantExpr final : public TimeConstantExpr {
 public:
  explicit ConstantExpr(Coef v) : v_(v) {}
  double eval(double, std::span<const std::int64_t>,
              std::span<const double> params,
              const RateContext&) const override {
    return v_.get(params);
  }

 private:
  Coef v_;
};

class CountExpr final : public TimeConstantExpr {
 public:
  explicit CountExpr(VertexId v) : v_(v) {}
  double eval(double, std::span<const std::int64_t> counts,
              std::span<const double>, const RateContext&) const override {
    return double(counts[std::size_t(v_)]);
  }

 private:
  VertexId v_;
};

class PowerExpr final : public TimeConstantExpr {
 public:
  PowerExpr(RateExprPtr base, Coef e) : base_(std::move(base)), e_(e) {
    if (expr_time_varying(*base_))
      throw std::runtime_error("power base must be time-constant within a step");
  }
  double eval(double t, std::span<const std::int64_t> counts,
              std::span<const double> params,
              const RateContext& ctx) const override {
    return std::pow(base_->eval(t, counts, params, ctx), e_.get(params));
  }

 private:
  RateExprPtr base_;
  Coef e_;
};

class CovariateExpr final : public RateExpr {
 public:
  explicit CovariateExpr(int col) : col_(col) {}
  double eval(double t, std::span<const std::int64_t>,
              std::span<const double>, const RateContext& ctx) const override {
    return ctx.covariates->value(col_, t);
  }
  void add_breakpoints(double t0, double t1, const RateContext& ctx,
                       std::vector<double>& out) const override {
    ctx.covariates->breakpoints(t0, t1, out);
  }
  double integrate_piece(double a, double b, std::span<const std::int64_t>,
                         std::span<const double>,
                         const RateContext& ctx) const override {
    return ctx.covariates->integrate(col_, a, b);
  }

 private:
  int col_;
};

class ProductExpr final : public RateExpr {
 public:
  explicit ProductExpr(std::vector<RateExprPtr> fs) : fs_(std::move(fs)) {
    int varying = 0;
    for (const auto& f : fs_)
      if (expr_time_varying(*f)) ++varying;
    if (varying > 1)
      throw std::runtime_error(
          "product rate allows at most one time-varying factor");
  }
  double eval(double t, std::span<const std::int64_t> counts,
              std::span<const double> params,
              const RateContext& ctx) const override {
    double r = 1.0;
    for (const auto& f : fs_) r *= f->eval(t, counts, params, ctx);
    return r;
  }
  void add_breakpoints(double t0, double t1, const RateContext& ctx,
                       std::vector<double>& out) const override {
    for (const auto& f : fs_) f->add_breakpoints(t0, t1, ctx, out);
  }
  double integrate_piece(double a, double b,
                         std::span<const std::int64_t> counts,
                         std::span<const double> params,
                         const RateContext& ctx) const override {
    double scale = 1.0;
    const RateExpr* varying = nullptr;
    for (const auto& f : fs_) {
      if (expr_time_varying(*f))
        varying = f.get();
      else
        scale *= f->eval(a, counts, params, ctx);
    }
    if (!varying) return scale * (b - a);
    return scale * varying->integrate_piece(a, b, counts, params, ctx);
  }

 private:
  std::vector<RateExprPtr> fs_;
};

// Exact integral of 1/N(t) over [a,b] given endpoint values of a
// linearly interpolated N with no grid point inside.
double integrate_reciprocal(double a, double b, double na, double nb) {
  double len = b - a;
  if (len <= 0.0) return 0.0;
  double s = (nb - na) / len;
  double d = s * len / na;
  if (std::fabs(d) < 1e-12) return len / na * (1.0 - 0.5 * d);
  return std::log1p(d) / s;
}

class ForceOfInfectionExpr final : public RateExpr {
 public:
  ForceOfInfectionExpr(std::vector<Coef> beta_factors, Coef theta_a, Coef iota,
                       Coef alpha, VertexId infectious, int pop_col)
      : beta_factors_(std::move(beta_factors)),
        theta_a_(theta_a),
        iota_(iota),
        alpha_(alpha),
        infectious_(infectious),
        pop_col_(pop_col) {
    if (beta_factors_.empty())
      throw std::runtime_error("force-of-infection needs beta factors");
  }

  double beta_bar(std::span<const double> params) const {
    double b = 1.0;
    for (const Coef& f : beta_factors_) b *= f.get(params);
    return b;
  }

  double mixing_term(std::span<const std::int64_t> counts,
                     std::span<const double> params) const {
    double xi = double(counts[std::size_t(infectious_)]);
    return std::pow(xi + iota_.get(params), alpha_.get(params));
  }

  double eval(double t, std::span<const std::int64_t> counts,
              std::span<const double> params,
              const RateContext& ctx) const override {
    double beta = beta_bar(params);
    if (ctx.forcing) beta *= ctx.forcing->factor(t, theta_a_.get(params));
    return beta * mixing_term(counts, params) /
           ctx.covariates->value(pop_col_, t);
  }

  void add_breakpoints(double t0, double t1, const RateContext& ctx,
                       std::vector<double>& out) const override {
    if (ctx.forcing) ctx.forcing->calendar.breakpoints(t0, t1, out);
    ctx.covariates->breakpoints(t0, t1, out);
  }

  double integrate_piece(double a, double b,
                         std::span<const std::int64_t> counts,
                         std::span<const double> params,
                         const RateContext& ctx) const override {
    double beta = beta_bar(params);
    // classify the piece by its midpoint: endpoints sit on term edges
    if (ctx.forcing)
      beta *= ctx.forcing->factor(0.5 * (a + b), theta_a_.get(params));
    double na = ctx.covariates->value(pop_col_, a);
    double nb = ctx.covariates->value(pop_col_, b);
    return beta * mixing_term(counts, params) *
           integrate_reciprocal(a, b, na, nb);
  }

 private:
  std::vector<Coef> beta_factors_;
  Coef theta_a_, iota_, alpha_;
  VertexId infectious_;
  int pop_col_;
};

class RecruitmentExpr final : public RateExpr {
 public:
  RecruitmentExpr(int births_col, double delay, Coef cohort,
                  double admission_doy, double pulse_days)
      : births_col_(births_col),
        delay_(delay),
        cohort_(cohort),
        admission_doy_(admission_doy),
        pulse_days_(pulse_days) {
    if (pulse_days_ <= 0.0) throw std::runtime_error("pulse_days must be > 0");
  }

  bool in_pulse(double t) const {
    double doy = (t - std::floor(t)) * kDaysPerYear;
    return doy >= admission_doy_ && doy < admission_doy_ + pulse_days_;
  }

  double eval(double t, std::span<const std::int64_t>,
              std::span<const double> params,
              const RateContext& ctx) const override {
    double births = ctx.covariates->value(births_col_, t - delay_);
    double theta_c = cohort_.get(params);
    double r = (1.0 - theta_c) * births;
    if (in_pulse(t)) r += theta_c * births * kDaysPerYear / pulse_days_;
    return r;
  }

  void add_breakpoints(double t0, double t1, const RateContext& ctx,
                       std::vector<double>& out) const override {
    std::vector<double> shifted;
    ctx.covariates->breakpoints(t0 - delay_, t1 - delay_, shifted);
    for (double g : shifted) out.push_back(g + delay_);
    int y0 = int(std::floor(t0)), y1 = int(std::floor(t1));
    for (int y = y0; y <= y1; ++y) {
      double a = y + admission_doy_ / kDaysPerYear;
      double b = y + (admission_doy_ + pulse_days_) / kDaysPerYear;
      if (a > t0 && a < t1) out.push_back(a);
      if (b > t0 && b < t1) out.push_back(b);
    }
  }

  double integrate_piece(double a, double b,
                         std::span<const std::int64_t>,
                         std::span<const double> params,
                         const RateContext& ctx) const override {
    double theta_c = cohort_.get(params);
    double base = ctx.covariates->integrate(births_col_, a - delay_, b - delay_);
    double factor = 1.0 - theta_c;
    if (in_pulse(0.5 * (a + b)))
      factor += theta_c * kDaysPerYear / pulse_days_;
    return factor * base;
  }

 private:
  int births_col_;
  double delay_;
  Coef cohort_;
  double admission_doy_;
  double pulse_days_;
};

}  // namespace

RateExprPtr rate_constant(Coef value) {
  return std::make_shared<ConstantExpr>(value);
}
RateExprPtr rate_covariate(int column) {
  return std::make_shared<CovariateExpr>(column);
}
RateExprPtr rate_product(std::vector<RateExprPtr> factors) {
  return std::make_shared<ProductExpr>(std::move(factors));
}
RateExprPtr rate_power(RateExprPtr base, Coef exponent) {
  return std::make_shared<PowerExpr>(std::move(base), exponent);
}
RateExprPtr rate_count(VertexId v) { return std::make_shared<CountExpr>(v); }
RateExprPtr rate_force_of_infection(std::vector<Coef> beta_factors, Coef theta_a,
                                    Coef iota, Coef alpha, VertexId infectious,
                                    int population_column) {
  return std::make_shared<ForceOfInfectionExpr>(std::move(beta_factors), theta_a,
                                                iota, alpha, infectious,
                                                population_column);
}
RateExprPtr rate_recruitment(int births_column, double delay_years,
                             Coef cohort_fraction, double admission_doy,
                             double pulse_days) {
  return std::make_shared<RecruitmentExpr>(births_column, delay_years,
                                           cohort_fraction, admission_doy,
                                           pulse_days);
}

double RateSpec::eval(ArrowId a, double t, std::span<const std::int64_t> counts,
                      std::span<const double> params) const {
  const auto& e = exprs_[std::size_t(a)];
  if (!e) throw RateEvalError("no rate bound to arrow " + std::to_string(a));
  double r = e->eval(t, counts, params, ctx_);
  if (!(r >= 0.0) || !std::isfinite(r))
    throw RateEvalError("rate evaluated to invalid value");
  return r;
}

double RateSpec::integrate(ArrowId a, double t, double h,
                           std::span<const std::int64_t> counts,
                           std::span<const double> params) const {
  if (h < 0.0) throw RateEvalError("negative step");
  if (h == 0.0) return 0.0;
  const auto& e = exprs_[std::size_t(a)];
  if (!e) throw RateEvalError("no rate bound to arrow " + std::to_string(a));
  std::vector<double> brk;
  e->add_breakpoints(t, t + h, ctx_, brk);
  brk.push_back(t);
  brk.push_back(t + h);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    double piece = e->integrate_piece(brk[i], brk[i + 1], counts, params, ctx_);
    if (!(piece >= 0.0) || !std::isfinite(piece))
      throw RateEvalError("rate integral evaluated to invalid value");
    acc += piece;
  }
  return acc;
}

}  // namespace dispersim
