#ifndef DISPERSIM_TESTS_QUAD_ORACLES_HPP
#define DISPERSIM_TESTS_QUAD_ORACLES_HPP

// Test-side brute-force oracles: single-step pmfs of the mixed
// (beta/Dirichlet-compounded) laws evaluated by numerical quadrature,
// kept independent of the library's closed-form transition rates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace quad_oracles {

inline double simpson_rec(const std::function<double(double)>& f, double a,
                          double b, double fa, double fb, double fm, double eps,
                          int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
         simpson_rec(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

inline double integrate01(const std::function<double(double)>& f,
                          double eps = 1e-13) {
  return simpson_rec(f, 0.0, 1.0, f(0.0), f(1.0), f(0.5), eps, 52);
}

// integral of y^(a-1) (1-y)^(b-1) over (0,1) by quadrature; a may be
// tiny (the singular mass is absorbed by the substitution y = u^(1/a)),
// b must be >= 1.
inline double beta_integral_quad(double a, double b) {
  if (!(b >= 0.5)) throw std::invalid_argument("oracle needs b >= 0.5");
  if (a >= 1.0) {
    return integrate01([&](double y) {
      if (y <= 0.0 || y >= 1.0) {
        if (y <= 0.0) return a > 1.0 ? 0.0 : (a == 1.0 ? std::pow(1.0, b - 1.0) : 0.0);
        return b > 1.0 ? 0.0 : 1.0;
      }
      return std::pow(y, a - 1.0) * std::pow(1.0 - y, b - 1.0);
    });
  }
  // y = u^(1/a): integral = (1/a) * int (1 - u^(1/a))^(b-1) du
  return (1.0 / a) * integrate01([&](double u) {
           if (u <= 0.0) return 1.0;
           if (u >= 1.0) return 0.0;
           double y = std::exp(std::log(u) / a);
           return std::pow(1.0 - y, b - 1.0);
         });
}

inline double lchoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// P(increment = k) for the beta-binomial single-arrow law with mixing
// Beta(c*pi, c*(1-pi)), k >= 1.
inline double beta_binomial_pmf(std::int64_t x, std::int64_t k, double c,
                                double pi) {
  double a = c * pi, b = c * (1.0 - pi);
  double norm = beta_integral_quad(a, b);
  double num = beta_integral_quad(double(k) + a, double(x - k) + b);
  return std::exp(lchoose(double(x), double(k))) * num / norm;
}

// P(increment = k) for the beta-negative-binomial single-arrow law.
inline double beta_negbinomial_pmf(std::int64_t x, std::int64_t k, double c,
                                   double pi) {
  double a = c * pi, b = c * (1.0 - pi);
  double norm = beta_integral_quad(a, b);
  double num = beta_integral_quad(double(k) + a, double(x) + b);
  return std::exp(lchoose(double(x + k - 1), double(k))) * num / norm;
}

// Joint P({k_i}) for the shared-beta bounded law, any
// pattern with sum k >= 1.
inline double shared_beta_bounded_pmf(const std::vector<std::int64_t>& xs,
                                      const std::vector<std::int64_t>& ks,
                                      double c, double pi) {
  double a = c * pi, b = c * (1.0 - pi);
  double sk = 0, sx = 0, lc = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sk += double(ks[i]);
    sx += double(xs[i]);
    lc += lchoose(double(xs[i]), double(ks[i]));
  }
  double norm = beta_integral_quad(a, b);
  double num = beta_integral_quad(sk + a, sx - sk + b);
  return std::exp(lc) * num / norm;
}

// Joint P({k_i}) for the shared-beta unbounded law.
inline double shared_beta_unbounded_pmf(const std::vector<std::int64_t>& xs,
                                        const std::vector<std::int64_t>& ks,
                                        double c, double pi) {
  double a = c * pi, b = c * (1.0 - pi);
  double sk = 0, sx = 0, lc = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sk += double(ks[i]);
    sx += double(xs[i]);
    lc += lchoose(double(xs[i]) + double(ks[i]) - 1.0, double(ks[i]));
  }
  double norm = beta_integral_quad(a, b);
  double num = beta_integral_quad(sk + a, sx + b);
  return std::exp(lc) * num / norm;
}

// P(k on one arrow, 0 on the other) for a two-arrow Dirichlet-
// multinomial star: Dir(alpha_i, alpha_j, alpha_0) mixing with the
// pattern's arrow carrying alpha_i. Uses the s = y_i + y_0, w = y_i/s
// factorization so each 1-d integral is quadrature-friendly.
inline double dirichlet_multinomial_single_pmf(std::int64_t x, std::int64_t k,
                                               double alpha_i, double alpha_j,
                                               double alpha0) {
  double c = alpha_i + alpha_j + alpha0;
  double log_norm = std::lgamma(alpha_i) + std::lgamma(alpha_j) +
                    std::lgamma(alpha0) - std::lgamma(c);
  double qs = beta_integral_quad(alpha_j, double(x) + alpha_i + alpha0);
  double qw = beta_integral_quad(double(k) + alpha_i, double(x - k) + alpha0);
  return std::exp(lchoose(double(x), double(k)) - log_norm) * qs * qw;
}

// P(k on one arrow, 0 on the other) for a two-arrow Dirichlet-negative-
// multinomial star with head count x.
inline double dirichlet_negmultinomial_single_pmf(std::int64_t x, std::int64_t k,
                                                  double alpha_i, double alpha_j,
                                                  double alpha0) {
  double c = alpha_i + alpha_j + alpha0;
  double log_norm = std::lgamma(alpha_i) + std::lgamma(alpha_j) +
                    std::lgamma(alpha0) - std::lgamma(c);
  double lpref = std::lgamma(double(x + k)) - std::lgamma(double(x)) -
                 std::lgamma(double(k) + 1.0);
  double qs = beta_integral_quad(alpha_j, double(x + k) + alpha_i + alpha0);
  double qw = beta_integral_quad(double(k) + alpha_i, double(x) + alpha0);
  return std::exp(lpref - log_norm) * qs * qw;
}

}  // namespace quad_oracles

#endif
