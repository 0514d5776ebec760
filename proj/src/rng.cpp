#include "dispersim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace dispersim {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void RngStream::reseed(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) w = splitmix64(x);
  // xoshiro must not start from the all-zero state
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;
}

RngStream make_stream(std::uint64_t master_seed, std::uint64_t a,
                      std::uint64_t b, std::uint64_t c) {
  std::uint64_t x = master_seed;
  std::uint64_t h = splitmix64(x);
  x = h ^ (a * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL);
  h = splitmix64(x);
  x = h ^ (b * 0xbf58476d1ce4e5b9ULL + 0x1ce4e5b9ULL);
  h = splitmix64(x);
  x = h ^ (c * 0x94d049bb133111ebULL + 0x133111ebULL);
  h = splitmix64(x);
  return RngStream(h);
}

double uniform01(RngStream& rng) {
  // 53-bit mantissa, strictly inside (0,1)
  double u = double(rng() >> 11) * 0x1.0p-53;
  if (u <= 0.0) u = 0x1.0p-53;
  return u;
}

double normal01(RngStream& rng) {
  // Marsaglia polar
  for (;;) {
    double u = 2.0 * uniform01(rng) - 1.0;
    double v = 2.0 * uniform01(rng) - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double gamma_draw(RngStream& rng, double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be > 0");
  if (shape < 1.0) {
    // boost: X = Gamma(shape+1) * U^(1/shape)
    double g = gamma_draw(rng, shape + 1.0);
    double u = uniform01(rng);
    return g * std::exp(std::log(u) / shape);
  }
  // Marsaglia-Tsang squeeze
  const double d = shape - 1.0 / 3.0;
  const double cc = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal01(rng);
      v = 1.0 + cc * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = uniform01(rng);
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_draw(RngStream& rng, double a, double b) {
  double ga = gamma_draw(rng, a);
  double gb = gamma_draw(rng, b);
  double s = ga + gb;
  if (s <= 0.0) return 0.0;  // both underflowed; mass was ~e^(-1/a) small
  return ga / s;
}

std::int64_t poisson_draw(RngStream& rng, double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean > 1e12) throw std::overflow_error("poisson mean too large");
  std::poisson_distribution<std::int64_t> d(mean);
  return d(rng);
}

std::int64_t binomial_draw(RngStream& rng, std::int64_t n, double p) {
  if (n < 0) throw std::invalid_argument("binomial n must be >= 0");
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::binomial_distribution<std::int64_t> d(n, p);
  return d(rng);
}

std::int64_t neg_binomial_draw(RngStream& rng, double successes, double p0) {
  // Gamma-Poisson mixture; exact for real-valued `successes`.
  if (!(successes > 0.0)) return 0;
  if (p0 >= 1.0) return 0;
  if (p0 <= 0.0) throw std::invalid_argument("neg binomial needs p0 > 0");
  double lambda = gamma_draw(rng, successes) * (1.0 - p0) / p0;
  return poisson_draw(rng, lambda);
}

void dirichlet_draw(RngStream& rng, std::span<const double> alpha,
                    std::span<double> out) {
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    double g = alpha[i] > 0.0 ? gamma_draw(rng, alpha[i]) : 0.0;
    out[i] = g;
    sum += g;
  }
  if (sum <= 0.0) {
    // all components underflowed; put the mass on the largest alpha
    std::size_t imax = 0;
    for (std::size_t i = 1; i < alpha.size(); ++i)
      if (alpha[i] > alpha[imax]) imax = i;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (i == imax) ? 1.0 : 0.0;
    return;
  }
  for (auto& x : out) x /= sum;
}

void multinomial_draw(RngStream& rng, std::int64_t n,
                      std::span<const double> probs, std::span<std::int64_t> out) {
  double rem_p = 0.0;
  for (double p : probs) rem_p += p;
  std::int64_t rem_n = n;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (i + 1 == probs.size()) {
      // last cell absorbs the remainder so the draw always sums to n
      out[i] = rem_n;
      break;
    }
    if (rem_n <= 0 || rem_p <= 0.0) {
      out[i] = 0;
      continue;
    }
    double cond = probs[i] / rem_p;
    if (cond > 1.0) cond = 1.0;
    std::int64_t k = binomial_draw(rng, rem_n, cond);
    out[i] = k;
    rem_n -= k;
    rem_p = std::max(rem_p - probs[i], 0.0);
  }
}

}  // namespace dispersim
