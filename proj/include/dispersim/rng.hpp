#ifndef DISPERSIM_RNG_HPP
#define DISPERSIM_RNG_HPP

#include <cstdint>
#include <span>
#include <vector>

namespace dispersim {

// xoshiro256** generator. Small state so that millions of short-lived
// streams (one per particle per observation interval) can be created
// cheaply from a master seed.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }

  result_type operator()() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Documented stream-split function: streams are keyed by the master seed
// and up to three integer labels (e.g. purpose, time index, particle
// index). Any run is reproducible under any thread count because work
// items own their stream keys, not a shared generator.
RngStream make_stream(std::uint64_t master_seed, std::uint64_t a,
                      std::uint64_t b = 0, std::uint64_t c = 0);

// Stream purposes used across the engines; values are part of the
// reproducibility contract.
enum class StreamPurpose : std::uint64_t {
  Simulate = 1,
  Dispersion = 2,
  Filter = 3,
  Resample = 4,
  Perturb = 5,
  Synthesize = 6,
};

double uniform01(RngStream& rng);       // in (0,1)
double normal01(RngStream& rng);        // standard normal, polar method
double gamma_draw(RngStream& rng, double shape);  // unit scale
double beta_draw(RngStream& rng, double a, double b);
std::int64_t poisson_draw(RngStream& rng, double mean);
std::int64_t binomial_draw(RngStream& rng, std::int64_t n, double p);

// Failures before `successes`-th success, success probability p0.
std::int64_t neg_binomial_draw(RngStream& rng, double successes, double p0);

// Dirichlet via normalized gammas; alphas below ~1 use the Gamma(a+1),
// U^(1/a) boost so that c*pi ~ c*r*h does not underflow the MT2000
// rejection sampler.
void dirichlet_draw(RngStream& rng, std::span<const double> alpha,
                    std::span<double> out);

// Sequential conditional binomials; out.size() == probs.size(), sums to n.
void multinomial_draw(RngStream& rng, std::int64_t n,
                      std::span<const double> probs, std::span<std::int64_t> out);

}  // namespace dispersim

#endif
