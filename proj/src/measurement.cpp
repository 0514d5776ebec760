#include "dispersim/measurement.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dispersim {

namespace {

constexpr double kVarFloor = 1e-8;

// log of the standard-normal upper tail Q(z); asymptotic expansion once
// erfc underflows so distant observations keep a finite log-density and
// the filter can still rank particles.
double log_normal_tail(double z) {
  if (z < 34.0) {
    double q = 0.5 * std::erfc(z / std::sqrt(2.0));
    if (q > 0.0) return std::log(q);
  }
  return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * M_PI) +
         std::log1p(-1.0 / (z * z));
}

// log(Q(a) - Q(b)) for a < b in the far upper tail
double log_tail_mass(double a, double b) {
  double la = log_normal_tail(a);
  double lb = log_normal_tail(b);
  return la + std::log1p(-std::exp(lb - la));
}

}  // namespace

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

double dmeasure(double y, double C, double rho, double psi) {
  if (!(rho > 0.0) || !(rho < 1.0))
    throw std::invalid_argument("reporting rate must be in (0,1)");
  if (psi < 0.0) throw std::invalid_argument("psi must be >= 0");
  if (y < 0.0 || C < 0.0) return -std::numeric_limits<double>::infinity();
  double mean = rho * C;
  double var = rho * (1.0 - rho) * C + (psi * mean) * (psi * mean);
  if (var < kVarFloor) var = kVarFloor;
  double sd = std::sqrt(var);
  double z_hi = (y + 0.5 - mean) / sd;
  double z_lo = (y - 0.5 - mean) / sd;

  if (y < 0.5) {
    // the cell at zero absorbs everything below it
    if (z_hi < -8.0) return log_normal_tail(-z_hi);
    double mass = normal_cdf(y + 0.5, mean, sd);
    return mass > 0.0 ? std::log(mass)
                      : -std::numeric_limits<double>::infinity();
  }
  if (z_lo > 8.0) return log_tail_mass(z_lo, z_hi);
  if (z_hi < -8.0) return log_tail_mass(-z_hi, -z_lo);
  double mass = normal_cdf(y + 0.5, mean, sd) - normal_cdf(y - 0.5, mean, sd);
  return mass > 0.0 ? std::log(mass)
                    : -std::numeric_limits<double>::infinity();
}

double MeasurementModel::log_density(double y, double C) const {
  return dmeasure(y, C, rho, psi);
}

}  // namespace dispersim
