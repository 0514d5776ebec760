#ifndef DISPERSIM_MEASUREMENT_HPP
#define DISPERSIM_MEASUREMENT_HPP

#include <cstdint>

namespace dispersim {

// Case-report model: reported counts are discretized-normal around the
// accumulated true transitions C, mean rho*C and variance
// rho(1-rho)C + (psi rho C)^2. Cell y covers [y-1/2, y+1/2); the cell
// at y = 0 also absorbs everything below it.
struct MeasurementModel {
  double rho = 0.5;
  double psi = 0.1;

  double log_density(double y, double C) const;
};

double dmeasure(double y, double C, double rho, double psi);

// Phi((x-mean)/sd) with erfc tails.
double normal_cdf(double x, double mean, double sd);

}  // namespace dispersim

#endif
