#ifndef DISPERSIM_PARAMS_HPP
#define DISPERSIM_PARAMS_HPP

#include <string>
#include <vector>

#include "dispersim/rates.hpp"

namespace dispersim {

enum class Transform { Identity, Log, Logit, Simplex };

Transform transform_from_string(const std::string& s);
const char* to_string(Transform t);

// Named parameters with per-coordinate transforms onto the estimation
// scale. Simplex-tagged coordinates form one group mapped by log-ratios
// against the group's last member, whose estimation slot stays zero
// (perturbations must leave it alone).
struct ParamSet {
  ParamLayout layout;
  std::vector<double> values;            // natural scale
  std::vector<Transform> transforms;
  std::vector<std::vector<int>> simplex_groups;

  int add(const std::string& name, double value,
          Transform t = Transform::Identity);
  void set(const std::string& name, double value);
  double get(const std::string& name) const;

  std::vector<double> to_estimation_scale(const std::vector<double>& natural) const;
  std::vector<double> from_estimation_scale(const std::vector<double>& est) const;

  void validate() const;
};

}  // namespace dispersim

#endif
