#include "dispersim/params.hpp"

#include <cmath>
#include <stdexcept>

namespace dispersim {

namespace {
constexpr double kLogitEps = 1e-13;
}

Transform transform_from_string(const std::string& s) {
  if (s == "identity") return Transform::Identity;
  if (s == "log") return Transform::Log;
  if (s == "logit") return Transform::Logit;
  if (s == "simplex") return Transform::Simplex;
  throw std::runtime_error("unknown transform: " + s);
}

const char* to_string(Transform t) {
  switch (t) {
    case Transform::Identity: return "identity";
    case Transform::Log: return "log";
    case Transform::Logit: return "logit";
    case Transform::Simplex: return "simplex";
  }
  return "?";
}

int ParamSet::add(const std::string& name, double value, Transform t) {
  if (layout.find(name) >= 0) throw std::runtime_error("duplicate parameter: " + name);
  int i = layout.add(name);
  values.push_back(value);
  transforms.push_back(t);
  return i;
}

void ParamSet::set(const std::string& name, double value) {
  values[std::size_t(layout.index(name))] = value;
}

double ParamSet::get(const std::string& name) const {
  return values[std::size_t(layout.index(name))];
}

void ParamSet::validate() const {
  if (values.size() != transforms.size() ||
      values.size() != layout.names.size())
    throw std::runtime_error("param set arrays out of sync");
  std::vector<bool> in_simplex(values.size(), false);
  for (const auto& grp : simplex_groups) {
    if (grp.size() < 2)
      throw std::runtime_error("simplex group needs >= 2 members");
    double sum = 0.0;
    for (int i : grp) {
      if (transforms[std::size_t(i)] != Transform::Simplex)
        throw std::runtime_error("simplex group member lacks simplex tag");
      if (in_simplex[std::size_t(i)])
        throw std::runtime_error("parameter in two simplex groups");
      in_simplex[std::size_t(i)] = true;
      if (values[std::size_t(i)] < 0.0)
        throw std::runtime_error("simplex parameter must be nonnegative");
      sum += values[std::size_t(i)];
    }
    if (std::fabs(sum - 1.0) > 1e-6)
      throw std::runtime_error("simplex group must sum to 1");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (transforms[i] == Transform::Simplex && !in_simplex[i])
      throw std::runtime_error("simplex-tagged parameter outside any group");
    if (transforms[i] == Transform::Log && !(values[i] > 0.0))
      throw std::runtime_error("log-transformed parameter must be positive: " +
                               layout.names[i]);
    if (transforms[i] == Transform::Logit &&
        (values[i] < 0.0 || values[i] > 1.0))
      throw std::runtime_error("logit-transformed parameter outside [0,1]: " +
                               layout.names[i]);
  }
}

std::vector<double> ParamSet::to_estimation_scale(
    const std::vector<double>& natural) const {
  std::vector<double> est(natural.size());
  for (std::size_t i = 0; i < natural.size(); ++i) {
    switch (transforms[i]) {
      case Transform::Identity:
        est[i] = natural[i];
        break;
      case Transform::Log:
        est[i] = std::log(std::max(natural[i], 1e-300));
        break;
      case Transform::Logit: {
        double p = std::min(std::max(natural[i], kLogitEps), 1.0 - kLogitEps);
        est[i] = std::log(p / (1.0 - p));
        break;
      }
      case Transform::Simplex:
        est[i] = 0.0;  // filled below
        break;
    }
  }
  for (const auto& grp : simplex_groups) {
    int last = grp.back();
    double ref = std::max(natural[std::size_t(last)], 1e-300);
    for (std::size_t k = 0; k + 1 < grp.size(); ++k) {
      int i = grp[k];
      est[std::size_t(i)] =
          std::log(std::max(natural[std::size_t(i)], 1e-300) / ref);
    }
    est[std::size_t(last)] = 0.0;
  }
  return est;
}

std::vector<double> ParamSet::from_estimation_scale(
    const std::vector<double>& est) const {
  std::vector<double> natural(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    switch (transforms[i]) {
      case Transform::Identity:
        natural[i] = est[i];
        break;
      case Transform::Log:
        natural[i] = std::exp(est[i]);
        break;
      case Transform::Logit:
        natural[i] = 1.0 / (1.0 + std::exp(-est[i]));
        break;
      case Transform::Simplex:
        natural[i] = 0.0;  // filled below
        break;
    }
  }
  for (const auto& grp : simplex_groups) {
    double denom = 0.0;
    for (std::size_t k = 0; k < grp.size(); ++k) {
      double e = (k + 1 < grp.size()) ? est[std::size_t(grp[k])] : 0.0;
      denom += std::exp(e);
    }
    for (std::size_t k = 0; k < grp.size(); ++k) {
      double e = (k + 1 < grp.size()) ? est[std::size_t(grp[k])] : 0.0;
      natural[std::size_t(grp[k])] = std::exp(e) / denom;
    }
  }
  return natural;
}

}  // namespace dispersim
