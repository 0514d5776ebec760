#include "dispersim/forcing.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace dispersim {

bool TermCalendar::is_term(double t_years) const {
  double doy = (t_years - std::floor(t_years)) * kDaysPerYear;
  for (const auto& iv : intervals)
    if (doy >= iv.start_doy && doy < iv.end_doy) return true;
  return false;
}

double TermCalendar::term_fraction() const {
  double days = 0.0;
  for (const auto& iv : intervals) days += iv.end_doy - iv.start_doy;
  return days / kDaysPerYear;
}

void TermCalendar::breakpoints(double t0, double t1,
                               std::vector<double>& out) const {
  int y0 = int(std::floor(t0));
  int y1 = int(std::floor(t1));
  for (int y = y0; y <= y1; ++y) {
    for (const auto& iv : intervals) {
      double a = y + iv.start_doy / kDaysPerYear;
      double b = y + iv.end_doy / kDaysPerYear;
      if (a > t0 && a < t1) out.push_back(a);
      if (b > t0 && b < t1) out.push_back(b);
    }
  }
}

TermCalendar TermCalendar::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open term calendar: " + path);
  nlohmann::json j;
  in >> j;
  TermCalendar cal;
  for (const auto& e : j) {
    double a = e.at("start_doy").get<double>();
    double b = e.at("end_doy").get<double>();
    if (!(b > a) || a < 0 || b > kDaysPerYear + 1)
      throw std::runtime_error("bad term interval in " + path);
    cal.intervals.push_back({a, b});
  }
  if (cal.intervals.empty())
    throw std::runtime_error("term calendar has no intervals: " + path);
  return cal;
}

TermCalendar TermCalendar::default_england() {
  // 277 term days out of 365 gives term fraction 0.7589.
  TermCalendar cal;
  cal.intervals = {{7, 101}, {115, 200}, {252, 301}, {308, 357}};
  return cal;
}

double SeasonalForcing::factor(double t_years, double theta_a) const {
  if (calendar.is_term(t_years)) return 1.0 + 2.0 * (1.0 - p) * theta_a;
  double f = 1.0 - 2.0 * p * theta_a;
  return f > 0.0 ? f : 0.0;
}

void SeasonalForcing::validate_theta_a(double theta_a, double p) {
  if (theta_a < 0.0) throw std::invalid_argument("theta_a must be >= 0");
  if (1.0 - 2.0 * p * theta_a <= 0.0)
    throw std::invalid_argument("theta_a too large: vacation rate nonpositive");
}

}  // namespace dispersim
