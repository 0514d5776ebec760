#ifndef DISPERSIM_FORCING_HPP
#define DISPERSIM_FORCING_HPP

#include <string>
#include <vector>

namespace dispersim {

constexpr double kDaysPerYear = 365.25;

// School-term calendar: day-of-year intervals [start, end) flagged as
// term time, applied to every model year. Model time is in years.
struct TermCalendar {
  struct Interval {
    double start_doy;
    double end_doy;  // exclusive
  };
  std::vector<Interval> intervals;

  bool is_term(double t_years) const;
  double term_fraction() const;  // fraction of the 365.25-day year in term
  // Term edges strictly inside (t0, t1), in years.
  void breakpoints(double t0, double t1, std::vector<double>& out) const;

  static TermCalendar from_json_file(const std::string& path);
  // England-style default with term fraction matching p = 0.7589.
  static TermCalendar default_england();
};

// Two-level transmission multiplier around the mean rate:
//   (1 + 2(1-p) theta_a) in term, (1 - 2 p theta_a) in vacation,
// so the year average is 1 when the calendar's term fraction equals p.
struct SeasonalForcing {
  TermCalendar calendar;
  double p = 0.7589;

  // Multiplier on beta_bar; vacation factor floored at zero.
  double factor(double t_years, double theta_a) const;
  static void validate_theta_a(double theta_a, double p);
};

}  // namespace dispersim

#endif
