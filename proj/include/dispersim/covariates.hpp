#ifndef DISPERSIM_COVARIATES_HPP
#define DISPERSIM_COVARIATES_HPP

#include <string>
#include <vector>

namespace dispersim {

enum class Interp { Linear, Step };

// Time-indexed forcing data (births, population, ...). Evaluation is
// defined only inside the grid range; callers asking outside get an
// exception rather than silent extrapolation.
class CovariateTable {
 public:
  CovariateTable() = default;
  CovariateTable(std::vector<double> grid, std::vector<std::string> names,
                 std::vector<std::vector<double>> columns,
                 std::vector<Interp> interp);

  static CovariateTable from_csv(const std::string& path,
                                 const std::vector<std::pair<std::string, Interp>>& interp_overrides = {});

  bool empty() const { return grid_.empty(); }
  int column(const std::string& name) const;  // throws if unknown
  double t_min() const { return grid_.front(); }
  double t_max() const { return grid_.back(); }

  double value(int col, double t) const;
  // Exact integral of the interpolant over [t0, t1].
  double integrate(int col, double t0, double t1) const;
  // Grid times strictly inside (t0, t1); used to split integration pieces.
  void breakpoints(double t0, double t1, std::vector<double>& out) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  int segment(double t) const;  // index i with grid[i] <= t <= grid[i+1]
  std::vector<double> grid_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::vector<Interp> interp_;
};

}  // namespace dispersim

#endif
