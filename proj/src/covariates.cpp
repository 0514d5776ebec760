#include "dispersim/covariates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dispersim/csv.hpp"

namespace dispersim {

CovariateTable::CovariateTable(std::vector<double> grid,
                               std::vector<std::string> names,
                               std::vector<std::vector<double>> columns,
                               std::vector<Interp> interp)
    : grid_(std::move(grid)),
      names_(std::move(names)),
      columns_(std::move(columns)),
      interp_(std::move(interp)) {
  if (grid_.size() < 2) throw std::runtime_error("covariate grid needs >= 2 points");
  for (std::size_t i = 1; i < grid_.size(); ++i)
    if (!(grid_[i] > grid_[i - 1]))
      throw std::runtime_error("covariate grid must be strictly increasing");
  for (const auto& col : columns_)
    if (col.size() != grid_.size())
      throw std::runtime_error("covariate column length mismatch");
  if (names_.size() != columns_.size() || interp_.size() != columns_.size())
    throw std::runtime_error("covariate metadata mismatch");
}

CovariateTable CovariateTable::from_csv(
    const std::string& path,
    const std::vector<std::pair<std::string, Interp>>& interp_overrides) {
  CsvTable t = read_csv(path);
  int time_col = t.column("time");
  if (time_col < 0) throw std::runtime_error("covariate csv needs a 'time' column");
  std::vector<double> grid;
  grid.reserve(t.rows.size());
  for (const auto& r : t.rows) grid.push_back(r[time_col]);
  std::vector<std::string> names;
  std::vector<std::vector<double>> cols;
  std::vector<Interp> interp;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (int(c) == time_col) continue;
    names.push_back(t.header[c]);
    std::vector<double> col;
    col.reserve(t.rows.size());
    for (const auto& r : t.rows) col.push_back(r[c]);
    cols.push_back(std::move(col));
    Interp ip = Interp::Linear;
    for (const auto& [n, v] : interp_overrides)
      if (n == t.header[c]) ip = v;
    interp.push_back(ip);
  }
  return CovariateTable(std::move(grid), std::move(names), std::move(cols),
                        std::move(interp));
}

int CovariateTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return int(i);
  throw std::runtime_error("unknown covariate: " + name);
}

int CovariateTable::segment(double t) const {
  if (t < grid_.front() || t > grid_.back())
    throw std::out_of_range("time outside covariate grid");
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  int i = int(it - grid_.begin()) - 1;
  if (i < 0) i = 0;
  if (i >= int(grid_.size()) - 1) i = int(grid_.size()) - 2;
  return i;
}

double CovariateTable::value(int col, double t) const {
  int i = segment(t);
  const auto& y = columns_[col];
  if (interp_[col] == Interp::Step) return y[i];
  double w = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
  return y[i] + w * (y[i + 1] - y[i]);
}

double CovariateTable::integrate(int col, double t0, double t1) const {
  if (t1 < t0) throw std::invalid_argument("integrate: t1 < t0");
  if (t1 == t0) return 0.0;
  int i0 = segment(t0);
  int i1 = segment(t1);
  double acc = 0.0;
  for (int i = i0; i <= i1; ++i) {
    double a = std::max(t0, grid_[i]);
    double b = std::min(t1, grid_[i + 1]);
    if (b <= a) continue;
    const auto& y = columns_[col];
    if (interp_[col] == Interp::Step) {
      acc += y[i] * (b - a);
    } else {
      double seg = grid_[i + 1] - grid_[i];
      double ya = y[i] + (a - grid_[i]) / seg * (y[i + 1] - y[i]);
      double yb = y[i] + (b - grid_[i]) / seg * (y[i + 1] - y[i]);
      acc += 0.5 * (ya + yb) * (b - a);
    }
  }
  return acc;
}

void CovariateTable::breakpoints(double t0, double t1,
                                 std::vector<double>& out) const {
  for (double g : grid_)
    if (g > t0 && g < t1) out.push_back(g);
}

}  // namespace dispersim
