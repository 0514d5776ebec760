#ifndef DISPERSIM_CSV_HPP
#define DISPERSIM_CSV_HPP

#include <string>
#include <vector>

namespace dispersim {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // numeric cells, row-major

  int column(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace dispersim

#endif
