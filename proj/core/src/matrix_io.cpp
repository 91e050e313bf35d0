#include "leakscope/matrix_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "leakscope/errors.hpp"

namespace leakscope {

void write_matrix_csv(std::ostream& os, const JointDistribution& j) {
  os << "xy";
  for (Value y : j.domain().observables()) os << ',' << y;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t ix = 0; ix < j.nx(); ++ix) {
    os << j.domain().secrets()[ix];
    for (std::size_t iy = 0; iy < j.ny(); ++iy) os << ',' << j.pxy(ix, iy);
    os << '\n';
  }
}

void write_matrix_csv_file(const std::string& path,
                           const JointDistribution& j) {
  std::ofstream os(path);
  if (!os) throw AnalysisError("cannot open " + path + " for writing");
  write_matrix_csv(os, j);
}

JointDistribution read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw InvalidDistribution("empty matrix CSV");
  std::vector<Value> obs;
  {
    std::stringstream header(line);
    std::string cell;
    std::getline(header, cell, ',');  // corner label
    while (std::getline(header, cell, ',')) obs.push_back(std::stoll(cell));
  }
  std::vector<Value> secrets;
  std::vector<double> cells;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    secrets.push_back(std::stoll(cell));
    std::size_t got = 0;
    while (std::getline(row, cell, ',')) {
      cells.push_back(std::stod(cell));
      ++got;
    }
    if (got != obs.size())
      throw InvalidDistribution("ragged matrix CSV row");
  }
  return JointDistribution(ValueDomain(std::move(secrets), std::move(obs)),
                           std::move(cells));
}

JointDistribution read_matrix_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FixtureMissing("cannot open " + path);
  return read_matrix_csv(is);
}

}  // namespace leakscope
