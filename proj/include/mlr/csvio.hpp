#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

namespace mlr::csv {

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

/// Quotes a field per RFC 4180 when it contains a comma, quote or newline.
std::string escape_field(const std::string& field);

/// Writes header + rows with CRLF line endings.
void write_table(std::ostream& os, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);
void write_matrix(std::ostream& os, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& rows);
void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  Eigen::MatrixXd numeric() const;
  Eigen::VectorXd numeric_column(const std::string& name) const;
};

Table read_table(std::istream& is);
Table read_table(const std::string& path);

}  // namespace mlr::csv
