#include "mlr/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mlr::csv {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string escape_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << escape_field(fields[i]);
  }
  os << "\r\n";
}

}  // namespace

void write_table(std::ostream& os, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  write_row(os, header);
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::invalid_argument("row width does not match header");
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (double v : row) fields.push_back(format_double(v));
    write_row(os, fields);
  }
}

void write_matrix(std::ostream& os, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& rows) {
  if (static_cast<Eigen::Index>(header.size()) != rows.cols())
    throw std::invalid_argument("header width does not match matrix");
  write_row(os, header);
  std::vector<std::string> fields(header.size());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) fields[c] = format_double(rows(r, c));
    write_row(os, fields);
  }
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_table(os, header, rows);
}

namespace {

std::vector<std::string> parse_line(std::istream& is, bool& eof) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  int c;
  while ((c = is.get()) != EOF) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          field += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        field += static_cast<char>(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c == '\r') {
      if (is.peek() == '\n') is.get();
      fields.push_back(field);
      return fields;
    } else if (c == '\n') {
      fields.push_back(field);
      return fields;
    } else {
      field += static_cast<char>(c);
    }
  }
  eof = true;
  if (any) fields.push_back(field);
  return fields;
}

}  // namespace

Table read_table(std::istream& is) {
  Table t;
  bool eof = false;
  t.header = parse_line(is, eof);
  if (t.header.empty()) throw std::runtime_error("CSV missing header row");
  while (!eof) {
    auto row = parse_line(is, eof);
    if (row.empty()) continue;
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != t.header.size()) throw std::runtime_error("ragged CSV row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_table(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_table(is);
}

int Table::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

Eigen::MatrixXd Table::numeric() const {
  Eigen::MatrixXd m(rows.size(), header.size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < header.size(); ++c) m(r, c) = std::stod(rows[r][c]);
  return m;
}

Eigen::VectorXd Table::numeric_column(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw std::runtime_error("missing CSV column: " + name);
  Eigen::VectorXd v(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) v[r] = std::stod(rows[r][c]);
  return v;
}

}  // namespace mlr::csv
