#include "ssq/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssq {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

double parse_field(const std::string& field, int line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &used);
  } catch (const std::exception&) {
    throw ParseError("cannot parse numeric field '" + field + "'", line);
  }
  if (used != field.size()) {
    throw ParseError("trailing characters in numeric field '" + field + "'", line);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + field + "'", line);
  }
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  validate_dataset(data);
  std::ofstream out = open_out(path);
  out << "y";
  for (Eigen::Index k = 0; k < data.q(); ++k) {
    out << ",z_" << k;
  }
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    out << ",x_" << j;
  }
  out << "\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << format_double(data.y(i));
    for (Eigen::Index k = 0; k < data.q(); ++k) {
      out << "," << format_double(data.Z(i, k + 1));
    }
    for (Eigen::Index j = 0; j < data.p(); ++j) {
      out << "," << format_double(data.X(i, j));
    }
    out << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("empty file", 1);
  }
  const auto header = split_line(line);
  if (header.empty() || header[0] != "y") {
    throw ParseError("header must start with 'y'", 1);
  }
  std::size_t pos = 1;
  Eigen::Index q = 0;
  while (pos < header.size() && header[pos] == "z_" + std::to_string(q)) {
    ++pos;
    ++q;
  }
  Eigen::Index p = 0;
  while (pos < header.size() && header[pos] == "x_" + std::to_string(p)) {
    ++pos;
    ++p;
  }
  if (pos != header.size() || p == 0) {
    throw ParseError("header must list z_0..z_{q-1} then x_0..x_{p-1} with p >= 1", 1);
  }

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> row(fields.size());
    for (std::size_t f = 0; f < fields.size(); ++f) {
      row[f] = parse_field(fields[f], line_no);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) {
    throw ParseError("need at least 2 data rows", line_no);
  }

  Dataset data;
  const auto n = static_cast<Eigen::Index>(rows.size());
  data.y.resize(n);
  data.Z.resize(n, q + 1);
  data.Z.col(0).setOnes();
  data.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y(i) = rows[i][0];
    for (Eigen::Index k = 0; k < q; ++k) {
      data.Z(i, k + 1) = rows[i][1 + k];
    }
    for (Eigen::Index j = 0; j < p; ++j) {
      data.X(i, j) = rows[i][1 + q + j];
    }
  }
  return data;
}

void write_truth_csv(const std::string& path, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& beta) {
  std::ofstream out = open_out(path);
  out << "param,index,value\n";
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    out << "alpha," << k << "," << format_double(alpha(k)) << "\n";
  }
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    out << "beta," << j << "," << format_double(beta(j)) << "\n";
  }
}

void write_beta_csv(const std::string& path, const Eigen::VectorXd& beta,
                    const Eigen::VectorXd& eta) {
  std::ofstream out = open_out(path);
  out << "index,value,eta\n";
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    out << j << "," << format_double(beta(j)) << ","
        << format_double(j < eta.size() ? eta(j) : 0.0) << "\n";
  }
}

void write_alpha_csv(const std::string& path, const Eigen::VectorXd& alpha) {
  std::ofstream out = open_out(path);
  out << "index,value\n";
  for (Eigen::Index k = 0; k < alpha.size(); ++k) {
    out << k << "," << format_double(alpha(k)) << "\n";
  }
}

void write_path_csv(const std::string& path, const std::vector<double>& grid_values,
                    const Eigen::MatrixXd& coefficients) {
  if (static_cast<Eigen::Index>(grid_values.size()) != coefficients.rows()) {
    throw std::invalid_argument("path grid and coefficient rows disagree");
  }
  std::ofstream out = open_out(path);
  out << "grid_value,index,value\n";
  for (Eigen::Index g = 0; g < coefficients.rows(); ++g) {
    for (Eigen::Index j = 0; j < coefficients.cols(); ++j) {
      out << format_double(grid_values[g]) << "," << j << ","
          << format_double(coefficients(g, j)) << "\n";
    }
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out = open_out(path);
  out << content;
}

}  // namespace ssq
