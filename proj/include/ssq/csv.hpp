#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssq/data.hpp"

namespace ssq {

// File-format violation; `line` is 1-based and already part of the message.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line_)
      : std::runtime_error(what + " (line " + std::to_string(line_) + ")"), line(line_) {}
  int line;
};

// 17 significant digits, enough to round trip a double exactly.
std::string format_double(double value);

// Dataset files carry the header y,z_0,..,z_{q-1},x_0,..,x_{p-1}; the
// intercept column of Z is implicit and never serialized.
void write_dataset_csv(const std::string& path, const Dataset& data);

// Rejects a malformed header, ragged rows, unparseable or non-finite fields;
// ParseError carries the offending line.
Dataset read_dataset_csv(const std::string& path);

// param,index,value with rows for every alpha (intercept index 0) and beta.
void write_truth_csv(const std::string& path, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& beta);

void write_beta_csv(const std::string& path, const Eigen::VectorXd& beta,
                    const Eigen::VectorXd& eta);
void write_alpha_csv(const std::string& path, const Eigen::VectorXd& alpha);

// grid_value,index,value in grid-major order, every coefficient.
void write_path_csv(const std::string& path, const std::vector<double>& grid_values,
                    const Eigen::MatrixXd& coefficients);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ssq
