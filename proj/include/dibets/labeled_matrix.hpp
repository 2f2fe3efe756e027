#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace dibets {

/// Row- and column-labelled dense matrix shared by the tracking matrix
/// (binary, columns are third parties) and the content matrix (tf-idf,
/// columns are terms).
struct LabeledMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> columns;
  Eigen::MatrixXd cells;

  double at(std::string_view row, std::string_view column) const;
  bool operator==(const LabeledMatrix& other) const;
};

/// {"topics": [...], "<column_key>": [...], "cells": [[...], ...]}. Binary
/// matrices are written with integer cells.
std::string matrix_to_json(const LabeledMatrix& m, std::string_view column_key, bool binary);

/// Accepts "third_parties" or "terms" (or "columns") as the column key.
LabeledMatrix matrix_from_json(std::string_view text);

}  // namespace dibets
