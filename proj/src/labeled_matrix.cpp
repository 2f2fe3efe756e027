#include "dibets/labeled_matrix.hpp"

#include <algorithm>

#include <json.hpp>

#include "dibets/error.hpp"

namespace dibets {

double LabeledMatrix::at(std::string_view row, std::string_view column) const {
  auto r = std::find(rows.begin(), rows.end(), row);
  auto c = std::find(columns.begin(), columns.end(), column);
  if (r == rows.end() || c == columns.end()) return 0.0;
  return cells(r - rows.begin(), c - columns.begin());
}

bool LabeledMatrix::operator==(const LabeledMatrix& other) const {
  return rows == other.rows && columns == other.columns && cells.rows() == other.cells.rows() &&
         cells.cols() == other.cells.cols() && cells == other.cells;
}

std::string matrix_to_json(const LabeledMatrix& m, std::string_view column_key, bool binary) {
  nlohmann::ordered_json j;
  j["topics"] = m.rows;
  j[std::string(column_key)] = m.columns;
  auto cells = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < m.cells.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < m.cells.cols(); ++c) {
      if (binary) row.push_back(m.cells(r, c) != 0.0 ? 1 : 0);
      else row.push_back(m.cells(r, c));
    }
    cells.push_back(std::move(row));
  }
  j["cells"] = std::move(cells);
  return j.dump() + "\n";
}

LabeledMatrix matrix_from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::MalformedDocument, "matrix file is not a JSON object");
  LabeledMatrix m;
  try {
    m.rows = j.at("topics").get<std::vector<std::string>>();
    for (const char* key : {"third_parties", "terms", "columns"}) {
      if (j.contains(key)) {
        m.columns = j[key].get<std::vector<std::string>>();
        break;
      }
    }
    const auto& cells = j.at("cells");
    if (!cells.is_array() || cells.size() != m.rows.size()) throw Error(Errc::MalformedDocument, "cells/topics size");
    m.cells.resize(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(m.columns.size()));
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      if (!cells[r].is_array() || cells[r].size() != m.columns.size()) {
        throw Error(Errc::MalformedDocument, "row " + std::to_string(r) + " has the wrong width");
      }
      for (std::size_t c = 0; c < m.columns.size(); ++c) {
        m.cells(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r][c].get<double>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedDocument, std::string("matrix: ") + e.what());
  }
  return m;
}

}  // namespace dibets
