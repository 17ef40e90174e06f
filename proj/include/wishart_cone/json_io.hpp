#pragma once

// Matrices as JSON arrays of rows, row-major, full square.

#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "wishart_cone/errors.hpp"
#include "wishart_cone/psd_core.hpp"

namespace wishart_cone {

inline nlohmann::json matrix_to_json(const SymMatrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < a.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < a.dim(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Parses rows and applies the SymMatrix symmetrization rule. Shape and
/// symmetry failures are reported as ParseError naming the field.
inline SymMatrix matrix_from_json(const nlohmann::json& j, const std::string& field = "scale") {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, "field '" + field + "': " + msg);
  };
  if (!j.is_array() || j.empty()) fail("expected a non-empty array of rows");
  const auto d = static_cast<Index>(j.size());
  Eigen::MatrixXd m(d, d);
  for (Index i = 0; i < d; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array()) fail("row " + std::to_string(i) + " is not an array");
    if (static_cast<Index>(row.size()) != d) {
      fail("row " + std::to_string(i) + " has " + std::to_string(row.size()) + " entries, expected " +
           std::to_string(d) + " (matrix must be square)");
    }
    for (Index k = 0; k < d; ++k) {
      const auto& e = row[static_cast<std::size_t>(k)];
      if (!e.is_number()) fail("entry [" + std::to_string(i) + "][" + std::to_string(k) + "] is not a number");
      m(i, k) = e.get<double>();
    }
  }
  try {
    return SymMatrix(m);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotSymmetric || e.code() == ErrorCode::NonFinite) fail(e.what());
    throw;
  }
}

}  // namespace wishart_cone
