#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "../algebra/matrix.hpp"
#include "../algebra/parse.hpp"

#ifndef P5ISO_DATA_DIR
#define P5ISO_DATA_DIR "data"
#endif

namespace p5iso {

// Reference expressions typed in once and shared by tests, the CLI and the
// acceptance suite.
inline const nlohmann::json& golden(const std::string& path = std::string(P5ISO_DATA_DIR) + "/golden_v1.json") {
  static const nlohmann::json doc = [&] {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open golden data file " + path);
    return nlohmann::json::parse(in);
  }();
  return doc;
}

inline const nlohmann::json& golden_display(const std::string& key) { return golden().at("displays").at(key); }
inline const nlohmann::json& golden_derived(const std::string& key) { return golden().at("derived").at(key); }

inline RationalFunction golden_expr(const nlohmann::json& node, const std::string& field = "expr") {
  return parse_rational_function(node.at(field).get<std::string>());
}

inline Matrix<RationalFunction> golden_matrix(const nlohmann::json& node) {
  const auto& rows = node.at("rows");
  Matrix<RationalFunction> m(rows.size(), rows.at(0).size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = parse_rational_function(rows[i][j].get<std::string>());
  return m;
}

}  // namespace p5iso
