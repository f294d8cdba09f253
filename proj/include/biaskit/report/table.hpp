#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace biaskit::report {

// Null renders as an empty CSV field and JSON null. Non-finite doubles are
// stored as null.
using Cell = std::variant<std::monostate, std::string, std::int64_t, double, bool>;

Cell number(double v);

struct Table {
  std::string name;      // file stem, e.g. fig2a_representation
  std::string artifact;  // index label
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
};

nlohmann::json to_json(const Table& t);
Table table_from_json(const nlohmann::json& j);

// RFC 4180: comma separated, CRLF-free, fields quoted when they contain a
// comma, quote or newline. Doubles use the shortest round-trip form.
std::string to_csv(const Table& t);
std::string format_cell(const Cell& c);

std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace biaskit::report
