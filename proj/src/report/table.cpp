#include "biaskit/report/table.hpp"

#include <fmt/format.h>

#include <cmath>

#include "biaskit/core/error.hpp"

namespace biaskit::report {

using json = nlohmann::json;

Cell number(double v) {
  if (!std::isfinite(v)) return std::monostate{};
  return v;
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size())
    throw InvalidInput(fmt::format("table {}: row has {} cells, expected {}", name, row.size(), columns.size()));
  for (auto& c : row)
    if (auto* d = std::get_if<double>(&c); d && !std::isfinite(*d)) c = std::monostate{};
  rows.push_back(std::move(row));
}

namespace {

json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return nullptr;
        else
          return v;
      },
      c);
}

Cell cell_from_json(const json& j) {
  if (j.is_null()) return std::monostate{};
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  throw FormatError("table cell must be null, string, number or boolean");
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

json to_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::array();
    for (const auto& c : r) row.push_back(cell_json(c));
    rows.push_back(std::move(row));
  }
  return {{"name", t.name}, {"artifact", t.artifact}, {"columns", t.columns}, {"rows", std::move(rows)}};
}

Table table_from_json(const json& j) {
  try {
    Table t;
    t.name = j.at("name").get<std::string>();
    t.artifact = j.at("artifact").get<std::string>();
    t.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      std::vector<Cell> row;
      for (const auto& c : r) row.push_back(cell_from_json(c));
      t.add_row(std::move(row));
    }
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed table: ") + e.what());
  }
}

std::string format_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>)
          return "";
        else if constexpr (std::is_same_v<T, std::string>)
          return v;
        else if constexpr (std::is_same_v<T, bool>)
          return v ? "true" : "false";
        else
          return fmt::format("{}", v);
      },
      c);
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + quote(t.columns[i]);
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + quote(format_cell(r[i]));
    out += "\n";
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw FormatError("csv: unterminated quoted field");
  if (any || !field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace biaskit::report
