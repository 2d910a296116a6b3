#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sqzom::cli {

using Cell = std::variant<double, std::string>;

struct Table {
  std::string name;  // file stem, e.g. "fig2d" or "fig2d_fit"
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

struct NumberFormat {
  int precision = 17;

  std::string text(double value) const;
  // Value rounded to `precision` significant digits, as a JSON number.
  nlohmann::json json(double value) const;
};

void write_csv(std::ostream& os, const Table& table, const NumberFormat& fmt);
nlohmann::json table_json(const Table& table, const NumberFormat& fmt);

struct PlotSpec {
  std::string title;
  std::string x_column;
  std::vector<std::string> y_columns;
  std::optional<std::string> group_column;  // long-format tables: one series per group
  bool log_x = false;
  bool log_y = false;
};

// Minimal line plot. Deterministic output for identical input.
std::string render_svg(const Table& table, const PlotSpec& spec);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace sqzom::cli
