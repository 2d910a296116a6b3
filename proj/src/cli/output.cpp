#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "sqzom/error.hpp"

namespace sqzom::cli {

std::string NumberFormat::text(double value) const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value);
  return buf;
}

nlohmann::json NumberFormat::json(double value) const {
  if (!std::isfinite(value)) return nullptr;
  if (precision >= 17) return value;
  return std::strtod(text(value).c_str(), nullptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const Table& table, const NumberFormat& fmt) {
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << csv_field(table.header[i]);
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (const double* d = std::get_if<double>(&row[i])) {
        os << fmt.text(*d);
      } else {
        os << csv_field(std::get<std::string>(row[i]));
      }
    }
    os << '\n';
  }
}

nlohmann::json table_json(const Table& table, const NumberFormat& fmt) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (const double* d = std::get_if<double>(&row[i])) {
        obj[table.header[i]] = fmt.json(*d);
      } else {
        obj[table.header[i]] = std::get<std::string>(row[i]);
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 180.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw DomainError("plot column '" + name + "' not in table");
  return static_cast<std::size_t>(it - t.header.begin());
}

}  // namespace

std::string render_svg(const Table& table, const PlotSpec& spec) {
  const std::size_t xc = column(table, spec.x_column);
  std::vector<Series> series;
  for (const auto& yname : spec.y_columns) {
    const std::size_t yc = column(table, yname);
    std::map<std::string, std::size_t> index;
    for (const auto& row : table.rows) {
      const double* x = std::get_if<double>(&row[xc]);
      const double* y = std::get_if<double>(&row[yc]);
      if (!x || !y) continue;
      std::string label = yname;
      if (spec.group_column) {
        const Cell& g = row[column(table, *spec.group_column)];
        const std::string group = std::holds_alternative<std::string>(g) ? std::get<std::string>(g)
                                                                         : fmt_tick(std::get<double>(g));
        label = spec.y_columns.size() > 1 ? group + " " + yname : group;
      }
      auto [it, inserted] = index.try_emplace(label, series.size());
      if (inserted) series.push_back({label, {}});
      series[it->second].points.emplace_back(*x, *y);
    }
  }

  auto tx = [&](double v) { return spec.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      if ((spec.log_x && !(x > 0)) || (spec.log_y && !(y > 0)) || !std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (ty(y) - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kLeft << "\" y=\"24\" font-size=\"14\">" << escape(spec.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double vx = spec.log_x ? std::pow(10.0, fx) : fx;
    const double vy = spec.log_y ? std::pow(10.0, fy) : fy;
    const double sx = kLeft + pw * k / 4.0;
    const double sy = kTop + ph - ph * k / 4.0;
    os << "<text x=\"" << fmt_coord(sx) << "\" y=\"" << fmt_coord(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << fmt_tick(vx) << "</text>\n";
    os << "<text x=\"" << fmt_coord(kLeft - 6) << "\" y=\"" << fmt_coord(sy + 4) << "\" text-anchor=\"end\">"
       << fmt_tick(vy) << "</text>\n";
  }
  os << "<text x=\"" << fmt_coord(kLeft + pw / 2) << "\" y=\"" << fmt_coord(kHeight - 10)
     << "\" text-anchor=\"middle\">" << escape(spec.x_column) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % (sizeof kColors / sizeof kColors[0])];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      if ((spec.log_x && !(x > 0)) || (spec.log_y && !(y > 0)) || !std::isfinite(x) || !std::isfinite(y)) continue;
      os << (first ? "" : " ") << fmt_coord(px(x)) << ',' << fmt_coord(py(y));
      first = false;
    }
    os << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
    os << "<line x1=\"" << fmt_coord(kLeft + pw + 12) << "\" y1=\"" << fmt_coord(ly) << "\" x2=\""
       << fmt_coord(kLeft + pw + 32) << "\" y2=\"" << fmt_coord(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt_coord(kLeft + pw + 38) << "\" y=\"" << fmt_coord(ly + 4) << "\">"
       << escape(series[i].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DomainError("cannot open '" + path.string() + "' for writing");
  f << contents;
  if (!f) throw DomainError("failed writing '" + path.string() + "'");
}

}  // namespace sqzom::cli
