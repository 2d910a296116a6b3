#include "sqzom/config.hpp"

#include <array>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "bundled_table_s1.hpp"
#include "sqzom/error.hpp"

namespace sqzom {

namespace {

struct KeySpec {
  std::string_view key;
  double SystemParams::*field;
  double scale;  // file value * scale = stored value
};

constexpr std::array<KeySpec, 13> kKeys{{
    {"cavity_freq_hz", &SystemParams::cavity_freq, kTwoPi},
    {"omega_m_hz", &SystemParams::mech_freq, kTwoPi},
    {"kappa_hz", &SystemParams::cavity_linewidth, kTwoPi},
    {"gamma_m_hz", &SystemParams::intrinsic_mech_linewidth, kTwoPi},
    {"gamma_hz", &SystemParams::total_mech_linewidth, kTwoPi},
    {"g0_hz", &SystemParams::vacuum_coupling, kTwoPi},
    {"n_th", &SystemParams::n_th, 1.0},
    {"n_c", &SystemParams::n_c, 1.0},
    {"n_bath", &SystemParams::n_bath, 1.0},
    {"eta_in", &SystemParams::eta_in, 1.0},
    {"eta_det", &SystemParams::eta_det, 1.0},
    {"base_temperature_k", &SystemParams::base_temperature, 1.0},
    {"noise_temperature_k", &SystemParams::noise_temperature, 1.0},
}};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string located(std::string_view origin, int line, const std::string& message) {
  std::ostringstream out;
  out << origin << ":" << line << ": " << message;
  return out.str();
}

SystemParams parse_into(SystemParams params, std::string_view text, std::string_view origin) {
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = (end == std::string_view::npos) ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      throw ConfigError(located(origin, line_no, "tables are not supported: " + std::string(line)));
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(located(origin, line_no, "expected key = value"));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));

    const auto* spec = [&]() -> const KeySpec* {
      for (const auto& k : kKeys) {
        if (k.key == key) return &k;
      }
      return nullptr;
    }();
    if (spec == nullptr) throw ConfigError(located(origin, line_no, "unknown key '" + key + "'"));
    if (!seen.insert(key).second) {
      throw ConfigError(located(origin, line_no, "duplicate key '" + key + "'"));
    }

    errno = 0;
    char* parse_end = nullptr;
    const double parsed = std::strtod(value.c_str(), &parse_end);
    if (value.empty() || errno != 0 || parse_end != value.c_str() + value.size()) {
      throw ConfigError(located(origin, line_no, "key '" + key + "' needs a numeric value, got '" +
                                                     value + "'"));
    }
    params.*(spec->field) = parsed * spec->scale;
  }

  try {
    params.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string(origin) + ": " + e.what());
  }
  return params;
}

}  // namespace

std::string_view bundled_params_text() { return detail::kBundledParams; }

SystemParams bundled_params() {
  static const SystemParams params = parse_into(SystemParams{}, bundled_params_text(), "table_s1.toml");
  return params;
}

SystemParams parse_params(std::string_view text, std::string_view origin) {
  return parse_into(bundled_params(), text, origin);
}

SystemParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open parameter file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_params(buffer.str(), path.string());
}

std::string format_params(const SystemParams& params) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (const auto& k : kKeys) {
    out << k.key << " = " << params.*(k.field) / k.scale << "\n";
  }
  return out.str();
}

}  // namespace sqzom
