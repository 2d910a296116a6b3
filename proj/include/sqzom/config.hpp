#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sqzom/core_model.hpp"

namespace sqzom {

// Text of the bundled table_s1.toml, compiled into the library.
std::string_view bundled_params_text();

// Parameters parsed from the bundled file. Equal (bit-for-bit) to a
// default-constructed SystemParams.
SystemParams bundled_params();

// Parses a flat TOML key = value document. Keys absent from the document keep
// their bundled values; unknown or duplicate keys throw ConfigError naming the
// key. Accepted keys:
//   cavity_freq_hz omega_m_hz kappa_hz gamma_hz gamma_m_hz g0_hz
//   n_th n_c n_bath eta_in eta_det base_temperature_k noise_temperature_k
SystemParams parse_params(std::string_view text, std::string_view origin = "<string>");

SystemParams load_params(const std::filesystem::path& path);

// Serializes params with the same keys, in Hz, full precision.
std::string format_params(const SystemParams& params);

}  // namespace sqzom
