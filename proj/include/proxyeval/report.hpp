#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <json.hpp>

#include "proxyeval/version.hpp"

namespace proxyeval {

/// FNV-1a 64-bit content hash, rendered as 16 hex digits. Used to stamp
/// input files into reports so a run can be tied to its exact inputs.
inline std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char byte : data) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Rounds to a fixed number of decimals so report values are identical
/// across libm implementations that differ in the last ulp.
inline double round_decimals(double value, int decimals) {
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) scale *= 10.0;
    return std::round(value * scale) / scale;
}

/// Common report envelope: tool version plus a config echo and the
/// hashes of every input file, so reports are self-describing.
inline nlohmann::json report_envelope(const std::string& command,
                                      const nlohmann::json& config_echo,
                                      const nlohmann::json& input_hashes) {
    return nlohmann::json{{"tool", "proxyeval"},
                          {"version", kVersion},
                          {"command", command},
                          {"config", config_echo},
                          {"inputs", input_hashes}};
}

}  // namespace proxyeval
