#pragma once

namespace proxyeval {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace proxyeval
