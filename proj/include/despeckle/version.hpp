#pragma once

namespace despeckle {
inline constexpr const char* kVersion = "0.3.0";
}  // namespace despeckle
