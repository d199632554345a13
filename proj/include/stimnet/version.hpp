#pragma once

namespace stimnet {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stimnet
