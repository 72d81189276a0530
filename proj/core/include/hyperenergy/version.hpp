#pragma once

namespace hyperenergy {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hyperenergy
