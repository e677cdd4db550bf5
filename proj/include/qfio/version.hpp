#pragma once

namespace qfio {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qfio
