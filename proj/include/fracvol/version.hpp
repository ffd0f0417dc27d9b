#pragma once

namespace fracvol {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fracvol
