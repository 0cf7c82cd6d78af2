#pragma once

namespace tandepth {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace tandepth
