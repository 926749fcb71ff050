#pragma once

namespace twa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace twa
