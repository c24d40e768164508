#pragma once

namespace logei {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace logei
